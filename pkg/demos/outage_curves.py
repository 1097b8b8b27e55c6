"""Outage probability against receiver distance, with and without noise.

The exact curve is printed next to a Monte Carlo estimate and its 95%
interval.  Far from the cluster the outage settles at the noise-only
value 1 - exp(-beta eta).

Run: python3 demos/outage_curves.py [trials]
"""

import math
import sys

from isonet import analytic as an
from isonet import sim
from isonet.model import ChannelParams, NetworkScenario, exp_power

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 20_000
for alpha in (2, 4):
    for eta in (0.0, 0.1):
        s = NetworkScenario(exp_power(100, 3), 1e-3, ChannelParams(alpha, 1.0, 10.0, eta, 0.5))
        print(f"alpha={alpha} eta={eta}  (noise floor {1 - math.exp(-0.5 * eta):.5f})")
        for y0 in range(0, 301, 50):
            q = an.outage_probability(s, y0)
            est = sim.estimate_outage(s, y0, sim.SimConfig(trials, 1 + y0))
            mark = " " if est.covers(q) else "*"
            print(f"  y0={y0:3d}  q={q:.5f}  mc={est.mean:.5f} [{est.ci95_low:.5f}, {est.ci95_high:.5f}]{mark}")
        print()
