"""Sum rate against the SINR threshold, and the best threshold, for three noise levels."""

import numpy as np

from isonet import throughput as tp
from isonet.model import ChannelParams, NetworkScenario, exponential, parse_level

grid = np.arange(-20.0, 20.5, 2.5)
for eta, lam, lam_r in (("-8dB", 1e-3, 1e-2), ("-14dB", 1e-2, 1e-2), ("-18dB", 3e-4, 1e-3)):
    s = NetworkScenario(exponential(250), lam, ChannelParams(2, 1.0, 10.0, parse_level(eta), 1.0))
    rates = tp.sum_rate_curve(s, lam_r, grid, workers=4)
    opt = tp.optimize_beta(s, lam_r)
    print(f"eta={eta} lambda={lam:g} lambda_r={lam_r:g}")
    for b, r in zip(grid, rates):
        print(f"  {b:6.1f} dB  {r:.4f}  " + "#" * int(60 * r / opt.rate_star))
    print(f"  best threshold {opt.beta_star_db:.2f} dB, rate {opt.rate_star:.4f}\n")
