"""Mean interference and its Laplace transform across a cubic-exponential deployment.

Run: python3 demos/interference_moments.py
"""

from isonet import analytic as an
from isonet.model import ChannelParams, NetworkScenario, exp_power

shape = exp_power(100, 3)
for alpha in (2, 4):
    s = NetworkScenario(shape, 1e-3, ChannelParams(alpha, 1.0, 10.0, 0.0, 0.5))
    print(f"alpha = {alpha}")
    print(f"{'y0':>6} {'F(y0)':>10} {'E[I]':>12} {'L(1/E[I])':>10}")
    for y0 in (0, 50, 100, 150, 200, 300):
        m = an.mean_interference(s, y0)
        print(f"{y0:6.0f} {float(shape(y0)):10.4g} {m:12.5g} {an.laplace_interference(s, y0, 1 / m):10.5f}")
    print()
