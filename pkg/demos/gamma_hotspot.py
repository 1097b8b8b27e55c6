"""Where does the locally-homogeneous outage approximation break down?

gamma(y0) is the log ratio of the exact success probability to the one a
homogeneous network with the local intensity would give.  It vanishes deep
inside the hotspot and peaks where the density changes.

Run: python3 demos/gamma_hotspot.py
"""

from isonet import analytic as an
from isonet.model import ChannelParams, NetworkScenario, hotspot

s = NetworkScenario(hotspot(70, 500), 1e-3, ChannelParams(4, 1.0, 10.0, 0.0, 1.0))
print(f"{'y0':>5} {'F':>7} {'q exact':>9} {'q approx':>9} {'gamma':>9}")
for y0 in range(0, 701, 50):
    print(f"{y0:5d} {float(s.shape(y0)):7.3f} {an.outage_probability(s, y0):9.5f} "
          f"{an.approx_outage(s, y0):9.5f} {an.gamma_ratio(s, y0):+9.5f}")
