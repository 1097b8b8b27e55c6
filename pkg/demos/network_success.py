"""Network-wide success ratio: quadrature against the full-network simulator.

With lambda_r set, each transmitter talks to its nearest receiver instead of
one at the fixed distance d.
"""

from isonet import sim
from isonet import throughput as tp
from isonet.model import ChannelParams, NetworkScenario, exponential

s = NetworkScenario(exponential(250), 3e-4, ChannelParams(2, 1.0, 10.0, 0.0, 1.0))
print("fixed distance:   analytic %.4f" % tp.ast(tp.AstQuery(s)), end="  ")
est = sim.estimate_ast(s, sim.SimConfig(1000, 5))
print("simulated %.4f +- %.4f" % (est.mean, est.std_error))

s = s.replace(channel=s.channel.replace(eta=0.1))
print("nearest receiver: analytic %.4f" % tp.connected_success_ratio(s, 1e-2), end="  ")
est = sim.estimate_ast(s, sim.SimConfig(1000, 5), lambda_r=1e-2)
print("simulated %.4f +- %.4f" % (est.mean, est.std_error))
