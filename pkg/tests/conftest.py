import math

import pytest

from isonet.model import ChannelParams, NetworkScenario, exp_power, exponential, homogeneous


def scenario(shape=None, lam=1e-3, alpha=4, c=1.0, d=10.0, eta=0.0, beta=0.5):
    return NetworkScenario(shape or exp_power(100, 3), lam, ChannelParams(alpha, c, d, eta, beta))


@pytest.fixture
def cubic_scenario():
    """Outage-curve reference: exp(-(r/100)^3), lambda=1e-3, alpha=4, d=10, beta=0.5."""
    return scenario()


@pytest.fixture
def exp_scenario():
    return scenario(exponential(250), alpha=2, beta=1.0)


@pytest.fixture
def flat_alpha4():
    return scenario(homogeneous())


def rel(a, b):
    return abs(a - b) / abs(b) if b else abs(a)


HALF_PI2 = 0.5 * math.pi**2
