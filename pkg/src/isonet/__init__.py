"""Interference, outage and throughput in isotropic Poisson ad hoc networks."""

__version__ = "0.1.0"
