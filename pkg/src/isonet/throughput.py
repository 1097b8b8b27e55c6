"""Local throughput: differential transmission capacity, average sum
throughput and the sum-rate optimization over the SINR threshold."""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .analytic import DRIVING_SPEC, driving_function, driving_grid, laplace_interference
from .errors import DomainError, FlatObjectiveError, InfeasibleError, TailConditionError
from .model import ChannelParams, NetworkScenario, ShapeFunction, eta_at_distance
from .quadrature import QuadratureSpec, composite_gauss, integrate_semi_infinite

# the nearest-neighbour distance integral stops where the survival 1 - F_d drops below this
NN_SURVIVAL_CUTOFF = 1e-8
_V_MAX = math.log(1.0 / NN_SURVIVAL_CUTOFF)
_V_RULE = composite_gauss(np.linspace(0.0, 1.0, 4), 8)
_V_PROBE = _V_MAX * np.logspace(-10.0, 0.0, 21)
# integrand exponents beyond this contribute below 1e-13
_EXPONENT_CAP = 30.0
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


# ---------------------------------------------------------------------------
# Differential transmission capacity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DtcQuery:
    y0: float
    epsilon: float
    channel: ChannelParams
    shape: ShapeFunction

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise DomainError("epsilon must lie in (0, 1)")
        if not self.y0 >= 0:
            raise DomainError("y0 must be non-negative")


def dtc_intensity(q: DtcQuery, tol: QuadratureSpec | None = None) -> float:
    """Base intensity at which the outage at ``y0`` equals ``epsilon`` exactly."""
    ch = q.channel
    budget = -math.log1p(-q.epsilon) - ch.beta * ch.eta
    if budget <= 0:
        raise InfeasibleError(
            f"noise alone uses the outage budget (beta*eta = {ch.beta * ch.eta:.6g} "
            f">= ln(1/(1-eps)) = {-math.log1p(-q.epsilon):.6g})")
    s = ch.beta * ch.link_gain_inverse
    A = driving_function(q.shape, ch.alpha, q.y0, s + ch.c, tol).value
    return budget / (s * A)


def dtc(q: DtcQuery, tol: QuadratureSpec | None = None) -> float:
    """Maximal density of successful transmissions near ``y0``: ``lam(eps) (1 - eps)``."""
    return dtc_intensity(q, tol) * (1.0 - q.epsilon)


# ---------------------------------------------------------------------------
# Average sum throughput
# ---------------------------------------------------------------------------

class SuccessModel(enum.Enum):
    SINR_ONLY = "sinr"
    SINR_AND_CONNECTED = "sinr+connected"


@dataclass(frozen=True)
class AstQuery:
    scenario: NetworkScenario
    success_model: SuccessModel = SuccessModel.SINR_ONLY
    receiver_intensity: float | None = None

    def __post_init__(self):
        if self.success_model is SuccessModel.SINR_AND_CONNECTED:
            if self.receiver_intensity is None or not self.receiver_intensity > 0:
                raise DomainError("SINR_AND_CONNECTED needs a positive receiver intensity")


def _require_tail(shape: ShapeFunction) -> None:
    if not shape.tail_nu > 2:
        raise TailConditionError(
            f"the node count is infinite unless F(r) r^nu stays bounded for some nu > 2 "
            f"(declared tail exponent {shape.tail_nu:g})")


def _shape_breaks(shape: ShapeFunction) -> list[float]:
    pts = list(shape.breakpoints) + [r for r, _ in shape.jumps]
    return sorted(p for p in set(pts) if p > 0 and math.isfinite(p))


def transmitter_mass(shape: ShapeFunction, spec: QuadratureSpec | None = None) -> float:
    """``int_0^inf r F(r) dr``, the expected node count divided by ``2 pi lam``."""
    _require_tail(shape)
    return integrate_semi_infinite(lambda r: r * float(shape(r)), spec or DRIVING_SPEC,
                                   _shape_breaks(shape), shape.scale).value


def ast(q: AstQuery, beta_override: float | None = None,
        tol: QuadratureSpec | None = None) -> float:
    """Fraction of transmissions that succeed, averaged over the whole network.

    ``SINR_ONLY`` averages ``1 - q(r)`` against the transmitter density;
    ``SINR_AND_CONNECTED`` also averages over the nearest-receiver distance.
    """
    s = q.scenario
    if beta_override is not None:
        s = s.replace(channel=s.channel.replace(beta=beta_override))
    _require_tail(s.shape)
    if q.success_model is SuccessModel.SINR_AND_CONNECTED:
        return connected_success_ratio(s, q.receiver_intensity)
    ch = s.channel
    noise = math.exp(-ch.beta * ch.eta)
    if s.lam == 0:
        return noise
    spec = tol or DRIVING_SPEC
    s_arg = ch.beta * ch.link_gain_inverse

    def weighted_success(r):
        F = float(s.shape(r))
        if F == 0.0:
            return 0.0
        return r * F * laplace_interference(s, r, s_arg, spec)

    brk = _shape_breaks(s.shape)
    num = integrate_semi_infinite(weighted_success, QuadratureSpec(1e-13, 1e-9), brk,
                                  s.shape.scale).value
    den = transmitter_mass(s.shape)
    return min(max(noise * num / den, 0.0), 1.0)


# ---------------------------------------------------------------------------
# Nearest-neighbour distances and the sum rate
# ---------------------------------------------------------------------------

def nearest_neighbor_cdf(d, local_intensity: float):
    """``P(nearest point within d) = 1 - exp(-mu pi d^2)`` for a PPP of intensity ``mu``."""
    if local_intensity < 0:
        raise DomainError("intensity must be non-negative")
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise DomainError("distance must be non-negative")
    out = -np.expm1(-local_intensity * math.pi * d * d)
    return out if out.ndim else float(out)


def _radial_rule(shape: ShapeFunction, panels: int = 12, n: int = 8):
    """Nodes and weights on ``[0, inf)``: Gauss panels up to the last
    breakpoint, then ``r = b + scale t / (1 - t)``."""
    brk = _shape_breaks(shape)
    xs, ws = [], []
    lo = 0.0
    for hi in brk:
        x, w = composite_gauss(np.linspace(lo, hi, 9), n)
        xs.append(x)
        ws.append(w)
        lo = hi
    t, wt = composite_gauss(np.linspace(0.0, 1.0, panels + 1), n)
    scale = shape.scale
    xs.append(lo + scale * t / (1.0 - t))
    ws.append(wt * scale / (1.0 - t) ** 2)
    return np.concatenate(xs), np.concatenate(ws)


def connected_success_ratio(s: NetworkScenario, lambda_r: float, beta: float | None = None,
                            distance: float | None = None) -> float:
    """Success ratio when every transmitter serves its nearest receiver.

    The receiver process has intensity ``lambda_r F(x)`` locally, and every
    field is evaluated at the transmitter.  Noise follows the distance as
    ``eta(d) = eta (c + d^alpha) / (c + 10^alpha)``.  A fixed ``distance``
    replaces the nearest-neighbour law by a point mass.
    """
    _require_tail(s.shape)
    ch = s.channel if beta is None else s.channel.replace(beta=beta)
    if distance is None and not lambda_r > 0:
        raise DomainError("receiver intensity must be positive")
    r, wr = _radial_rule(s.shape)
    F = np.asarray(s.shape(r), dtype=float)
    keep = F > 1e-30 * F.max()  # the rest carries no weight and would overflow mu
    r, wr, F = r[keep], wr[keep], F[keep]
    den = np.sum(wr * r * F)

    def exponent(dist, rr):
        gain_inv = ch.c + dist**ch.alpha
        s_arg = ch.beta * gain_inv
        e = ch.beta * eta_at_distance(ch.eta, dist, ch)
        if s.lam > 0:
            A = driving_grid(s.shape, ch.alpha, np.broadcast_to(rr, s_arg.shape), s_arg + ch.c)
            e = e + s.lam * s_arg * A
        return e

    if distance is None:
        mu = (lambda_r * F)[:, None]
        # the success probability can collapse long before the distance law
        # does (small mu), so the v range ends where the exponent passes the cap
        probe = _V_PROBE[None, :]
        total = probe + exponent(np.sqrt(probe / (math.pi * mu)), r[:, None])
        past = total >= _EXPONENT_CAP
        first = np.where(past.any(axis=1), past.argmax(axis=1), probe.size - 1)
        v_hi = _V_PROBE[first][:, None]
        # the exponent has a singularity a distance ~delta left of v = 0, where
        # s + c vanishes; v = delta (e^t - 1) keeps it smooth on the rule
        delta = math.pi * mu * (ch.c * (1.0 + ch.beta) / ch.beta) ** (2.0 / ch.alpha)
        t_hi = np.log1p(v_hi / delta)
        x, wx = _V_RULE
        t = t_hi * x[None, :]
        v = delta * np.expm1(t)
        d = np.sqrt(v / (math.pi * mu))
        jac = delta * np.exp(t) * t_hi
        inner = np.sum(np.exp(-v - exponent(d, r[:, None])) * wx * jac, axis=1)
    else:
        d = np.full((r.size, 1), float(distance))
        inner = np.exp(-exponent(d, r[:, None]))[:, 0]
    return float(np.clip(np.sum(wr * r * F * inner) / den, 0.0, 1.0))


def expected_sum_rate(s: NetworkScenario, lambda_r: float, beta: float,
                      distance: float | None = None) -> float:
    """``log2(1 + beta)`` times the nearest-receiver success ratio."""
    if not beta > 0:
        raise DomainError("beta must be positive")
    return math.log2(1.0 + beta) * connected_success_ratio(s, lambda_r, beta, distance)


def sum_rate_curve(s: NetworkScenario, lambda_r: float, betas_db: Sequence[float],
                   workers: int | None = None) -> np.ndarray:
    """Sum rate on a grid of thresholds given in dB, ordered by grid index."""
    betas = [10.0 ** (b / 10.0) for b in betas_db]
    if workers and workers > 1 and len(betas) > 1:
        with ThreadPoolExecutor(workers) as pool:
            rates = list(pool.map(lambda b: expected_sum_rate(s, lambda_r, b), betas))
    else:
        rates = [expected_sum_rate(s, lambda_r, b) for b in betas]
    return np.asarray(rates, dtype=float)


class BetaOptimum(NamedTuple):
    beta_star: float
    beta_star_db: float
    rate_star: float
    at_boundary: bool


def optimize_beta(s: NetworkScenario, lambda_r: float,
                  beta_range_db: tuple[float, float] = (-20.0, 20.0),
                  grid_points: int = 25, tol_db: float = 0.05) -> BetaOptimum:
    """Maximize the sum rate over ``beta``.

    A coarse grid in dB brackets the maximum, then golden-section search on
    the dB scale narrows it to ``tol_db``.  ``at_boundary`` marks a maximizer
    at an end of the range.
    """
    lo, hi = map(float, beta_range_db)
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise DomainError("beta range must be a finite interval with lo < hi")

    def rate(b_db):
        return expected_sum_rate(s, lambda_r, 10.0 ** (b_db / 10.0))

    grid = np.linspace(lo, hi, grid_points)
    vals = np.array([rate(b) for b in grid])
    if vals.max() - vals.min() < 1e-12:
        raise FlatObjectiveError("sum rate is flat over the threshold range")
    k = int(np.argmax(vals))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, grid_points - 1)]

    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = rate(x1), rate(x2)
    while b - a > tol_db:
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = rate(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = rate(x2)
    best_db, best = (x1, f1) if f1 >= f2 else (x2, f2)
    boundary = False
    if k in (0, grid_points - 1) and vals[k] >= best:
        best_db, best, boundary = grid[k], vals[k], True
    return BetaOptimum(float(10.0 ** (best_db / 10.0)), float(best_db), float(best), bool(boundary))
