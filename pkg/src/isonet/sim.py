"""Monte Carlo network simulator used as an independent oracle.

Transmitters are a homogeneous PPP in a disk of radius ``r_max``, thinned
with retention probability ``F(|x|)``.  A fresh draw already has the reduced
Palm law of a PPP, so the reference link is simply added on top.

Seeding rule: trial ``t`` belongs to block ``t // BLOCK`` and draws from
``SeedSequence(master_seed, spawn_key=(block,))``.  Every block is simulated
in full, so a trial's outcome depends only on ``(scenario, seed, t)`` and not on
the number of trials, the worker count or the scheduling order.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, NonConvergence, TailConditionError
from .model import NetworkScenario, ShapeFunction, eta_at_distance, sinr
from .quadrature import QuadratureSpec, integrate_semi_infinite

BLOCK = 1024
Z95 = 1.959963984540054
_BOUND_SPEC = QuadratureSpec(abs_tol=1e-14, rel_tol=1e-6)


@dataclass(frozen=True)
class SimConfig:
    trials: int
    master_seed: int
    r_max: float | None = None  # derived from tail_tol when omitted
    tail_tol: float = 1e-6
    workers: int | None = None
    unit_gain: bool = False  # interferer gains fixed at 1 (mean-interference checks)

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError("trials must be a positive integer")
        if not 0 <= int(self.master_seed) < 2**64:
            raise DomainError("master_seed must be a 64-bit unsigned integer")
        if self.r_max is not None and not self.r_max > 0:
            raise DomainError("r_max must be positive")
        if not self.tail_tol > 0:
            raise DomainError("tail_tol must be positive")


@dataclass(frozen=True)
class SimEstimate:
    mean: float
    std_error: float
    ci95_low: float
    ci95_high: float
    trials: int
    master_seed: int

    @classmethod
    def from_mean(cls, mean: float, se: float, trials: int, seed: int) -> "SimEstimate":
        return cls(float(mean), float(se), float(mean - Z95 * se), float(mean + Z95 * se),
                   int(trials), int(seed))

    @classmethod
    def from_count(cls, hits: int, trials: int, seed: int) -> "SimEstimate":
        """Binomial proportion with a Wilson score interval, which stays honest near 0 and 1."""
        p = hits / trials
        z2 = Z95 * Z95
        centre = (p + z2 / (2 * trials)) / (1 + z2 / trials)
        half = Z95 * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / (1 + z2 / trials)
        return cls(float(p), math.sqrt(p * (1 - p) / trials), float(max(centre - half, 0.0)),
                   float(min(centre + half, 1.0)), int(trials), int(seed))

    def covers(self, value: float) -> bool:
        return self.ci95_low <= value <= self.ci95_high


class LinkSamples(NamedTuple):
    """Per-trial draws at one receiver: interference and reference-link SINR."""
    interference: np.ndarray
    sinr: np.ndarray


def block_rng(master_seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(int(master_seed), spawn_key=(int(block),))))


# ---------------------------------------------------------------------------
# Window truncation
# ---------------------------------------------------------------------------

def tail_bound(s: NetworkScenario, y0: float, r_max: float, s_arg: float | None = None) -> float:
    """Upper bound on what transmitters beyond ``r_max`` add.

    Without ``s_arg`` this bounds the mean interference,
    ``lam int_{r_max}^inf 2 pi r F_env(r) / (c + (r - y0)^alpha) dr``.  With
    ``s_arg`` it bounds the Laplace exponent, using the kernel
    ``s / (s + c + (r - y0)^alpha)`` instead.  Needs ``r_max >= y0`` and
    ``r_max >= tail_onset`` so the envelope applies.
    """
    ch = s.channel
    if s.lam == 0:
        return 0.0
    if r_max < y0 or r_max < s.shape.tail_onset:
        raise DomainError("the tail bound needs r_max beyond y0 and the tail onset")
    if s_arg is None:
        def kern(rho):
            return 1.0 / (ch.c + rho**ch.alpha)
    else:
        def kern(rho):
            return s_arg / (s_arg + ch.c + rho**ch.alpha)

    def g(r):
        return 2.0 * math.pi * r * float(s.shape.envelope(r)) * kern(r - y0)

    try:
        val = integrate_semi_infinite(g, _BOUND_SPEC, (), max(s.shape.scale, r_max - y0, 1.0),
                                      start=r_max).value
    except NonConvergence:
        return math.inf
    return s.lam * val


def _search_radius(bound, start: float, tol: float) -> float:
    hi = start
    for _ in range(80):
        if bound(hi) < tol:
            break
        hi *= 2.0
    else:
        raise TailConditionError("no finite window meets the tail tolerance")
    if hi == start:
        return hi
    lo = hi / 2.0
    while hi - lo > 1e-3 * hi:
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if bound(mid) < tol else (mid, hi)
    return hi


def truncation_radius(s: NetworkScenario, y0: float, tail_tol: float = 1e-6,
                      s_arg: float | None = None) -> float:
    """Smallest window radius (to 0.1 %) whose :func:`tail_bound` is below ``tail_tol``."""
    start = max(s.shape.tail_onset, y0 + 1.0, 1.0)
    if s.lam == 0:
        return start
    return _search_radius(lambda R: tail_bound(s, y0, R, s_arg), start, tail_tol)


def mass_radius(shape: ShapeFunction, tail_tol: float = 1e-6) -> float:
    """Radius holding all but a fraction ``tail_tol`` of the expected transmitters."""
    if not shape.tail_nu > 2:
        raise TailConditionError("the expected node count is infinite")
    total = integrate_semi_infinite(lambda r: r * float(shape(r)), _BOUND_SPEC,
                                    shape.breakpoints, shape.scale).value

    def frac(R):
        return integrate_semi_infinite(lambda r: r * float(shape.envelope(r)), _BOUND_SPEC,
                                       (), shape.scale, start=R).value / total

    return _search_radius(frac, max(shape.tail_onset, 1.0), tail_tol)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def _thinned_points(shape: ShapeFunction, lam: float, r_max: float, counts: np.ndarray,
                    rng: np.random.Generator):
    total = int(counts.sum())
    rad = r_max * np.sqrt(rng.random(total))
    ang = 2.0 * math.pi * rng.random(total)
    keep = rng.random(total) < shape(rad)
    owner = np.repeat(np.arange(counts.size), counts)[keep]
    rad, ang = rad[keep], ang[keep]
    return owner, rad * np.cos(ang), rad * np.sin(ang)


def sample_ppp(shape: ShapeFunction, lam: float, r_max: float, seed) -> np.ndarray:
    """One realization of the thinned PPP in the disk of radius ``r_max``, shape ``(n, 2)``."""
    if not r_max > 0:
        raise DomainError("r_max must be positive")
    if lam < 0:
        raise DomainError("lambda must be non-negative")
    rng = np.random.default_rng(seed)
    counts = rng.poisson(lam * math.pi * r_max**2, size=1)
    _, x, y = _thinned_points(shape, lam, r_max, counts, rng)
    return np.column_stack([x, y])


def _link_block(s: NetworkScenario, rx: tuple[float, float], r_max: float, seed: int,
                block: int, unit_gain: bool) -> LinkSamples:
    rng = block_rng(seed, block)
    ch = s.channel
    counts = rng.poisson(s.lam * math.pi * r_max**2, size=BLOCK)
    owner, x, y = _thinned_points(s.shape, s.lam, r_max, counts, rng)
    dist = np.hypot(x - rx[0], y - rx[1])
    gains = np.ones(owner.size) if unit_gain else rng.exponential(size=owner.size)
    interference = np.bincount(owner, weights=gains / (ch.c + dist**ch.alpha), minlength=BLOCK)
    signal = rng.exponential(size=BLOCK)
    return LinkSamples(interference, sinr(signal, interference, ch))


def _run_blocks(fn, n_blocks: int, workers: int | None):
    if workers and workers > 1 and n_blocks > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(fn, range(n_blocks)))
    return [fn(b) for b in range(n_blocks)]


def simulate_link(s: NetworkScenario, y0: float, cfg: SimConfig, angle: float = 0.0,
                  s_arg: float | None = None) -> LinkSamples:
    """Per-trial interference and SINR at a receiver at distance ``y0``.

    The receiver sits at polar angle ``angle``.  ``s_arg`` chooses which
    tail bound sizes the window when ``cfg.r_max`` is unset.
    """
    if y0 < 0:
        raise DomainError("y0 must be non-negative")
    r_max = cfg.r_max or truncation_radius(s, y0, cfg.tail_tol, s_arg)
    rx = (y0 * math.cos(angle), y0 * math.sin(angle))
    n_blocks = -(-cfg.trials // BLOCK)
    parts = _run_blocks(lambda b: _link_block(s, rx, r_max, cfg.master_seed, b, cfg.unit_gain),
                        n_blocks, cfg.workers)
    n = cfg.trials
    return LinkSamples(np.concatenate([p.interference for p in parts])[:n],
                       np.concatenate([p.sinr for p in parts])[:n])


def _estimate(samples: np.ndarray, cfg: SimConfig) -> SimEstimate:
    n = samples.size
    mean = float(np.mean(samples))
    se = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return SimEstimate.from_mean(mean, se, n, cfg.master_seed)


def estimate_mean_interference(s: NetworkScenario, y0: float, cfg: SimConfig) -> SimEstimate:
    return _estimate(simulate_link(s, y0, cfg).interference, cfg)


def estimate_outage(s: NetworkScenario, y0: float, cfg: SimConfig, angle: float = 0.0) -> SimEstimate:
    """Fraction of trials whose reference SINR falls below ``beta``, with a Wilson interval."""
    ch = s.channel
    samples = simulate_link(s, y0, cfg, angle, ch.beta * ch.link_gain_inverse)
    return SimEstimate.from_count(int(np.count_nonzero(samples.sinr < ch.beta)), cfg.trials,
                                  cfg.master_seed)


def estimate_laplace(s: NetworkScenario, y0: float, s_arg: float, cfg: SimConfig) -> SimEstimate:
    if s_arg < 0:
        raise DomainError("Laplace argument must be non-negative")
    if s_arg == 0:
        return SimEstimate.from_mean(1.0, 0.0, cfg.trials, cfg.master_seed)
    samples = simulate_link(s, y0, cfg, s_arg=s_arg)
    return _estimate(np.exp(-s_arg * samples.interference), cfg)


def write_raw_samples(samples: LinkSamples, beta: float, fh) -> None:
    """One CSV record per trial: index, interference, SINR and outage flag."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["trial_index", "interference", "sinr", "outage_flag"])
    for t, (i, q) in enumerate(zip(samples.interference, samples.sinr)):
        w.writerow([t, repr(float(i)), repr(float(q)), int(q < beta)])


# ---------------------------------------------------------------------------
# Network-wide success ratio
# ---------------------------------------------------------------------------

def _ast_block(s: NetworkScenario, r_max: float, seed: int, block: int,
               lambda_r: float | None, limit: int) -> tuple[np.ndarray, np.ndarray]:
    rng = block_rng(seed, block)
    ch = s.channel
    counts = rng.poisson(s.lam * math.pi * r_max**2, size=BLOCK)
    owner, x, y = _thinned_points(s.shape, s.lam, r_max, counts, rng)
    n_links = np.bincount(owner, minlength=BLOCK)
    wins = np.zeros(BLOCK)
    starts = np.concatenate([[0], np.cumsum(n_links)])
    # trials draw their links in order, so stopping early leaves earlier ones unchanged
    for t in range(limit):
        a, b = starts[t], starts[t + 1]
        n = b - a
        if n == 0:
            continue
        tx = np.column_stack([x[a:b], y[a:b]])
        psi = 2.0 * math.pi * rng.random(n)
        if lambda_r is None:
            d = np.full(n, ch.d)
            eta = np.full(n, ch.eta)
        else:
            mu = lambda_r * s.shape(np.hypot(tx[:, 0], tx[:, 1]))
            d = np.sqrt(-np.log(rng.random(n)) / (math.pi * mu))
            eta = eta_at_distance(ch.eta, d, ch)
        rx = tx + d[:, None] * np.column_stack([np.cos(psi), np.sin(psi)])
        # dist[i, j]: transmitter j to receiver i
        dist = np.hypot(rx[:, None, 0] - tx[None, :, 0], rx[:, None, 1] - tx[None, :, 1])
        gains = rng.exponential(size=(n, n))
        field = gains / (ch.c + dist**ch.alpha)
        np.fill_diagonal(field, 0.0)
        interference = field.sum(axis=1)
        link = np.diagonal(gains) / (eta + (ch.c + d**ch.alpha) * interference)
        wins[t] = np.count_nonzero(link >= ch.beta)
    return wins, n_links.astype(float)


def estimate_ast(s: NetworkScenario, cfg: SimConfig, lambda_r: float | None = None) -> SimEstimate:
    """Ratio of successful to attempted transmissions across the network.

    Each transmitter's receiver sits at distance ``d`` with uniform angle; with
    ``lambda_r`` the distance is drawn from the nearest-neighbour law of
    intensity ``lambda_r F(|x|)`` instead, and noise scales with it.  The
    window keeps all but ``tail_tol`` of the expected transmitters; the
    error is a delta-method ratio estimate.
    """
    if lambda_r is not None and not lambda_r > 0:
        raise DomainError("receiver intensity must be positive")
    if s.lam == 0:
        return SimEstimate(math.nan, math.nan, math.nan, math.nan, cfg.trials, cfg.master_seed)
    r_max = cfg.r_max or mass_radius(s.shape, cfg.tail_tol)
    n_blocks = -(-cfg.trials // BLOCK)
    parts = _run_blocks(
        lambda b: _ast_block(s, r_max, cfg.master_seed, b, lambda_r,
                             min(BLOCK, cfg.trials - b * BLOCK)),
        n_blocks, cfg.workers)
    n = cfg.trials
    wins = np.concatenate([p[0] for p in parts])[:n]
    links = np.concatenate([p[1] for p in parts])[:n]
    total = links.sum()
    if total == 0:
        return SimEstimate(math.nan, math.nan, math.nan, math.nan, n, cfg.master_seed)
    ratio = wins.sum() / total
    resid = wins - ratio * links
    se = math.sqrt(np.sum(resid * resid) / (n * (n - 1))) / links.mean() if n > 1 else 0.0
    return SimEstimate.from_mean(ratio, se, n, cfg.master_seed)
