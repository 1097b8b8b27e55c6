"""Numerical integration backbone.

Adaptive integration over ``[0, inf)`` through a rational tail map, closed
forms of two classical integral identities (with complex-parameter
counterparts), a polar brute-force field integral used as an oracle, and
fixed composite Gauss-Legendre rules for vectorized evaluation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numpy.polynomial import legendre
from scipy.integrate import quad

from .errors import DomainError, NonConvergence


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")

    def target(self, value: float) -> float:
        return max(self.abs_tol, self.rel_tol * abs(value))


DEFAULT_SPEC = QuadratureSpec()


class QuadResult(NamedTuple):
    value: float
    error: float


def _quad_piece(g, a, b, spec):
    out = quad(g, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol,
               limit=spec.max_subdivisions, full_output=1)
    value, err = float(out[0]), float(out[1])
    ok = len(out) == 3  # a fourth element carries the QUADPACK warning message
    return value, err, ok, (None if ok else out[3])


def integrate_finite(g: Callable[[float], float], a: float, b: float,
                     spec: QuadratureSpec | None = None,
                     breakpoints: Sequence[float] = ()) -> QuadResult:
    spec = spec or DEFAULT_SPEC
    edges = [a] + sorted(p for p in set(breakpoints) if a < p < b) + [b]
    total, err, failed = 0.0, 0.0, []
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e, ok, msg = _quad_piece(g, lo, hi, spec)
        total += v
        err += e
        if not ok:
            failed.append(msg)
    if failed and err > spec.target(total):
        raise NonConvergence(f"quadrature did not converge: {failed[0]}", total, err)
    return QuadResult(total, err)


def integrate_semi_infinite(g: Callable[[float], float], spec: QuadratureSpec | None = None,
                            breakpoints: Sequence[float] = (), scale: float = 1.0,
                            start: float = 0.0) -> QuadResult:
    """Integrate ``g`` over ``[start, inf)``.

    Finite pieces between sorted ``breakpoints`` use adaptive Gauss-Kronrod
    directly; the last piece ``[b, inf)`` is mapped to ``t in [0, 1)`` by
    ``r = b + scale * t / (1 - t)``.  With no breakpoints and unit scale this
    is the plain map ``r = t / (1 - t)``.
    """
    spec = spec or DEFAULT_SPEC
    pts = sorted(p for p in set(breakpoints) if p > start and math.isfinite(p))
    edges = [start] + pts
    total, err, failed = 0.0, 0.0, []
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e, ok, msg = _quad_piece(g, lo, hi, spec)
        total += v
        err += e
        if not ok:
            failed.append(msg)

    b = edges[-1]

    def mapped(t):
        one_minus = 1.0 - t
        if one_minus <= 0.0:
            return 0.0
        r = b + scale * t / one_minus
        return g(r) * scale / (one_minus * one_minus)

    v, e, ok, msg = _quad_piece(mapped, 0.0, 1.0, spec)
    total += v
    err += e
    if not ok:
        failed.append(msg)
    if not math.isfinite(total):
        raise NonConvergence("integral is not finite", total, err)
    if failed and err > spec.target(total):
        raise NonConvergence(f"quadrature did not converge: {failed[0]}", total, err)
    return QuadResult(total, err)


# ---------------------------------------------------------------------------
# Closed-form identities
# ---------------------------------------------------------------------------

def _legendre(n: int, x):
    return legendre.legval(x, [0.0] * n + [1.0])


def identity1(a: float, b: float, n: int) -> float:
    """``int_0^pi dphi / (a + b cos phi)**(n+1)`` for real ``a > |b|``."""
    if n < 0 or int(n) != n:
        raise DomainError("n must be a non-negative integer")
    if not a > abs(b):
        raise DomainError("identity1 requires a > |b|")
    q = a * a - b * b
    return float(math.pi * _legendre(int(n), a / math.sqrt(q)) / q ** ((n + 1) / 2.0))


def identity1_complex(a: complex, b: complex, n: int) -> complex:
    """Principal-branch continuation of :func:`identity1` to complex parameters.

    Valid when ``a + b cos(phi)`` stays away from zero and the path from the
    real case does not cross the square-root branch cut (e.g. ``Re a > |b|``).
    """
    a, b = complex(a), complex(b)
    root = np.sqrt(a * a - b * b)
    return complex(np.pi * _legendre(int(n), a / root) / root ** (n + 1))


def _delta_branch(a1, a2, a3):
    delta = 4.0 * a1 * a3 - a2 * a2
    if abs(delta) < 1e-12 * (4.0 * abs(a1 * a3) + a2 * a2):
        return 0.0
    return delta


def identity2_antiderivative(t, a1: float, a2: float, a3: float):
    """Antiderivative of ``2 t sqrt(a3) / sqrt(a1 + a2 t^2 + a3 t^4)``.

    Branch by ``delta = 4 a1 a3 - a2^2``: ``log|.|`` for ``delta < 0``,
    ``arcsinh`` for ``delta > 0`` and ``log|2 a3 t^2 + a2|`` at ``delta = 0``.
    """
    if not a3 > 0:
        raise DomainError("identity2 requires a3 > 0")
    t = np.asarray(t, dtype=float)
    R = a1 + a2 * t * t + a3 * t**4
    if np.any(R <= 0):
        raise DomainError("identity2 requires a1 + a2 t^2 + a3 t^4 > 0")
    delta = _delta_branch(a1, a2, a3)
    lin = 2.0 * a3 * t * t + a2
    if delta > 0:
        out = np.arcsinh(lin / math.sqrt(delta))
    elif delta < 0:
        root = 2.0 * np.sqrt(a3 * R)
        sd = math.sqrt(-delta)
        # log|root + lin|; for lin < 0 use (root + lin)(root - lin) = delta
        with np.errstate(divide="ignore"):
            out = np.where(lin >= 0, np.log((root + np.abs(lin)) / sd),
                           np.log(sd / (root + np.abs(lin))))
    else:
        out = np.sign(lin) * np.log(np.abs(lin))
    return out if out.ndim else float(out)


def identity2_antiderivative_complex(t, a1: complex, a2: complex, a3: complex = 1.0):
    """Logarithmic branch of :func:`identity2_antiderivative` for complex parameters.

    Returns ``log((2 sqrt(a3 R) + 2 a3 t^2 + a2) / sqrt(delta))`` with principal
    square roots and logarithm; it is an antiderivative wherever the argument
    avoids the negative real axis along the path of integration.
    """
    t = np.asarray(t, dtype=float)
    a1, a2, a3 = complex(a1), complex(a2), complex(a3)
    R = a1 + a2 * t * t + a3 * t**4
    delta = 4.0 * a1 * a3 - a2 * a2
    return np.log((2.0 * np.sqrt(a3 * R) + 2.0 * a3 * t * t + a2) / np.sqrt(delta))


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

def brute_force_field(integrand: Callable[[float, float], float], y0_norm: float,
                      r_max: float, spec: QuadratureSpec | None = None,
                      breakpoints: Sequence[float] = ()) -> QuadResult:
    """Polar integral ``int_{|x| <= r_max} integrand(|x|, |x - y0|) dx``.

    The receiver sits at distance ``y0_norm`` from the origin; the angular
    integral runs over ``[0, pi]`` and is doubled (reflection symmetry).
    Nested adaptive quadrature, no closed forms involved.
    """
    spec = spec or DEFAULT_SPEC
    y0 = float(y0_norm)
    inner_spec = QuadratureSpec(spec.abs_tol * 1e-2, spec.rel_tol * 1e-2, spec.max_subdivisions)

    def ring(r):
        if r == 0.0:
            return 0.0

        def h(phi):
            dist = math.sqrt(max(r * r + y0 * y0 - 2.0 * r * y0 * math.cos(phi), 0.0))
            return integrand(r, dist)

        v, _, _, _ = _quad_piece(h, 0.0, math.pi, inner_spec)
        return 2.0 * r * v

    pts = list(breakpoints)
    if 0 < y0 < r_max:
        pts.append(y0)
    return integrate_finite(ring, 0.0, float(r_max), spec, pts)


# ---------------------------------------------------------------------------
# Fixed rules for vectorized evaluation
# ---------------------------------------------------------------------------

def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0):
    """Nodes and weights of the ``n``-point Gauss-Legendre rule on ``[a, b]``."""
    x, w = legendre.leggauss(n)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def composite_gauss(edges: Sequence[float], n: int = 16):
    """Gauss-Legendre rule with ``n`` nodes on every panel between ``edges``."""
    x, w = legendre.leggauss(n)
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = half * x + 0.5 * (hi + lo)
    weights = half * w
    return nodes.ravel(), weights.ravel()
