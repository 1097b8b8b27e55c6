"""Spatial and channel model: shape functions, path loss, SINR, scenarios.

Transmitters form an isotropic Poisson point process with intensity
``lam * F(r)``, where ``F`` is a radial shape function normalized to a
maximum of one.  Path loss is ``1 / (c + dist**alpha)`` with ``alpha`` in
{2, 4}.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, ScenarioError

ALPHAS = (2, 4)
D_REF = 10.0  # reference distance for eta in random-distance scenarios


# ---------------------------------------------------------------------------
# Shape functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ShapeFunction:
    """Radial density profile ``F(r)`` with derivative, jump set and tail data.

    ``jumps`` lists ``(r_k, dF_k)`` pairs where ``F`` drops by ``dF_k > 0``
    at ``r_k > 0``; ``deriv`` is the derivative of the continuous part only.
    ``tail_nu`` is the exponent with ``F(r) * r**nu -> tail_limit``; zero
    means a non-vanishing tail, ``inf`` means super-polynomial decay.
    """

    eval: Callable[[np.ndarray], np.ndarray]
    deriv: Callable[[np.ndarray], np.ndarray]
    jumps: tuple = ()
    tail_nu: float = math.inf
    tail_limit: float = 0.0
    tail_onset: float = 1.0
    maximizer: float = 0.0
    scale: float = 1.0
    breakpoints: tuple = ()
    cutoff_fn: Callable[[float], float] | None = None
    kind: str = "custom"
    params: Mapping = field(default_factory=dict)

    def __call__(self, r):
        return self.eval(r)

    @property
    def F0(self) -> float:
        return float(self.eval(0.0))

    @property
    def F_inf(self) -> float:
        """Limit of ``F`` at infinity."""
        return self.tail_limit if self.tail_nu == 0 else 0.0

    def envelope(self, r):
        """Upper bound on ``F`` beyond ``tail_onset`` (stock tails are monotone)."""
        return self.eval(r)

    def cutoff(self, tol: float) -> float:
        """Radius beyond which ``F(r) < tol``; ``inf`` for non-vanishing tails."""
        if self.tail_nu == 0:
            return math.inf
        if self.cutoff_fn is not None:
            return float(self.cutoff_fn(tol))
        if math.isfinite(self.tail_nu):
            return max(self.tail_onset, 2.0 * (self.tail_limit / tol) ** (1.0 / self.tail_nu))
        raise DomainError("shape has no cutoff rule; supply cutoff_fn")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}

    def __repr__(self):
        return f"ShapeFunction(kind={self.kind!r}, params={dict(self.params)!r})"


def exp_power(scale: float, power: float) -> ShapeFunction:
    """``F(r) = exp(-(r/scale)**power)``, ``power >= 1``."""
    a, b = float(scale), float(power)
    if a <= 0 or b < 1:
        raise DomainError("exp_power needs scale > 0 and power >= 1")

    def F(r):
        return np.exp(-((np.asarray(r, dtype=float) / a) ** b))

    def f(r):
        x = np.asarray(r, dtype=float) / a
        return -(b / a) * x ** (b - 1.0) * np.exp(-(x**b))

    return ShapeFunction(
        eval=F, deriv=f, tail_nu=math.inf, tail_onset=a, maximizer=0.0, scale=a,
        breakpoints=(a, 2 * a, 4 * a),
        cutoff_fn=lambda tol: a * math.log(1.0 / min(tol, 0.5)) ** (1.0 / b),
        kind="exp_power", params={"scale": a, "power": b},
    )


def exponential(scale: float) -> ShapeFunction:
    s = exp_power(scale, 1.0)
    return ShapeFunction(**{**s.__dict__, "kind": "exponential", "params": {"scale": float(scale)}})


def disk(radius: float) -> ShapeFunction:
    """Indicator of the disk ``r <= radius``."""
    R = float(radius)
    if R <= 0:
        raise DomainError("disk radius must be positive")

    def F(r):
        return np.where(np.asarray(r, dtype=float) <= R, 1.0, 0.0)

    def f(r):
        return np.zeros_like(np.asarray(r, dtype=float))

    return ShapeFunction(
        eval=F, deriv=f, jumps=((R, 1.0),), tail_nu=math.inf, tail_onset=R,
        maximizer=0.0, scale=R, breakpoints=(R,), cutoff_fn=lambda tol: R,
        kind="disk", params={"radius": R},
    )


def homogeneous() -> ShapeFunction:
    """``F(r) = 1``: the stationary network."""

    def F(r):
        return np.ones_like(np.asarray(r, dtype=float))

    def f(r):
        return np.zeros_like(np.asarray(r, dtype=float))

    return ShapeFunction(
        eval=F, deriv=f, tail_nu=0.0, tail_limit=1.0, tail_onset=1.0,
        maximizer=0.0, scale=1.0, kind="homogeneous", params={},
    )


def power_law(nu: float, scale: float = 1.0) -> ShapeFunction:
    """``F(r) = (1 + r/scale)**(-nu)`` (Lomax complementary CDF)."""
    nu, a = float(nu), float(scale)
    if nu <= 0 or a <= 0:
        raise DomainError("power_law needs nu > 0 and scale > 0")

    def F(r):
        return (1.0 + np.asarray(r, dtype=float) / a) ** (-nu)

    def f(r):
        return -(nu / a) * (1.0 + np.asarray(r, dtype=float) / a) ** (-nu - 1.0)

    # F * r**nu is within 3% of a**nu beyond this radius
    onset = a / (0.97 ** (-1.0 / nu) - 1.0)
    return ShapeFunction(
        eval=F, deriv=f, tail_nu=nu, tail_limit=a**nu, tail_onset=onset,
        maximizer=0.0, scale=a, breakpoints=(a, 10 * a, 100 * a),
        cutoff_fn=lambda tol: a * (tol ** (-1.0 / nu) - 1.0),
        kind="power_law", params={"nu": nu, "scale": a},
    )


def hotspot(inner: float = 70.0, outer: float = 500.0) -> ShapeFunction:
    """Flat core up to ``inner``, raised-cosine decay to zero at ``outer``."""
    r0, r1 = float(inner), float(outer)
    if not 0 <= r0 < r1:
        raise DomainError("hotspot needs 0 <= inner < outer")
    width = r1 - r0

    def F(r):
        r = np.asarray(r, dtype=float)
        x = np.clip((r - r0) / width, 0.0, 1.0)
        return 0.5 * (1.0 + np.cos(np.pi * x))

    def f(r):
        r = np.asarray(r, dtype=float)
        x = (r - r0) / width
        inside = (x > 0) & (x < 1)
        return np.where(inside, -0.5 * np.pi / width * np.sin(np.pi * np.clip(x, 0, 1)), 0.0)

    return ShapeFunction(
        eval=F, deriv=f, tail_nu=math.inf, tail_onset=r1, maximizer=0.0,
        scale=0.5 * (r0 + r1), breakpoints=(r0, 0.5 * (r0 + r1), r1),
        cutoff_fn=lambda tol: r1, kind="hotspot", params={"inner": r0, "outer": r1},
    )


def tabulated(radii: Sequence[float], values: Sequence[float], tail_nu: float = math.inf) -> ShapeFunction:
    """Monotone-cubic interpolation of tabulated ``F`` values.

    The table must start at ``r = 0``.  Beyond the last node the shape
    continues as a power law with exponent ``tail_nu``, or drops to zero
    (recorded as a jump) when ``tail_nu`` is infinite.
    """
    r = np.asarray(radii, dtype=float)
    v = np.asarray(values, dtype=float)
    if r.ndim != 1 or r.shape != v.shape or r.size < 2:
        raise DomainError("radii and values must be 1-D arrays of equal length >= 2")
    if r[0] != 0.0 or np.any(np.diff(r) <= 0):
        raise DomainError("radii must start at 0 and increase strictly")
    interp = PchipInterpolator(r, v, extrapolate=False)
    dinterp = interp.derivative()
    r_last, v_last = float(r[-1]), float(v[-1])
    nu = float(tail_nu)

    def F(x):
        x = np.asarray(x, dtype=float)
        inside = np.clip(x, 0.0, r_last)
        out = interp(inside)
        if math.isfinite(nu):
            tail = v_last * (np.maximum(x, r_last) / r_last) ** (-nu)
        else:
            tail = np.zeros_like(x)
        return np.where(x <= r_last, out, tail)

    def f(x):
        x = np.asarray(x, dtype=float)
        inside = np.clip(x, 0.0, r_last)
        out = dinterp(inside)
        if math.isfinite(nu):
            tail = -nu * v_last / r_last * (np.maximum(x, r_last) / r_last) ** (-nu - 1.0)
        else:
            tail = np.zeros_like(x)
        return np.where(x <= r_last, out, tail)

    jumps = ((r_last, v_last),) if (not math.isfinite(nu) and v_last > 0) else ()
    if math.isfinite(nu):
        limit = v_last * r_last**nu if nu > 0 else v_last
    else:
        limit = 0.0
    return ShapeFunction(
        eval=F, deriv=f, jumps=jumps, tail_nu=nu, tail_limit=limit,
        tail_onset=r_last, maximizer=float(r[np.argmax(v)]), scale=r_last / 2,
        breakpoints=tuple(float(x) for x in r[1:]),
        cutoff_fn=(lambda tol: r_last) if not math.isfinite(nu) else None,
        kind="tabulated",
        params={"r": r.tolist(), "F": v.tolist(), "tail_nu": nu if math.isfinite(nu) else "inf"},
    )


SHAPE_KINDS = {
    "exp_power": lambda p: exp_power(p["scale"], p["power"]),
    "exponential": lambda p: exponential(p["scale"]),
    "disk": lambda p: disk(p["radius"]),
    "homogeneous": lambda p: homogeneous(),
    "constant": lambda p: homogeneous(),
    "power_law": lambda p: power_law(p["nu"], p.get("scale", 1.0)),
    "hotspot": lambda p: hotspot(p.get("inner", 70.0), p.get("outer", 500.0)),
    "tabulated": lambda p: tabulated(p["r"], p["F"], float(p.get("tail_nu", "inf"))),
}


def shape_from_dict(spec: Mapping) -> ShapeFunction:
    if not isinstance(spec, Mapping):
        raise ScenarioError("shape: expected an object with 'kind' and 'params'")
    kind = spec.get("kind")
    if kind not in SHAPE_KINDS:
        raise ScenarioError(f"shape.kind: unknown kind {kind!r}; choose from {sorted(SHAPE_KINDS)}")
    params = spec.get("params", {})
    if not isinstance(params, Mapping):
        raise ScenarioError("shape.params: expected an object")
    try:
        return SHAPE_KINDS[kind](params)
    except KeyError as exc:
        raise ScenarioError(f"shape.params.{exc.args[0]}: missing for kind {kind!r}") from None
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"shape.params: {exc}") from None


# ---------------------------------------------------------------------------
# Channel and scenario
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChannelParams:
    alpha: int
    c: float
    d: float
    eta: float
    beta: float

    def __post_init__(self):
        if self.alpha not in ALPHAS:
            raise DomainError(f"alpha must be 2 or 4, got {self.alpha!r}")
        object.__setattr__(self, "alpha", int(self.alpha))
        for name in ("c", "d", "eta", "beta"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.c > 0:
            raise DomainError("c must be positive")
        if not self.d > 0:
            raise DomainError("d must be positive")
        if not self.eta >= 0:
            raise DomainError("eta must be non-negative")
        if not self.beta > 0:
            raise DomainError("beta must be positive")

    @property
    def link_gain_inverse(self) -> float:
        """``1 / path_loss(d)``, i.e. ``c + d**alpha``."""
        return self.c + self.d**self.alpha

    def replace(self, **changes) -> "ChannelParams":
        return ChannelParams(**{**self.__dict__, **changes})


@dataclass(frozen=True, eq=False)
class NetworkScenario:
    shape: ShapeFunction
    lam: float
    channel: ChannelParams

    def __post_init__(self):
        object.__setattr__(self, "lam", float(self.lam))
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise DomainError("lambda must be finite and non-negative")

    def intensity(self, r):
        """Transmitter intensity ``lam * F(r)``."""
        return self.lam * self.shape(r)

    def replace(self, **changes) -> "NetworkScenario":
        fields = {"shape": self.shape, "lam": self.lam, "channel": self.channel}
        fields.update(changes)
        return NetworkScenario(**fields)

    def to_dict(self) -> dict:
        ch = self.channel
        return {
            "shape": self.shape.to_dict(),
            "lambda": self.lam,
            "channel": {"alpha": ch.alpha, "c": ch.c, "d": ch.d, "eta": ch.eta, "beta": ch.beta},
        }


def path_loss(dist, ch: ChannelParams):
    """``1 / (c + dist**alpha)``."""
    dist = np.asarray(dist, dtype=float)
    if np.any(dist < 0):
        raise DomainError("distance must be non-negative")
    out = 1.0 / (ch.c + dist**ch.alpha)
    return out if out.ndim else float(out)


def sinr(fading_gain, interference, ch: ChannelParams):
    """Reference-link SINR ``g / (eta + (c + d**alpha) * I)``.

    A noiseless, interference-free link returns ``inf`` (or 0 when ``g`` is 0).
    """
    g = np.asarray(fading_gain, dtype=float)
    den = ch.eta + ch.link_gain_inverse * np.asarray(interference, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(den > 0, g / np.where(den > 0, den, 1.0), np.where(g > 0, np.inf, 0.0))
    return out if out.ndim else float(out)


def eta_at_distance(eta_ref: float, d, ch: ChannelParams, d_ref: float = D_REF):
    """Noise-to-signal ratio at link distance ``d`` given its value at ``d_ref``."""
    d = np.asarray(d, dtype=float)
    return eta_ref * (ch.c + d**ch.alpha) / (ch.c + d_ref**ch.alpha)


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


_DB_RE = re.compile(r"^\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*dB\s*$", re.IGNORECASE)


def parse_level(value) -> float:
    """Accept a linear number or a string with a ``dB`` suffix such as ``"-8dB"``."""
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, str):
        m = _DB_RE.match(value)
        if m:
            return float(db_to_linear(float(m.group(1))))
        return float(value)
    raise TypeError(f"expected a number or a dB string, got {value!r}")


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    severity: str  # "error" or "warning"
    restriction: str
    message: str

    def __str__(self):
        return f"[{self.severity}] {self.restriction}: {self.message}"


def _sample_radii(shape: ShapeFunction, n: int = 1000) -> np.ndarray:
    rng = np.random.default_rng(0)
    hi = 3.0 * max(shape.tail_onset, shape.scale, 1.0)
    return np.sort(rng.uniform(0.0, hi, n))


def check_shape(shape: ShapeFunction) -> list[Violation]:
    """Numerical spot checks of positivity, normalization, derivative and tail."""
    out = []
    r = _sample_radii(shape)
    F = np.asarray(shape(r), dtype=float)
    if np.any(F < 0) or shape.F0 < 0:
        out.append(Violation("error", "positiveness", "F(r) < 0 at sampled radii"))
    top = float(shape(shape.maximizer))
    if abs(top - 1.0) > 1e-9 or np.any(F > 1.0 + 1e-9):
        out.append(Violation("error", "normalization", f"max F = {max(top, F.max()):.12g}, expected 1"))
    for rk, dk in shape.jumps:
        if not (rk > 0 and dk > 0):
            out.append(Violation("error", "jumps", f"jump ({rk}, {dk}) must have r_k > 0 and dF_k > 0"))

    # derivative against central differences away from jumps and r = 0
    h = 1e-5 * max(shape.scale, 1.0)
    keep = r > 10 * h
    for rk, _ in shape.jumps:
        keep &= np.abs(r - rk) > 10 * h
    for bp in shape.breakpoints:
        keep &= np.abs(r - bp) > 10 * h
    rr = r[keep]
    fd = (np.asarray(shape(rr + h)) - np.asarray(shape(rr - h))) / (2 * h)
    fa = np.asarray(shape.deriv(rr))
    tol = 1e-6 * np.abs(fa) + 1e-9 / max(shape.scale, 1.0)
    bad = np.abs(fd - fa) > tol
    if np.any(bad):
        i = int(np.argmax(bad))
        out.append(Violation("error", "derivative",
                             f"deriv disagrees with finite difference at r={rr[i]:.6g}"))

    nu = shape.tail_nu
    if math.isfinite(nu):
        L = shape.tail_limit
        if not L > 0:
            out.append(Violation("error", "tail", "tail_limit must be positive for finite nu"))
        else:
            rt = shape.tail_onset * np.array([1.0, 2.0, 5.0, 10.0, 100.0])
            dev = np.abs(np.asarray(shape(rt)) * rt**nu - L) / L
            if np.any(dev > 0.05):
                out.append(Violation("error", "tail",
                                     f"F(r) r^{nu:g} deviates from {L:.6g} by {dev.max():.3g}"))
    return out


def validate_scenario(s: NetworkScenario) -> list[Violation]:
    """All violated restrictions; warnings do not make a scenario unusable."""
    out = check_shape(s.shape)
    if s.lam == 0:
        out.append(Violation("warning", "lambda", "lambda = 0: empty transmitter process"))
    nu = s.shape.tail_nu
    if s.channel.alpha == 2 and not nu > 0:
        out.append(Violation("error", "tail condition",
                             "tail condition nu>0 fails: mean interference is infinite for alpha=2"))
    if not nu > 2:
        out.append(Violation("warning", "AST tail condition",
                             f"AST requires nu>2 (got nu={nu:g})"))
    return out


def errors_only(violations: Sequence[Violation]) -> list[Violation]:
    return [v for v in violations if v.severity == "error"]


# ---------------------------------------------------------------------------
# Scenario files
# ---------------------------------------------------------------------------

def scenario_from_dict(data: Mapping) -> NetworkScenario:
    if not isinstance(data, Mapping):
        raise ScenarioError("scenario: expected a JSON object")
    for key in ("shape", "lambda", "channel"):
        if key not in data:
            raise ScenarioError(f"{key}: missing required key")
    shape = shape_from_dict(data["shape"])
    try:
        lam = float(data["lambda"])
    except (TypeError, ValueError):
        raise ScenarioError("lambda: expected a number") from None
    ch = data["channel"]
    if not isinstance(ch, Mapping):
        raise ScenarioError("channel: expected an object")
    values = {}
    for key in ("alpha", "c", "d", "eta", "beta"):
        if key not in ch:
            raise ScenarioError(f"channel.{key}: missing required key")
        try:
            values[key] = parse_level(ch[key]) if key in ("eta", "beta") else float(ch[key])
        except (TypeError, ValueError):
            raise ScenarioError(f"channel.{key}: expected a number, got {ch[key]!r}") from None
    alpha = values["alpha"]
    if alpha != int(alpha):
        raise ScenarioError(f"channel.alpha: must be 2 or 4, got {alpha!r}")
    values["alpha"] = int(alpha)
    try:
        channel = ChannelParams(**values)
    except DomainError as exc:
        raise ScenarioError(f"channel: {exc}") from None
    try:
        return NetworkScenario(shape=shape, lam=lam, channel=channel)
    except DomainError as exc:
        raise ScenarioError(f"lambda: {exc}") from None


def load_scenario(path) -> NetworkScenario:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
    return scenario_from_dict(data)


def dump_scenario(s: NetworkScenario, path) -> None:
    Path(path).write_text(json.dumps(s.to_dict(), indent=2, sort_keys=True) + "\n")
