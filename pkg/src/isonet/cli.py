"""Command-line front end.

Every command reads a JSON scenario and writes a table (CSV with a ``#``
JSON metadata line, or JSON).  Exit codes: 0 success, 1 failed check,
2 bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Sequence

from scipy.stats import binomtest

from . import __version__
from .analytic import driving_function, gamma_ratio, laplace_interference, outage_probability
from .errors import DomainError, IsonetError, ScenarioError, TailConditionError
from .model import NetworkScenario, errors_only, load_scenario, parse_level, validate_scenario
from .quadrature import QuadratureSpec, brute_force_field
from .sim import (SimConfig, estimate_ast, estimate_laplace, estimate_mean_interference,
                  estimate_outage, simulate_link, truncation_radius, write_raw_samples)
from .tables import CurveTable, scenario_digest
from .throughput import optimize_beta, sum_rate_curve

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INPUT = 0, 1, 2
DEFAULT_SEED = 1


class InputError(Exception):
    """Bad command-line input; maps to exit code 2."""


def parse_grid(text: str) -> list[float]:
    """``START:STOP:STEP`` (stop inclusive), a comma list, or empty."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        try:
            start, stop, step = (float(p) for p in text.split(":"))
        except ValueError:
            raise InputError(f"grid {text!r}: expected START:STOP:STEP") from None
        if not step > 0:
            raise InputError(f"grid {text!r}: step must be positive")
        n = math.floor((stop - start) / step + 1e-9) + 1
        return [start + i * step for i in range(max(n, 0))]
    try:
        return [float(p) for p in text.split(",")]
    except ValueError:
        raise InputError(f"grid {text!r}: expected comma-separated numbers") from None


def _level(text: str) -> float:
    try:
        return parse_level(text)
    except (TypeError, ValueError):
        raise argparse.ArgumentTypeError(f"expected a number or a dB value, got {text!r}")


def _load(args) -> NetworkScenario:
    s = load_scenario(args.scenario)
    ch = {}
    if args.beta is not None:
        ch["beta"] = args.beta
    if args.eta is not None:
        ch["eta"] = args.eta
    if ch:
        try:
            s = s.replace(channel=s.channel.replace(**ch))
        except DomainError as exc:
            raise InputError(str(exc)) from None
    if args.lam is not None:
        s = s.replace(lam=args.lam)
    return s


def _require_valid(s: NetworkScenario) -> None:
    errs = errors_only(validate_scenario(s))
    if errs:
        raise InputError("scenario violates restrictions:\n" + "\n".join(f"  {v}" for v in errs))


def _provenance_argv(argv: Sequence[str]) -> list[str]:
    """Arguments minus the output destination, which does not affect results."""
    out, skip = [], False
    for a in argv:
        if skip:
            skip = False
        elif a == "--out":
            skip = True
        elif not a.startswith("--out="):
            out.append(a)
    return out


def _metadata(args, argv: Sequence[str], s: NetworkScenario, **extra) -> dict:
    meta = {
        "tool": "isonet",
        "version": __version__,
        "command": args.command,
        "argv": _provenance_argv(argv),
        "scenario": s.to_dict(),
        "scenario_sha256": scenario_digest(s.to_dict()),
        "seed": args.seed,
    }
    meta.update(extra)
    return meta


def _sim_config(args) -> SimConfig:
    return SimConfig(trials=args.trials, master_seed=args.seed, workers=args.workers)


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_op_curve(args, argv) -> CurveTable:
    s = _load(args)
    _require_valid(s)
    grid = parse_grid(args.grid)
    cols = ["y0", "q_analytic"]
    if args.simulate:
        cols += ["q_mc", "ci95_low", "ci95_high"]
    table = CurveTable(_metadata(args, argv, s, trials=args.simulate), cols)
    cfg = SimConfig(trials=args.simulate, master_seed=args.seed, workers=args.workers) \
        if args.simulate else None
    for y0 in grid:
        row = [y0, outage_probability(s, y0)]
        if cfg:
            est = estimate_outage(s, y0, cfg)
            row += [est.mean, est.ci95_low, est.ci95_high]
        table.append(row)
    return table


def cmd_gamma_curve(args, argv) -> CurveTable:
    s = _load(args)
    _require_valid(s)
    if s.channel.alpha != 4:
        raise InputError("gamma-curve needs alpha = 4: the homogeneous approximation is undefined for alpha = 2")
    table = CurveTable(_metadata(args, argv, s), ["y0", "gamma", "F"])
    for y0 in parse_grid(args.grid):
        table.append([y0, gamma_ratio(s, y0), float(s.shape(y0))])
    return table


def cmd_sum_rate(args, argv) -> CurveTable:
    s = _load(args)
    _require_valid(s)
    if args.lambda_r is None or not args.lambda_r > 0:
        raise InputError("sum-rate needs --lambda-r > 0")
    grid = parse_grid(args.grid)
    rates = sum_rate_curve(s, args.lambda_r, grid, args.workers)
    extra = {"lambda_r": args.lambda_r}
    if args.optimize:
        lo, hi = (min(grid), max(grid)) if grid else (-20.0, 20.0)
        opt = optimize_beta(s, args.lambda_r, (lo, hi))
        extra.update(beta_star_db=opt.beta_star_db, rate_star=opt.rate_star,
                     at_boundary=opt.at_boundary)
    return CurveTable(_metadata(args, argv, s, **extra), ["beta_db", "rate"],
                      [(b, r) for b, r in zip(grid, rates)])


def cmd_simulate(args, argv) -> CurveTable:
    s = _load(args)
    _require_valid(s)
    cfg = _sim_config(args)
    q = args.quantity
    if q == "mean-interference":
        est = estimate_mean_interference(s, args.y0, cfg)
    elif q == "outage":
        est = estimate_outage(s, args.y0, cfg)
    elif q == "laplace":
        if args.s is None:
            raise InputError("laplace needs --s")
        est = estimate_laplace(s, args.y0, args.s, cfg)
    else:
        est = estimate_ast(s, cfg, args.lambda_r)
    if args.raw:
        if q == "ast":
            raise InputError("--raw dumps link samples; it does not apply to ast")
        ch = s.channel
        s_arg = args.s if q == "laplace" else (ch.beta * ch.link_gain_inverse if q == "outage" else None)
        samples = simulate_link(s, args.y0, cfg, s_arg=s_arg)
        with open(args.raw, "w", newline="") as fh:
            write_raw_samples(samples, ch.beta, fh)
    meta = _metadata(args, argv, s, quantity=q, trials=args.trials)
    return CurveTable(meta, ["y0", "mean", "std_error", "ci95_low", "ci95_high", "trials"],
                      [(args.y0, est.mean, est.std_error, est.ci95_low, est.ci95_high, est.trials)])


def validation_report(s: NetworkScenario, full: bool = False, trials: int = 20000,
                      seed: int = DEFAULT_SEED) -> list[dict]:
    """Analytic vs brute-force checks, plus Monte Carlo ones when ``full``."""
    checks = []

    def record(name, ok, **numbers):
        checks.append({"check": name, "status": "PASS" if ok else "FAIL", **numbers})

    violations = validate_scenario(s)
    for v in violations:
        if v.severity == "warning":
            checks.append({"check": f"restriction {v.restriction}", "status": "WARN",
                           "detail": v.message})
    errs = errors_only(violations)
    for v in errs:
        record(f"restriction {v.restriction}", False, detail=v.message)
    if errs:
        return checks
    record("restrictions", True)

    ch = s.channel
    shape = s.shape
    positions = [0.0, shape.scale, 2.0 * shape.scale]
    unit = s.replace(lam=1.0)
    for y0 in positions:
        a = driving_function(shape, ch.alpha, y0, ch.c).value
        r_max = truncation_radius(unit, y0, 1e-7 * a)
        b = brute_force_field(lambda r, dist: float(shape(r)) / (ch.c + dist**ch.alpha), y0, r_max,
                              QuadratureSpec(1e-13, 1e-9), shape.breakpoints).value
        rel = abs(a - b) / a
        record(f"driving function vs brute force at y0={y0:g}", rel <= 1e-5,
               analytic=a, brute_force=b, rel_diff=rel)

    if full and s.lam > 0:
        # mean interference is heavy-tailed, so its Wald interval is not a
        # safe alarm; outage and Laplace values are bounded in [0, 1]
        cfg = SimConfig(trials=trials, master_seed=seed)
        for y0 in positions:
            q = outage_probability(s, y0)
            est = estimate_outage(s, y0, cfg)
            p = binomtest(round(est.mean * trials), trials, q).pvalue
            record(f"Monte Carlo outage at y0={y0:g}", p >= 1e-4, analytic=q, mc=est.mean,
                   p_value=p)
            s_arg = 1.0 / (s.lam * driving_function(shape, ch.alpha, y0, ch.c).value)
            ref = laplace_interference(s, y0, s_arg)
            est = estimate_laplace(s, y0, s_arg, cfg)
            # four standard errors, plus 3/n for events too rare to appear in the sample
            ok = abs(est.mean - ref) <= 4.0 * est.std_error + 3.0 / trials
            record(f"Monte Carlo Laplace at y0={y0:g}", ok, s=s_arg, analytic=ref, mc=est.mean,
                   std_error=est.std_error)
    return checks


def cmd_validate(args, argv) -> tuple[str, int]:
    s = _load(args)
    checks = validation_report(s, args.full, args.trials, args.seed)
    ok = all(c["status"] != "FAIL" for c in checks)
    if args.format == "json":
        text = json.dumps({"scenario_sha256": scenario_digest(s.to_dict()), "passed": ok,
                           "checks": checks}, indent=1, sort_keys=True) + "\n"
    else:
        lines = []
        for c in checks:
            nums = " ".join(f"{k}={v:.12g}" if isinstance(v, float) else f"{k}={v}"
                            for k, v in c.items() if k not in ("check", "status"))
            lines.append(f"{c['status']} {c['check']}" + (f": {nums}" if nums else ""))
        lines.append("all checks passed" if ok else "some checks FAILED")
        text = "\n".join(lines) + "\n"
    return text, EXIT_OK if ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, help="scenario JSON file")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="write here instead of standard output")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--trials", type=int, default=20000)
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--beta", type=_level, help="override beta (linear or e.g. 3dB)")
    common.add_argument("--eta", type=_level, help="override eta (linear or e.g. -8dB)")
    common.add_argument("--lambda", dest="lam", type=float, help="override the base intensity")

    p = argparse.ArgumentParser(prog="isonet", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"isonet {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    op = sub.add_parser("op-curve", parents=[common], help="outage probability vs receiver distance")
    op.add_argument("--grid", default="0:300:25", help="y0 grid START:STOP:STEP")
    op.add_argument("--simulate", type=int, default=0, metavar="TRIALS",
                    help="add Monte Carlo columns with this many trials")

    gm = sub.add_parser("gamma-curve", parents=[common],
                        help="log ratio of exact to approximate success probability")
    gm.add_argument("--grid", default="0:600:10")

    sr = sub.add_parser("sum-rate", parents=[common], help="sum rate vs SINR threshold in dB")
    sr.add_argument("--grid", default="-20:20:1", help="beta grid in dB")
    sr.add_argument("--lambda-r", type=float, required=True, help="receiver intensity")
    sr.add_argument("--optimize", action="store_true", help="add the optimal threshold to the metadata")

    va = sub.add_parser("validate", parents=[common], help="analytic vs brute force (vs Monte Carlo)")
    va.add_argument("--full", action="store_true", help="also run the Monte Carlo checks")

    sm = sub.add_parser("simulate", parents=[common], help="Monte Carlo estimate of one quantity")
    sm.add_argument("--quantity", required=True,
                    choices=("mean-interference", "outage", "laplace", "ast"))
    sm.add_argument("--y0", type=float, default=0.0)
    sm.add_argument("--s", type=float, help="Laplace argument")
    sm.add_argument("--lambda-r", type=float, help="receiver intensity (ast with nearest receivers)")
    sm.add_argument("--raw", help="also write per-trial samples to this CSV")
    return p


_COMMANDS = {"op-curve": cmd_op_curve, "gamma-curve": cmd_gamma_curve,
             "sum-rate": cmd_sum_rate, "simulate": cmd_simulate}


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            text, code = cmd_validate(args, argv)
        else:
            text, code = _COMMANDS[args.command](args, argv).render(args.format), EXIT_OK
    except (InputError, ScenarioError, TailConditionError, DomainError, OSError) as exc:
        print(f"isonet: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except IsonetError as exc:
        print(f"isonet: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
