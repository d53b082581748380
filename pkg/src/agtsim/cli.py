"""Command-line front end.

Five commands: `gap-scan` and `timing` sweep chain lengths and emit CSV,
`norm-check` tabulates the operator-norm bounds and the diagonal witness,
`scheme` runs one JSON-specified teleportation scheme and emits its report,
`evolve` propagates identity-gate chains with a seeded random input.

Exit codes: 0 success or accepted verdict, 1 scheme verdict "fail",
2 configuration or spec validation error, 3 solver failure (partial
output is still written).  Errors go to stderr as one JSON record per
line so callers can parse them.
"""

import argparse
import concurrent.futures
import json
import sys
import time

import numpy as np

from . import __version__
from .evolution import StepConvergenceError
from .gates import random_state
from .schemes import ACCEPTED_VERDICTS, SchemeSpec, ValidationError, run_scheme
from .spectral import (
    EigensolverError,
    default_s_grid,
    gap_profile,
    pagt_norm_diff,
    sufficient_time,
    witness_expectation,
)

EXIT_OK = 0
EXIT_SCHEME_FAIL = 1
EXIT_VALIDATION = 2
EXIT_SOLVER = 3

DEFAULT_L_CAP = 10


def _fmt(x) -> str:
    return "{:.12g}".format(float(x))


def _stderr_record(kind: str, message: str, **extra) -> None:
    record = {"error": kind, "message": message}
    record.update(extra)
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


def _parse_l_range(text: str, cap: int):
    try:
        if ".." in text:
            lo_text, hi_text = text.split("..", 1)
            lo, hi = int(lo_text), int(hi_text)
        else:
            lo = hi = int(text)
    except ValueError:
        raise ValidationError(f"/L: expected 'a..b' or 'a', got {text!r}")
    if lo < 1 or hi < lo:
        raise ValidationError(f"/L: need 1 <= a <= b, got {lo}..{hi}")
    if hi > cap:
        raise ValidationError(f"/L: {hi} exceeds the cap {cap} (raise with --L-cap)")
    return list(range(lo, hi + 1))


def _validate_common(args) -> None:
    if args.omega <= 0:
        raise ValidationError(f"/omega: must be positive, got {args.omega}")
    if not 0 < args.s_step <= 1:
        raise ValidationError(f"/s-step: must lie in (0, 1], got {args.s_step}")
    if args.threads < 1:
        raise ValidationError(f"/threads: must be >= 1, got {args.threads}")


def _meta_line(command: str, detail: str) -> str:
    stamp = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
    return f"# agtsim {__version__} {command} generated {stamp} {detail}"


def _write_text(path, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _map_over_l(fn, l_values, threads):
    """Evaluate fn(L) for each L, possibly in parallel, aggregated in L order."""
    if threads == 1 or len(l_values) == 1:
        return [fn(L) for L in l_values]
    with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
        futures = {L: pool.submit(fn, L) for L in l_values}
        return [futures[L].result() for L in l_values]


def _profiles_with_failures(l_values, omega, s_grid, threads):
    """Gap profiles per L; solver failures are collected, not raised."""
    profiles = _map_over_l(
        lambda L: gap_profile(L, omega, s_grid, on_failure="collect"),
        l_values,
        threads,
    )
    failures = [err for p in profiles for err in p.failures]
    return profiles, failures


def _report_solver_failures(failures) -> None:
    for err in failures:
        _stderr_record("solver", str(err), L=err.L, s=err.s)


def _cmd_gap_scan(args) -> int:
    l_values = _parse_l_range(args.L, args.L_cap)
    s_grid = default_s_grid(args.s_step)
    profiles, failures = _profiles_with_failures(l_values, args.omega, s_grid, args.threads)
    lines = []
    if not args.no_header_meta:
        lines.append(_meta_line("gap-scan", f"omega={_fmt(args.omega)} s_step={_fmt(args.s_step)}"))
    lines.append("L,omega,s,gap,ground_energy")
    for profile in profiles:
        for s, gap, ground in zip(profile.s_grid, profile.gaps, profile.ground_energies):
            if not np.isfinite(gap):
                continue
            lines.append(
                f"{profile.L},{_fmt(profile.omega)},{_fmt(s)},{_fmt(gap)},{_fmt(ground)}"
            )
    _write_text(args.out, "\n".join(lines) + "\n")
    if failures:
        _report_solver_failures(failures)
        return EXIT_SOLVER
    return EXIT_OK


def _cmd_timing(args) -> int:
    l_values = _parse_l_range(args.L, args.L_cap)
    s_grid = default_s_grid(args.s_step)
    profiles, failures = _profiles_with_failures(l_values, args.omega, s_grid, args.threads)
    lines = []
    if not args.no_header_meta:
        lines.append(
            _meta_line(
                "timing",
                f"omega={_fmt(args.omega)} s_step={_fmt(args.s_step)}"
                f" eps={_fmt(args.eps)} delta={_fmt(args.delta)} c={_fmt(args.c)}",
            )
        )
    lines.append("L,G_L,s_star,norm_diff,T_e,T_L,linear_bound_T")
    for profile in profiles:
        if profile.failures:
            continue
        report = sufficient_time(profile, eps=args.eps, delta=args.delta, c=args.c)
        lines.append(
            ",".join(
                (
                    str(report.L),
                    _fmt(report.min_gap),
                    _fmt(report.s_star),
                    _fmt(report.norm_diff),
                    _fmt(report.T_e),
                    _fmt(report.T_L),
                    _fmt(report.linear_bound),
                )
            )
        )
    _write_text(args.out, "\n".join(lines) + "\n")
    if failures:
        _report_solver_failures(failures)
        return EXIT_SOLVER
    return EXIT_OK


def _cmd_norm_check(args) -> int:
    l_values = _parse_l_range(args.L, args.L_cap)

    def row(L):
        return pagt_norm_diff(L, args.omega), witness_expectation(L, args.omega)

    results = _map_over_l(row, l_values, args.threads)
    lines = []
    if not args.no_header_meta:
        lines.append(_meta_line("norm-check", f"omega={_fmt(args.omega)}"))
    lines.append("L,norm,lower,upper,witness_value")
    for L, (norm, witness) in zip(l_values, results):
        lines.append(
            f"{L},{_fmt(norm)},{_fmt(args.omega * L)},{_fmt(6 * args.omega * L)},{_fmt(witness)}"
        )
    _write_text(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


def _report_json(payload: dict, command: str, args) -> str:
    if not args.no_header_meta:
        stamp = time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
        payload = {"meta": {"tool": f"agtsim {__version__}", "command": command, "generated": stamp}, **payload}
    return json.dumps(payload, indent=2) + "\n"


def _cmd_scheme(args) -> int:
    try:
        with open(args.spec, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"/spec: cannot read {args.spec}: {exc}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"/spec: not valid JSON: {exc}")
    spec = SchemeSpec.from_json(obj)
    report = run_scheme(spec)
    _write_text(args.out, _report_json(report.to_json_dict(), "scheme", args))
    return EXIT_OK if report.verdict in ACCEPTED_VERDICTS else EXIT_SCHEME_FAIL


def _cmd_evolve(args) -> int:
    l_values = _parse_l_range(args.L, min(args.L_cap, 9))
    if args.T != "auto":
        try:
            if float(args.T) < 0:
                raise ValueError
        except ValueError:
            raise ValidationError(f"/T: expected 'auto' or a non-negative number, got {args.T!r}")
    rng = np.random.default_rng(args.seed)
    reports = []
    worst = EXIT_OK
    for L in l_values:
        phi = random_state(rng)
        spec = SchemeSpec.from_json(
            {
                "scheme": "PAGT",
                "unitaries": ["I"] * L,
                "phi": [[amp.real, amp.imag] for amp in phi],
                "omega": args.omega,
                "schedule": args.schedule,
                "T": "auto" if args.T == "auto" else float(args.T),
            }
        )
        report = run_scheme(spec)
        reports.append({"L": L, **report.to_json_dict()})
        if report.verdict not in ACCEPTED_VERDICTS:
            worst = EXIT_SCHEME_FAIL
    _write_text(args.out, _report_json({"reports": reports}, "evolve", args))
    return worst


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agtsim",
        description="Adiabatic gate teleportation: gap scans, timing, and scheme runs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_grid=True):
        p.add_argument("--omega", type=float, default=0.5, help="coupling strength (default 0.5)")
        if with_grid:
            p.add_argument("--s-step", dest="s_step", type=float, default=0.01, help="grid spacing (default 0.01)")
        p.add_argument("--L", default="1..1", help="chain-length range 'a..b' or single 'a'")
        p.add_argument("--L-cap", dest="L_cap", type=int, default=DEFAULT_L_CAP, help=f"refuse L above this (default {DEFAULT_L_CAP})")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--threads", type=int, default=1, help="parallel workers over L (default 1)")
        p.add_argument("--seed", type=int, default=0, help="seed for random states (default 0)")
        p.add_argument("--no-header-meta", dest="no_header_meta", action="store_true", help="omit the timestamped metadata header")

    p = sub.add_parser("gap-scan", help="gap and ground energy over the schedule grid")
    common(p)
    p.set_defaults(fn=_cmd_gap_scan)

    p = sub.add_parser("timing", help="minimum gap, norms, and run-time estimates per L")
    common(p)
    p.add_argument("--eps", type=float, default=0.01, help="target error for the linear bound (default 0.01)")
    p.add_argument("--delta", type=float, default=1.0, help="exponent for the linear bound (default 1)")
    p.add_argument("--c", type=float, default=1.0, help="prefactor for the linear bound (default 1)")
    p.set_defaults(fn=_cmd_timing)

    p = sub.add_parser("norm-check", help="operator-norm bounds and the diagonal witness per L")
    common(p, with_grid=False)
    p.set_defaults(fn=_cmd_norm_check)

    p = sub.add_parser("scheme", help="run one scheme from a JSON spec")
    common(p, with_grid=False)
    p.add_argument("--spec", required=True, help="path to the SchemeSpec JSON")
    p.set_defaults(fn=_cmd_scheme)

    p = sub.add_parser("evolve", help="propagate identity-gate chains with a random input state")
    common(p, with_grid=False)
    p.add_argument("--T", default="auto", help="total time, or 'auto' (default)")
    p.add_argument("--schedule", default="gap-adapted", choices=("linear", "gap-adapted"), help="schedule family (default gap-adapted)")
    p.set_defaults(fn=_cmd_evolve)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if hasattr(args, "omega"):
            if not hasattr(args, "s_step"):
                args.s_step = 0.01
            _validate_common(args)
        return args.fn(args)
    except ValidationError as exc:
        _stderr_record("validation", str(exc))
        return EXIT_VALIDATION
    except (EigensolverError, StepConvergenceError) as exc:
        _stderr_record("solver", str(exc))
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
