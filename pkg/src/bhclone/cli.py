"""Command-line front end: ``bhclone {fidelity,sweep,figure2,figure3,state,validate}``.

Exit codes: 0 ok, 1 validation failure, 2 usage or domain error,
3 numerical or truncation error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import analytic
from .bogoliubov import late_time_coeffs
from .cloning import simulate_marginals
from .errors import DomainError, NumericalError, ResourceError, TruncationError
from .fock import DEFAULT_NMAX_CEILING, choose_truncation
from .sweep import (
    CSV_COLUMNS,
    FIGURE2,
    FIGURE3,
    FIGURE_M,
    SweepConfig,
    evaluate_point,
    format_rows,
    run_sweep,
    write_output,
)
from .validation import all_passed, run_checks

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _int_list(text):
    """Parse ``3``, ``1,2,5`` or ``1-20``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if "-" in part[1:]:
            lo, hi = part.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        elif part:
            out.append(int(part))
    return out


def _float_list(text):
    return [float(p) for p in text.split(",") if p.strip()]


def _common(p, point=True):
    if point:
        p.add_argument("--gamma0", type=float, default=None, help="quantum absorption probability in [0, 1]")
        p.add_argument("--omega-over-t", type=float, default=None, help="mode frequency over Hawking temperature")
        p.add_argument("--n", type=int, default=1, help="number of input copies")
        p.add_argument("--m", type=int, default=1, help="number of quanta post-selected outside")
    p.add_argument("--method", choices=("analytic", "simulate", "both"), default=None)
    p.add_argument("--scenario", choices=("early", "late"), default=None)
    p.add_argument("--tol", type=float, default=None, help="truncation tolerance (default 1e-8)")
    p.add_argument("--nmax", type=int, default=None, help=f"occupation cutoff ceiling (max {DEFAULT_NMAX_CEILING})")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=None)
    p.add_argument("--no-timing", action="store_true", help="write wall_ms as 0 for byte-identical reruns")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bhclone", description="Black-hole cloning fidelities: closed forms and Fock-space simulation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fidelity", help="one (gamma0, omega/T, N, M) point")
    _common(p)

    p = sub.add_parser("sweep", help="grid sweep to CSV or JSON")
    _common(p, point=False)
    p.add_argument("--config", help="JSON object with SweepConfig fields")
    p.add_argument("--gamma0", type=_float_list, default=None, help="comma-separated values")
    p.add_argument("--omega-over-t", type=_float_list, default=None, help="comma-separated values")
    p.add_argument("--n", type=_int_list, default=None, help="e.g. 1 or 1,2 or 1-3")
    p.add_argument("--m", type=_int_list, default=None, help="e.g. 1-20")

    for name, preset in (("figure2", FIGURE2), ("figure3", FIGURE3)):
        p = sub.add_parser(name, help=f"preset grid {preset}")
        _common(p, point=False)

    p = sub.add_parser("state", help="p(m|1) and p(m|0): closed form next to simulation")
    p.add_argument("--gamma0", type=float, required=True)
    p.add_argument("--omega-over-t", type=float, required=True)
    p.add_argument("--mmax", type=int, default=10)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--nmax", type=int, default=DEFAULT_NMAX_CEILING)

    p = sub.add_parser("validate", help="run the self-check suite")
    p.add_argument("--quick", action="store_true", help="M <= 4 and cutoff <= 10")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--nmax", type=int, default=DEFAULT_NMAX_CEILING)
    return parser


def _config_from_args(args, base: dict) -> SweepConfig:
    data = dict(base)
    for flag, key in (("method", "method"), ("scenario", "scenario"), ("tol", "tol"), ("nmax", "nmax"),
                      ("threads", "threads"), ("out", "out"), ("format", "format")):
        value = getattr(args, flag, None)
        if value is not None:
            data[key] = value
    for flag, key in (("gamma0", "gamma0_values"), ("omega_over_t", "omega_over_t_values"),
                      ("n", "N_values"), ("m", "M_values")):
        value = getattr(args, flag, None)
        if value is not None:
            data[key] = value
    if args.no_timing:
        data["timing"] = False
    data.setdefault("M_values", list(FIGURE_M))
    if "gamma0_values" not in data and data.get("scenario") == "early":
        data["gamma0_values"] = [1.0]
    missing = [k for k in ("gamma0_values", "omega_over_t_values") if k not in data]
    if missing:
        raise DomainError(f"missing grid values: {', '.join(missing)}")
    return SweepConfig.from_dict(data).validate()


def _emit(text, out):
    if out:
        write_output(text, out)
    else:
        sys.stdout.write(text)


def cmd_fidelity(args) -> int:
    if args.omega_over_t is None:
        raise DomainError("--omega-over-t is required")
    scenario = args.scenario or "late"
    if scenario == "late" and args.gamma0 is None:
        raise DomainError("--gamma0 is required for the late scenario")
    method = args.method or "analytic"
    tol = 1e-8 if args.tol is None else args.tol
    nmax = DEFAULT_NMAX_CEILING if args.nmax is None else args.nmax
    cfg = SweepConfig([0.0 if args.gamma0 is None else args.gamma0], [args.omega_over_t], [args.n], [args.m],
                      scenario=scenario, method=method, tol=tol, nmax=nmax, format=args.format or "csv")
    cfg.validate()
    gamma0 = None if scenario == "early" else args.gamma0
    row = evaluate_point(gamma0, args.omega_over_t, args.n, args.m, scenario=scenario, method=method, tol=tol, nmax=nmax)
    if args.no_timing:
        row = type(row)(**{**row.__dict__, "wall_ms": 0.0})
    text = format_rows([row], cfg.format)
    diff = None
    if method == "both" and row.F_sim is not None and row.F_analytic is not None:
        diff = row.F_sim - row.F_analytic
    if diff is not None:
        if cfg.format == "csv":
            text += f"# F_sim - F_analytic = {diff:.3e}\n"
        else:
            record = json.loads(text)[0]
            record["difference"] = float(format(diff, ".9g"))
            text = json.dumps([record], indent=1) + "\n"
    _emit(text, args.out)
    return EXIT_OK


def cmd_sweep(args, base=None) -> int:
    base = dict(base or {})
    if getattr(args, "config", None):
        base.update(SweepConfig.from_json(args.config).__dict__)
        base = {k: v for k, v in base.items() if v is not None}
    cfg = _config_from_args(args, base)
    rows = run_sweep(cfg)
    _emit(format_rows(rows, cfg.format), cfg.out)
    return EXIT_OK


def cmd_state(args) -> int:
    if args.mmax < 0:
        raise DomainError(f"--mmax must be >= 0, got {args.mmax}")
    if not 1 <= args.nmax <= DEFAULT_NMAX_CEILING:
        raise DomainError(f"--nmax must lie in 1..{DEFAULT_NMAX_CEILING}, got {args.nmax}")
    if args.mmax > args.nmax:
        raise DomainError(f"--mmax {args.mmax} exceeds --nmax {args.nmax}")
    p = late_time_coeffs(args.gamma0, args.omega_over_t)
    an1 = analytic.late_time_particle_distribution(p, args.mmax)
    an0 = analytic.late_time_antiparticle_distribution(p, args.mmax)
    header = f"# gamma0={args.gamma0:.9g} omega_over_t={args.omega_over_t:.9g}"
    if p.gamma0 == 0.0:
        # a perfect reflector has no finite couplings, so there is nothing to simulate
        sim1 = sim0 = None
        header += " (perfect reflector: closed form only)"
    else:
        try:
            n_max = max(args.mmax, choose_truncation(p, 1, 1, args.tol, ceiling=args.nmax))
        except ResourceError:
            n_max = args.nmax
        sim1, sim0 = simulate_marginals(p, n_max)
        header += f" n_max={n_max} tail_mass={sim1.tail_mass:.3g}"
    lines = [header, "m,p_m_given_1,p_m_given_1_sim,p_m_given_0,p_m_given_0_sim"]
    worst = 0.0
    for m in range(args.mmax + 1):
        cells = [an1[m], None if sim1 is None else sim1[m], an0[m], None if sim0 is None else sim0[m]]
        lines.append(f"{m}," + ",".join("" if v is None else format(float(v), ".9g") for v in cells))
        if sim1 is not None:
            worst = max(worst, abs(an1[m] - sim1[m]), abs(an0[m] - sim0[m]))
    if sim1 is not None:
        lines.append(f"# max |analytic - simulated| = {worst:.3e}")
    sys.stdout.write("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_validate(args) -> int:
    results = run_checks(quick=args.quick, tol=args.tol, nmax=args.nmax)
    for r in results:
        print(r.line())
    if all_passed(results):
        print("all checks passed" if all(r.status == "PASS" for r in results) else "no failures (some tail-limited)")
        return EXIT_OK
    failed = [r.name for r in results if r.status == "FAIL"]
    print("FAILED: " + ", ".join(failed), file=sys.stderr)
    return EXIT_VALIDATION


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "fidelity":
            return cmd_fidelity(args)
        if args.command == "sweep":
            return cmd_sweep(args)
        if args.command == "figure2":
            return cmd_sweep(args, FIGURE2)
        if args.command == "figure3":
            return cmd_sweep(args, FIGURE3)
        if args.command == "state":
            return cmd_state(args)
        return cmd_validate(args)
    except _UsageError as exc:
        print(f"bhclone: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, OSError) as exc:
        print(f"bhclone: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (TruncationError, ResourceError, NumericalError) as exc:
        print(f"bhclone: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


__all__ = ["CSV_COLUMNS", "build_parser", "main"]
