"""Grid evaluation behind the command line: configs, result rows, output files."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from itertools import groupby, product
from typing import Optional

from . import analytic
from .bogoliubov import early_time_coeffs, late_time_coeffs
from .cloning import simulate_clone_fidelity
from .errors import DomainError, EmptyPostselection
from .fock import DEFAULT_NMAX_CEILING

CSV_COLUMNS = (
    "gamma0",
    "omega_over_t",
    "N",
    "M",
    "F_analytic",
    "F_sim",
    "F_anticlone",
    "p_postselect",
    "n_max",
    "tail_mass",
    "method",
    "wall_ms",
)
METHODS = ("analytic", "simulate", "both")

# Figure presets. Legend values of the published figures are unreadable; the
# grids below keep only each caption's fixed parameter.
FIGURE2 = {"gamma0_values": [0.1, 0.5, 0.9, 0.99, 1.0], "omega_over_t_values": [4.0]}
FIGURE3 = {"gamma0_values": [0.95], "omega_over_t_values": [1.0, 2.0, 4.0, 10.0, 20.0]}
FIGURE_M = list(range(1, 21))


@dataclass
class SweepConfig:
    gamma0_values: list
    omega_over_t_values: list
    N_values: list = field(default_factory=lambda: [1])
    M_values: list = field(default_factory=lambda: list(FIGURE_M))
    scenario: str = "late"
    method: str = "analytic"
    tol: float = 1e-8
    nmax: int = DEFAULT_NMAX_CEILING
    threads: Optional[int] = None
    out: Optional[str] = None
    format: str = "csv"
    timing: bool = True

    @classmethod
    def from_dict(cls, data: dict) -> "SweepConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise DomainError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "SweepConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DomainError(f"{path}: not valid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise DomainError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def validate(self):
        for name in ("gamma0_values", "omega_over_t_values", "N_values", "M_values"):
            if not getattr(self, name):
                raise DomainError(f"{name} is empty")
        if self.scenario not in ("early", "late"):
            raise DomainError(f"scenario must be 'early' or 'late', got {self.scenario!r}")
        if self.method not in METHODS:
            raise DomainError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.format not in ("csv", "json"):
            raise DomainError(f"format must be csv or json, got {self.format!r}")
        if not self.tol > 0:
            raise DomainError(f"tol must be > 0, got {self.tol}")
        if not 1 <= self.nmax <= DEFAULT_NMAX_CEILING:
            raise DomainError(f"nmax must lie in 1..{DEFAULT_NMAX_CEILING}, got {self.nmax}")
        for g0 in self.gamma0_values:
            if not 0.0 <= g0 <= 1.0:
                raise DomainError(f"gamma0 must lie in [0, 1], got {g0}")
        for x in self.omega_over_t_values:
            if not x > 0:
                raise DomainError(f"omega/T must be > 0, got {x}")
        if min(self.N_values) < 1 or min(self.M_values) < 1:
            raise DomainError("N and M must be >= 1")
        if self.scenario == "early" and min(self.M_values) < max(self.N_values):
            raise DomainError("early-time cloning needs M >= N for every grid point")
        return self

    def grid(self) -> list:
        """Grid points in lexicographic order of (gamma0, omega/T, N, M)."""
        g0s = [None] if self.scenario == "early" else sorted(set(map(float, self.gamma0_values)))
        return list(
            product(
                g0s,
                sorted(set(map(float, self.omega_over_t_values))),
                sorted(set(map(int, self.N_values))),
                sorted(set(map(int, self.M_values))),
            )
        )


@dataclass(frozen=True)
class ResultRow:
    gamma0: Optional[float]
    omega_over_t: float
    N: int
    M: int
    F_analytic: Optional[float]
    F_sim: Optional[float]
    F_anticlone: Optional[float]
    p_postselect: Optional[float]
    n_max: Optional[int]
    tail_mass: Optional[float]
    method: str
    wall_ms: float


def _late_analytic(params, N, M):
    if N == 1:
        rep = analytic.late_time_fidelity_1M(params, M)
        return rep.fidelity, rep.postselect_probability
    # closed forms beyond N = 1 exist only at the two ends of the absorption range
    if params.gamma0 == 1.0:
        return analytic.classical_limit_fidelity(N), None
    if params.gamma0 == 0.0 and M >= N:
        return analytic.optimal_fidelity(N, M), None
    return None, None


def evaluate_point(gamma0, omega_over_t, N, M, scenario="late", method="analytic", tol=1e-8, nmax=DEFAULT_NMAX_CEILING):
    """Evaluate one grid point; returns a ``ResultRow``."""
    start = time.perf_counter()
    f_an = f_sim = anti = prob = n_max = tail = None
    if scenario == "late":
        params = late_time_coeffs(gamma0, omega_over_t)
        sim_scenario = "late"
    else:
        params = early_time_coeffs(omega_over_t)
        sim_scenario = "early-particle"

    if method in ("analytic", "both"):
        if scenario == "late":
            f_an, prob = _late_analytic(params, N, M)
            if f_an is None and method == "analytic":
                raise DomainError(f"no closed-form late-time fidelity for N={N} at gamma0={gamma0}; use --method simulate")
        else:
            rep = analytic.early_time_clone_fidelity(N, M, omega_over_t)
            f_an, anti, prob = rep.fidelity, rep.anticlone_fidelity, rep.postselect_probability

    # a perfect reflector has a closed form but no Hamiltonian to simulate
    skip_sim = scenario == "late" and params.gamma0 == 0.0
    if skip_sim and method == "simulate":
        raise DomainError("gamma0 = 0 has no finite couplings to simulate; use --method analytic or both")
    if method in ("simulate", "both") and not skip_sim:
        try:
            rep = simulate_clone_fidelity(sim_scenario, params, N=N, M=M, tol=tol, n_max_ceiling=nmax)
        except EmptyPostselection:
            prob = 0.0 if prob is None else prob
        else:
            f_sim = rep.fidelity
            anti = rep.anticlone_fidelity if rep.anticlone_fidelity is not None else anti
            prob = rep.postselect_probability if prob is None else prob
            n_max = rep.diagnostics["n_max"]
            tail = rep.diagnostics["tail_mass"]

    wall = 1000.0 * (time.perf_counter() - start)
    return ResultRow(gamma0, omega_over_t, N, M, f_an, f_sim, anti, prob, n_max, tail, method, wall)


def run_sweep(config: SweepConfig) -> list:
    """Evaluate the whole grid; rows come back in grid order whatever the thread count."""
    config.validate()
    points = config.grid()

    def work(point):
        return evaluate_point(*point, scenario=config.scenario, method=config.method, tol=config.tol, nmax=config.nmax)

    threads = config.threads or os.cpu_count() or 1
    if threads == 1:
        rows = [work(p) for p in points]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(work, points))
    if not config.timing:
        rows = [ResultRow(**{**asdict(r), "wall_ms": 0.0}) for r in rows]
    return rows


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    return format(float(value), ".9g")


def format_rows(rows, fmt="csv") -> str:
    """Render rows with fixed column order and 9 significant digits."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
        return buf.getvalue()
    if fmt == "json":
        records = []
        for r in rows:
            rec = {}
            for c in CSV_COLUMNS:
                v = getattr(r, c)
                rec[c] = v if v is None or isinstance(v, (str, int)) else float(_fmt(v))
            records.append(rec)
        return json.dumps(records, indent=1) + "\n"
    raise DomainError(f"unknown format {fmt!r}")


def write_output(text: str, path) -> None:
    """Write atomically: the target never holds partial output."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".bhclone-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def figure_shape_violations(rows, group_by: str, dominant: str) -> list:
    """Check a figure preset's curves: monotone in M, bracketed, and ordered.

    ``group_by`` is ``"gamma0"`` or ``"omega_over_t"``; ``dominant`` says which
    end of that parameter gives the larger fidelities (``"low"`` or ``"high"``).
    Returns human-readable violations (empty when the shape is right).
    """
    problems = []
    curves = {}
    for key, group in groupby(sorted(rows, key=lambda r: (getattr(r, group_by), r.M)), key=lambda r: getattr(r, group_by)):
        curves[key] = {r.M: r.F_analytic if r.F_analytic is not None else r.F_sim for r in group}
    for key, curve in curves.items():
        Ms = sorted(curve)
        for m1, m2 in zip(Ms, Ms[1:]):
            if curve[m2] > curve[m1] + 1e-12:
                problems.append(f"{group_by}={key}: F increases from M={m1} to M={m2}")
        for M in Ms:
            lo, hi = 2.0 / 3.0, 2.0 / 3.0 + 1.0 / (3.0 * M)
            if not lo - 1e-12 <= curve[M] <= hi + 1e-12:
                problems.append(f"{group_by}={key}, M={M}: F={curve[M]} outside [{lo}, {hi}]")
    keys = sorted(curves, reverse=(dominant == "high"))
    for upper, lower in zip(keys, keys[1:]):
        for M in curves[upper]:
            if M in curves[lower] and curves[upper][M] < curves[lower][M] - 1e-12:
                problems.append(f"M={M}: {group_by}={upper} below {group_by}={lower}")
    if any(math.isnan(v) for c in curves.values() for v in c.values()):
        problems.append("NaN fidelity")
    return problems
