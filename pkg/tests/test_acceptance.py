"""Acceptance criteria, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -s`` to see one PASS/FAIL line per
criterion. Expected values come from closed forms evaluated independently
(exact fractions or mpmath), never from the simulator itself.
"""

import csv
import io
import time
from fractions import Fraction

import mpmath
import numpy as np

from bhclone import analytic, cli
from bhclone.bogoliubov import couplings_from_params, early_time_coeffs, late_time_coeffs
from bhclone.cloning import UNIVERSALITY_INPUTS, simulate_clone_fidelity, simulate_marginals
from bhclone.fock import (
    EARLY_SECTOR_MODES,
    LATE_SECTOR_MODES,
    FockSpace,
    Propagator,
    build_early_hamiltonian,
    build_late_hamiltonian,
    charge_operator,
    choose_truncation,
    sector_vs_monolithic,
)
from bhclone.sweep import ResultRow, figure_shape_violations

GAMMA0_GRID = (0.1, 0.3, 0.5, 0.9, 0.95, 0.99, 1.0)
RATIO_GRID = (1.0, 2.0, 4.0, 10.0, 20.0)
ORACLE_GRID = [(g0, x) for g0 in (0.3, 0.95, 1.0) for x in (2.0, 4.0)]
TOL = 1e-8


def report(number, title, ok, detail):
    print(f"\n{'PASS' if ok else 'FAIL'} criterion {number}: {title} ({detail})")
    assert ok, detail


def mp_sum_fidelity(g0, x, M, dps=40):
    """Post-selection sum over p(M-j|1) p(j|0) in the (1 + m xi) form."""
    with mpmath.workdps(dps):
        g0, x = mpmath.mpf(g0), mpmath.mpf(x)
        a2, b2 = g0, g0 * mpmath.exp(-x)
        xi = (1 - g0 + b2) / (a2 * b2)
        q = b2 / (1 + b2)
        w = [q ** (M - j) * (1 + (M - j) * xi) * q**j for j in range(M + 1)]
        return float(sum(wj * (M - j) for j, wj in enumerate(w)) / (M * sum(w)))


def optimal(N, M):
    return (M * N + M + N) / (M * (N + 2))


def test_closed_form_consistency():
    start = time.perf_counter()
    reports = {(g0, x, M): analytic.late_time_fidelity_1M(late_time_coeffs(g0, x), M)
               for g0 in GAMMA0_GRID for x in RATIO_GRID for M in range(1, 101)}
    elapsed = time.perf_counter() - start
    internal = max(r.diagnostics["closed_form_gap"] for r in reports.values())
    oracle = max(abs(r.fidelity - mp_sum_fidelity(*key)) for key, r in reports.items())
    ok = internal <= 1e-12 and oracle <= 1e-12 and elapsed < 1.0
    report(1, "closed form equals post-selection sum", ok,
           f"log-space gap {internal:.2g}, mpmath gap {oracle:.2g}, {elapsed:.2f} s")


def test_optimality_identity():
    start = time.perf_counter()
    bad = []
    for M in range(1, 13):
        for N in range(1, M + 1):
            expected = Fraction(M * N + M + N, M * (N + 2))
            rep = analytic.early_time_clone_fidelity(N, M, exact=True)
            if rep.fidelity != expected or rep.anticlone_fidelity != Fraction(N + 1, N + 2):
                bad.append(("clone", N, M))
    for N in range(1, 9):
        for M in range(1, 13):
            if analytic.antiparticle_input_clone_fidelity(N, M, exact=True) != Fraction(N + 1, N + 2):
                bad.append(("antiparticle input", N, M))
    elapsed = time.perf_counter() - start
    report(2, "exact optimality identities", not bad and elapsed < 1.0, f"{len(bad)} mismatches, {elapsed:.2f} s")


def test_distribution_oracle():
    worst, slowest = 0.0, 0.0
    for g0, x in ORACLE_GRID:
        p = late_time_coeffs(g0, x)
        start = time.perf_counter()
        n_max = choose_truncation(p, 1, 1, TOL)
        sim1, sim0 = simulate_marginals(p, n_max)
        slowest = max(slowest, time.perf_counter() - start)
        q, b1 = p.q, 1.0 + p.beta2
        m = np.arange(n_max + 1)
        # p(m|1) = alpha2 q^m (1 + m xi) / (1+beta2)^2 written without xi; p(m|0) thermal
        exact1 = p.alpha2 * q**m / b1**2 + p.gamma2 * m * q ** np.maximum(m - 1, 0) / b1**3
        exact0 = q**m / b1
        tails = 1.0 - exact1.sum(), 1.0 - exact0.sum()
        tv1 = 0.5 * np.abs(sim1.probabilities - exact1).sum() + 0.5 * tails[0]
        tv0 = 0.5 * np.abs(sim0.probabilities - exact0).sum() + 0.5 * tails[1]
        worst = max(worst, tv1 - sim1.tail_mass, tv0 - sim0.tail_mass)
    report(3, "simulated marginals match closed forms", worst <= 1e-6 and slowest < 10.0,
           f"TV beyond tail {worst:.2g}, slowest point {slowest:.2f} s")


def test_fidelity_oracle():
    start = time.perf_counter()
    worst_late = worst_early = 0.0
    for g0, x in ORACLE_GRID:
        p = late_time_coeffs(g0, x)
        for M in range(1, 7):
            sim = simulate_clone_fidelity("late", p, N=1, M=M, tol=TOL).fidelity
            worst_late = max(worst_late, abs(sim - mp_sum_fidelity(g0, x, M)))
    e = early_time_coeffs(2.0)
    for N in range(1, 4):
        for M in range(N, 7):
            sim = simulate_clone_fidelity("early-particle", e, N=N, M=M, tol=TOL).fidelity
            worst_early = max(worst_early, abs(sim - optimal(N, M)))
    elapsed = time.perf_counter() - start
    ok = max(worst_late, worst_early) <= 1e-6 and elapsed < 120.0
    report(4, "simulated fidelities match closed forms", ok,
           f"late {worst_late:.2g}, early {worst_early:.2g}, {elapsed:.1f} s")


def test_limits():
    full = late_time_coeffs(1.0, 4.0)
    gap_a = max([abs(full.xi - 1.0)] + [abs(analytic.late_time_fidelity_1M(full, M).fidelity - 2 / 3)
                                          for M in range(1, 101)])
    reflector, hot = late_time_coeffs(1e-6, 4.0), late_time_coeffs(0.95, 10.0)
    gap_b = max(abs(analytic.late_time_fidelity_1M(reflector, M).fidelity - optimal(1, M)) for M in range(1, 11))
    gap_c = max(abs(analytic.late_time_fidelity_1M(hot, M).fidelity - optimal(1, M)) for M in range(1, 11))
    ok = gap_a <= 1e-12 and gap_b <= 1e-5 and gap_c <= 0.005
    report(5, "absorption and temperature limits", ok,
           f"(a) {gap_a:.2g}, (b) {gap_b:.2g}, (c) {gap_c:.2g}")


def test_universality():
    spreads = []
    fids = [simulate_clone_fidelity("early-particle", early_time_coeffs(2.0), q, N=1, M=2, tol=TOL).fidelity
            for q in UNIVERSALITY_INPUTS]
    spreads.append(max(fids) - min(fids))
    p = late_time_coeffs(0.95, 4.0)
    for M in range(1, 4):
        fids = [simulate_clone_fidelity("late", p, q, N=1, M=M, tol=TOL).fidelity for q in UNIVERSALITY_INPUTS]
        spreads.append(max(fids) - min(fids))
    report(6, "fidelity independent of the input state", max(spreads) <= 1e-6, f"worst spread {max(spreads):.2g}")


def test_full_absorption():
    worst = 0.0
    for x in (2.0, 4.0):
        p = late_time_coeffs(1.0, x)
        for N in (1, 2, 3):
            for M in range(1, 6):
                sim = simulate_clone_fidelity("late", p, N=N, M=M, tol=TOL).fidelity
                worst = max(worst, abs(sim - (N + 1) / (N + 2)))
    report(7, "full absorption gives (N+1)/(N+2) at any temperature", worst <= 1e-5, f"worst {worst:.2g}")


def _figure_rows(capsys, name):
    assert cli.main([name, "--no-timing", "--threads", "1"]) == 0
    text = "\n".join(line for line in capsys.readouterr().out.splitlines() if not line.startswith("#"))
    return [ResultRow(float(r["gamma0"]), float(r["omega_over_t"]), int(r["N"]), int(r["M"]), float(r["F_analytic"]),
                      None, None, None, None, None, r["method"], 0.0)
            for r in csv.DictReader(io.StringIO(text))]


def test_figure_reproduction(capsys):
    rows2 = _figure_rows(capsys, "figure2")
    rows3 = _figure_rows(capsys, "figure3")
    problems = figure_shape_violations(rows2, "gamma0", "low") + figure_shape_violations(rows3, "omega_over_t", "high")
    with capsys.disabled():
        report(8, "figure presets: monotone, ordered, bracketed", not problems and len(rows2) == len(rows3) == 100,
               f"{len(rows2)} + {len(rows3)} rows, {len(problems)} violations")


def _random_low_state(space, rng, max_total=3):
    low = np.nonzero(space.occupations.sum(axis=1) <= max_total)[0]
    psi = np.zeros(space.dim, dtype=complex)
    psi[low] = rng.normal(size=low.size) + 1j * rng.normal(size=low.size)
    return psi / np.linalg.norm(psi)


def test_structural_invariants():
    rng = np.random.default_rng(7)
    herm = norm = drift = 0.0
    for g0, x in ORACLE_GRID:
        c = couplings_from_params(late_time_coeffs(g0, x))
        for sector in ("k", "-k"):
            space = FockSpace(LATE_SECTOR_MODES[sector], 8)
            H = build_late_hamiltonian(sector, c, space)
            herm = max(herm, abs(H - H.getH()).max())
            psi = _random_low_state(space, rng)
            out = Propagator(H).apply(psi)
            Q = charge_operator(space, sector)
            norm = max(norm, abs(np.linalg.norm(out) - 1.0))
            drift = max(drift, abs(np.vdot(out, Q * out).real - np.vdot(psi, Q * psi).real))
    e = early_time_coeffs(2.0)
    for sector in ("k", "-k"):
        H = build_early_hamiltonian(sector, e.g_k, FockSpace(EARLY_SECTOR_MODES[sector], 8))
        herm = max(herm, abs(H - H.getH()).max())
    mono = max(sector_vs_monolithic(couplings_from_params(late_time_coeffs(g0, x)), n_max=2)
               for g0, x in ((0.3, 2.0), (0.95, 4.0)))
    ok = norm <= 1e-10 and drift <= 1e-10 and herm <= 1e-14 and mono <= 1e-10
    report(9, "unitarity, charge conservation, Hermiticity, sector factorization", ok,
           f"norm {norm:.2g}, charge {drift:.2g}, Hermiticity {herm:.2g}, monolithic {mono:.2g}")
