"""From evolved Fock states to cloning verdicts.

Qubit conventions: ``|1>`` is a particle, ``|0>`` an antiparticle, and
density matrices are stored in the order ``(|0>, |1>)``. Outside the horizon
the particle mode is ``a_k`` and the antiparticle mode ``a_-k``. Behind the
horizon ``b_k`` plays ``|1>`` and ``-b_-k`` plays ``|0>``; that sign makes the
anticlone of ``sigma|1> + tau|0>`` come out as ``tau*|1> - sigma*|0>`` rather
than its Z-rotated copy.

N copies of a logical qubit are the symmetric N-quantum state
``(sigma x1^dag + tau x0^dag)^N / sqrt(N!) |vac>`` of the input mode pair,
which is ``(a_k, a_-k)`` for early particles, ``(c_k, c_-k)`` for late-time
signals and ``(b_-k, b_k)`` with conjugated amplitudes for early
antiparticles. The latter is the state whose stimulated partners outside the
horizon are clones of the logical qubit.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from math import comb

import numpy as np

from .bogoliubov import BlackHoleParams, EarlyTimeParams, couplings_from_params
from .errors import DomainError, EmptyPostselection, TruncationError
from .fock import (
    DEFAULT_NMAX_CEILING,
    EARLY_SECTOR_MODES,
    LATE_SECTOR_MODES,
    FockSpace,
    Propagator,
    ReducedState,
    build_early_hamiltonian,
    build_late_hamiltonian,
    choose_truncation,
    reduced_state,
    sector_product_state,
)
from .results import CloneReport, NumberDistribution

__all__ = [
    "SCENARIOS",
    "UNIVERSALITY_INPUTS",
    "LogicalQubit",
    "QubitDensityMatrix",
    "dicke_single_clone",
    "logical_input",
    "n_to_m_fidelity_curve",
    "postselect_M",
    "simulate_clone_fidelity",
    "simulate_marginals",
    "universality_check",
]

SCENARIOS = ("early-particle", "early-antiparticle", "late")

# below this post-selection probability the conditional state is undefined
EMPTY_PROBABILITY = 1e-300
# use graded evolution when the post-selected amplitudes are this far below the norm
GRADED_THRESHOLD = 1e-16


@dataclass(frozen=True)
class LogicalQubit:
    """``sigma |1> + tau |0>`` with ``|1>`` a particle and ``|0>`` an antiparticle."""

    sigma: complex = 1.0
    tau: complex = 0.0

    def __post_init__(self):
        nrm = abs(self.sigma) ** 2 + abs(self.tau) ** 2
        if abs(nrm - 1.0) > 1e-12:
            raise DomainError(f"|sigma|^2 + |tau|^2 = {nrm!r}, expected 1")

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.tau, self.sigma], dtype=complex)

    def flipped(self) -> "LogicalQubit":
        """Universal-NOT image ``tau* |1> - sigma* |0>``."""
        return LogicalQubit(np.conj(self.tau), -np.conj(self.sigma))


UNIVERSALITY_INPUTS = (
    LogicalQubit(1.0, 0.0),
    LogicalQubit(0.0, 1.0),
    LogicalQubit(1 / math.sqrt(2), 1 / math.sqrt(2)),
    LogicalQubit(1 / math.sqrt(2), 1j / math.sqrt(2)),
)


@dataclass(frozen=True)
class QubitDensityMatrix:
    """Single-clone state in the ``(|0>, |1>)`` basis."""

    matrix: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.matrix, dtype=complex)
        if rho.shape != (2, 2):
            raise DomainError(f"qubit state must be 2x2, got {rho.shape}")
        object.__setattr__(self, "matrix", rho)

    def fidelity(self, qubit: LogicalQubit) -> float:
        v = qubit.vector
        return float(np.vdot(v, self.matrix @ v).real)

    def is_physical(self, atol: float = 1e-10) -> bool:
        rho = self.matrix
        herm = np.max(np.abs(rho - rho.conj().T)) <= 1e-12
        return bool(herm and abs(np.trace(rho) - 1.0) <= atol and np.linalg.eigvalsh(rho).min() >= -atol)


def postselect_M(rho, M: int):
    """Project onto ``n_first + n_second = M`` and renormalize.

    ``rho`` is a ``ReducedState`` (or a square matrix over ``(n1, n2)``). The
    result is indexed by ``m = n1`` in ``0..M``; returns ``(rho_M, probability)``.
    """
    matrix = rho.matrix if isinstance(rho, ReducedState) else np.asarray(rho)
    if M < 0:
        raise DomainError(f"M must be >= 0, got {M}")
    d = int(round(math.sqrt(matrix.shape[0])))
    if M > d - 1:
        raise TruncationError(f"M={M} exceeds the per-mode cutoff {d - 1}")
    idx = np.array([m * d + (M - m) for m in range(M + 1)])
    block = matrix[np.ix_(idx, idx)]
    prob = float(np.trace(block).real)
    if not prob >= EMPTY_PROBABILITY:
        raise EmptyPostselection(M, prob)
    return block / prob, prob


def dicke_single_clone(rho_M, M: int) -> QubitDensityMatrix:
    """One-qubit marginal after mapping ``|m, M-m>`` onto the M-qubit Dicke state with m ones."""
    if M < 1:
        raise DomainError(f"M must be >= 1, got {M}")
    rho_M = np.asarray(rho_M)
    m = np.arange(M + 1)
    diag = np.real(np.diag(rho_M))
    r11 = float(m @ diag) / M
    r00 = float((M - m) @ diag) / M
    mm = np.arange(M)
    r10 = np.sum(np.sqrt((mm + 1) * (M - mm)) * rho_M[mm + 1, mm]) / M
    return QubitDensityMatrix(np.array([[r00, np.conj(r10)], [r10, r11]]))


def _input_layout(scenario):
    if scenario == "early-particle":
        return EARLY_SECTOR_MODES, ("a_k", "a_-k"), False
    if scenario == "early-antiparticle":
        return EARLY_SECTOR_MODES, ("b_-k", "b_k"), True
    if scenario == "late":
        return LATE_SECTOR_MODES, ("c_k", "c_-k"), False
    raise DomainError(f"unknown scenario {scenario!r}; choose from {SCENARIOS}")


def logical_input(scenario: str, qubit: LogicalQubit, N: int, n_max: int):
    """Branch decomposition of N copies of ``qubit`` in the scenario's input modes."""
    if N < 0:
        raise DomainError(f"N must be >= 0, got {N}")
    sector_modes, (one, zero), conjugate = _input_layout(scenario)
    sk = FockSpace(sector_modes["k"], n_max)
    smk = FockSpace(sector_modes["-k"], n_max)
    s, t = qubit.sigma, qubit.tau
    if conjugate:
        s, t = np.conj(s), np.conj(t)
    branches = []
    for n in range(N + 1):
        coef = math.sqrt(comb(N, n)) * s**n * t ** (N - n)
        if coef != 0:
            branches.append((coef, {one: n}, {zero: N - n}))
    return sector_product_state((sk, smk), branches)


def _grade(space):
    b = [m for m in space.modes if m.startswith("b")][0]
    return space.number(b)


def _propagator(scenario, params, space, evolution):
    if scenario == "late":
        H = build_late_hamiltonian("k", couplings_from_params(params), space)
    else:
        H = build_early_hamiltonian("k", params.g_k, space)
    if evolution == "graded":
        # one factor of sqrt(q) per created pair keeps rescaled amplitudes O(1)
        scale = min(max(math.sqrt(params.q), 1e-7), 1.0)
        return Propagator(H, method="graded", grade=_grade(space), scale=scale)
    return Propagator(H)


def _clone_qubit(rho_region, M):
    rho_M, prob = postselect_M(rho_region, M)
    return dicke_single_clone(rho_M, M), prob


def _z_frame(q: QubitDensityMatrix) -> QubitDensityMatrix:
    z = np.diag([-1.0, 1.0])
    return QubitDensityMatrix(z @ q.matrix @ z)


def _check_params(scenario, params):
    if scenario == "late":
        if not isinstance(params, BlackHoleParams):
            raise DomainError("late scenario needs BlackHoleParams")
    elif not isinstance(params, EarlyTimeParams):
        raise DomainError(f"{scenario} scenario needs EarlyTimeParams")


def _simulate_once(scenario, params, qubit, N, M, n_max, evolution, tail_tol):
    state = logical_input(scenario, qubit, N, n_max)
    sk = state.spaces[0]
    prop = _propagator(scenario, params, sk, evolution)
    # the two sectors carry identical matrices in their own mode order
    out = state.evolve(prop, prop)

    region1 = reduced_state(out, ("a_k", "a_-k"), tail_tol=tail_tol)
    clone, prob = _clone_qubit(region1, M)
    fidelity = clone.fidelity(qubit)

    region2 = reduced_state(out, ("b_k", "b_-k"))
    target = qubit.flipped()
    anti = None
    if scenario == "early-particle" and M > N:
        anti = _z_frame(_clone_qubit(region2, M - N)[0]).fidelity(target)
    elif scenario == "early-antiparticle":
        anti = _z_frame(_clone_qubit(region2, M + N)[0]).fidelity(target)
    elif scenario == "late":
        anti = _unconditional_anticlone(region2, n_max).fidelity(target)
    return fidelity, anti, prob, region1.tail_mass, sk.dim


def _unconditional_anticlone(region2, n_max):
    """Per-quantum average over every nonzero count behind the horizon."""
    acc = np.zeros((2, 2), dtype=complex)
    weight = 0.0
    for Mp in range(1, n_max + 1):
        try:
            q, prob = _clone_qubit(region2, Mp)
        except EmptyPostselection:
            continue
        acc += prob * q.matrix
        weight += prob
    if weight == 0.0:
        raise EmptyPostselection(0, 0.0)
    return _z_frame(QubitDensityMatrix(acc / weight))


def simulate_clone_fidelity(
    scenario: str,
    params,
    qubit: LogicalQubit | None = None,
    N: int = 1,
    M: int = 1,
    tol: float = 1e-8,
    n_max: int | None = None,
    n_max_ceiling: int = DEFAULT_NMAX_CEILING,
    check_convergence: bool = True,
    evolution: str = "auto",
) -> CloneReport:
    """Brute-force N -> M cloning fidelity for one logical input.

    Evolves N copies of ``qubit`` through the scenario's Hamiltonian,
    post-selects M quanta outside the horizon and compares one clone with the
    input. The anticlone fidelity is read off behind the horizon: on the
    ``M - N`` (early particles) or ``M + N`` (early antiparticles) quanta that
    charge conservation puts there, and for late-time signals averaged over
    every nonzero count without post-selection.

    With ``check_convergence`` the whole computation is repeated at
    ``n_max + 4``; any change above ``tol`` raises ``TruncationError``.
    """
    _check_params(scenario, params)
    if N < 1 or M < 1:
        raise DomainError(f"need N, M >= 1, got N={N}, M={M}")
    qubit = qubit or LogicalQubit()
    if n_max is None:
        n_max = choose_truncation(params, N, M, tol, ceiling=n_max_ceiling)
    if evolution == "auto":
        evolution = "graded" if params.q ** max(M - N, 0) < GRADED_THRESHOLD else "eigh"
    if evolution not in ("eigh", "graded"):
        raise DomainError(f"unknown evolution {evolution!r}")

    fid, anti, prob, tail, dim = _simulate_once(scenario, params, qubit, N, M, n_max, evolution, tol)
    diagnostics = {"n_max": n_max, "tail_mass": tail, "basis_size": dim, "evolution": evolution}
    if check_convergence:
        fid2, anti2, prob2, _, _ = _simulate_once(scenario, params, qubit, N, M, n_max + 4, evolution, None)
        deltas = [abs(fid2 - fid), abs(prob2 - prob)]
        if anti is not None:
            deltas.append(abs(anti2 - anti))
        delta = max(deltas)
        diagnostics["convergence_delta"] = delta
        if delta > tol:
            raise TruncationError(f"results moved by {delta:.3g} > tol={tol:g} between n_max={n_max} and {n_max + 4}")
    return CloneReport(
        N=N,
        M=M,
        fidelity=fid,
        anticlone_fidelity=anti,
        postselect_probability=prob,
        method="simulated",
        diagnostics=diagnostics,
    )


def simulate_marginals(params: BlackHoleParams, n_max: int, evolution: str = "eigh"):
    """Outside number distributions for the late-time input ``|1>_L``.

    Returns ``(particle, antiparticle)`` distributions of ``a_k`` and ``a_-k``,
    the simulated counterparts of p(m|1) and p(m|0).
    """
    _check_params("late", params)
    state = logical_input("late", LogicalQubit(), 1, n_max)
    sk = state.spaces[0]
    prop = _propagator("late", params, sk, evolution)
    rho = reduced_state(state.evolve(prop, prop), ("a_k", "a_-k"))
    return (
        NumberDistribution(np.clip(rho.marginal("a_k"), 0.0, None), tail_mass=rho.tail_mass),
        NumberDistribution(np.clip(rho.marginal("a_-k"), 0.0, None), tail_mass=rho.tail_mass),
    )


def universality_check(scenario: str, params, M: int, N: int = 1, **kwargs) -> float:
    """Largest fidelity difference between the inputs |1>, |0>, |+> and |+i>."""
    if M < 1:
        raise DomainError(f"M must be >= 1, got {M}")
    fids = [simulate_clone_fidelity(scenario, params, q, N=N, M=M, **kwargs).fidelity for q in UNIVERSALITY_INPUTS]
    return max(abs(x - y) for x, y in itertools.combinations(fids, 2))


def n_to_m_fidelity_curve(scenario: str, params, N: int, M_range, **kwargs) -> list:
    """Simulated reports for each M in ``M_range``."""
    M_values = list(M_range)
    if not M_values:
        raise DomainError("M_range is empty")
    if scenario == "early-particle" and min(M_values) < N:
        raise DomainError("early-particle cloning needs M >= N")
    return [simulate_clone_fidelity(scenario, params, N=N, M=M, **kwargs) for M in M_values]
