"""Brute-force evolution on truncated bosonic Fock spaces.

The six modes ``a_{+-k}``, ``b_{+-k}``, ``c_{+-k}`` split into two sectors that
never interact:

    sector "k":  (a_k,  b_-k, c_k)
    sector "-k": (a_-k, b_k,  c_-k)

Every state is kept as a sum of products of sector vectors (``BranchState``),
so a sector space of ``(n_max+1)**3`` states is the largest object ever
diagonalized. Inside a sector the Hamiltonians conserve
``N_a + N_c - N_b``; ``Propagator`` exploits this by exponentiating each
connected block of the Hamiltonian separately.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.stats import nbinom

from .bogoliubov import BlackHoleParams, CouplingConstants, EarlyTimeParams
from .errors import DomainError, NumericalError, ResourceError, TruncationError

__all__ = [
    "EARLY_SECTOR_MODES",
    "LATE_SECTOR_MODES",
    "BranchState",
    "FockSpace",
    "FockVector",
    "Propagator",
    "ReducedState",
    "build_early_hamiltonian",
    "build_late_hamiltonian",
    "charge_operator",
    "choose_truncation",
    "edge_mass",
    "evolve",
    "heisenberg_residual",
    "ladder",
    "reduced_state",
    "region1_reduced_state",
    "region2_reduced_state",
    "sector_product_state",
    "sector_vs_monolithic",
]

LATE_SECTOR_MODES = {"k": ("a_k", "b_-k", "c_k"), "-k": ("a_-k", "b_k", "c_-k")}
EARLY_SECTOR_MODES = {"k": ("a_k", "b_-k"), "-k": ("a_-k", "b_k")}
ALL_MODES = ("a_k", "a_-k", "b_k", "b_-k", "c_k", "c_-k")

DEFAULT_NMAX_CEILING = 40


@dataclass(frozen=True)
class FockSpace:
    """Box-truncated occupation basis: each mode holds 0..n_max quanta.

    Basis index and occupation tuple are related by C-order raveling, so the
    last mode varies fastest.
    """

    modes: tuple
    n_max: int

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if len(set(self.modes)) != len(self.modes):
            raise DomainError(f"duplicate mode labels in {self.modes}")
        unknown = set(self.modes) - set(ALL_MODES)
        if unknown:
            raise DomainError(f"unknown mode labels {sorted(unknown)}")
        if self.n_max < 0:
            raise DomainError(f"n_max must be >= 0, got {self.n_max}")

    @property
    def shape(self) -> tuple:
        return (self.n_max + 1,) * len(self.modes)

    @property
    def dim(self) -> int:
        return (self.n_max + 1) ** len(self.modes)

    def axis(self, mode: str) -> int:
        try:
            return self.modes.index(mode)
        except ValueError:
            raise DomainError(f"mode {mode!r} not in space {self.modes}") from None

    def index(self, occupation: Sequence[int]) -> int:
        return int(np.ravel_multi_index(tuple(occupation), self.shape))

    def occupation(self, index: int) -> tuple:
        return tuple(int(n) for n in np.unravel_index(index, self.shape))

    @cached_property
    def occupations(self) -> np.ndarray:
        """``(dim, n_modes)`` array of occupation numbers, row i for basis state i."""
        grids = np.indices(self.shape).reshape(len(self.modes), -1)
        return grids.T.copy()

    def number(self, mode: str) -> np.ndarray:
        """Diagonal of the number operator of ``mode``."""
        return self.occupations[:, self.axis(mode)].astype(float)

    def basis_vector(self, occupation) -> np.ndarray:
        """Unit vector for a dict ``{mode: n}`` or a full occupation tuple."""
        if isinstance(occupation, dict):
            occ = [0] * len(self.modes)
            for mode, n in occupation.items():
                occ[self.axis(mode)] = n
            occupation = occ
        if any(n > self.n_max or n < 0 for n in occupation):
            raise DomainError(f"occupation {tuple(occupation)} outside the box n_max={self.n_max}")
        v = np.zeros(self.dim, dtype=complex)
        v[self.index(occupation)] = 1.0
        return v


@dataclass(frozen=True)
class FockVector:
    """Complex amplitudes over a ``FockSpace`` basis."""

    space: FockSpace
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.space.dim,):
            raise DomainError(f"expected {self.space.dim} amplitudes, got shape {amps.shape}")
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.space.shape)


def ladder(space: FockSpace, mode: str, dagger: bool = False) -> sp.csr_matrix:
    """Annihilation (or creation) operator of ``mode`` restricted to the box."""
    ax = space.axis(mode)
    occ = space.occupations
    n = occ[:, ax]
    stride = int(np.prod(space.shape[ax + 1:], dtype=int))
    src = np.nonzero(n > 0)[0]
    # a|n> = sqrt(n)|n-1>
    a = sp.csr_matrix((np.sqrt(n[src].astype(float)), (src - stride, src)), shape=(space.dim, space.dim))
    return a.T.tocsr() if dagger else a


def _raise_pair(space, m1, m2):
    """Matrix of a_{m1}^dagger a_{m2}^dagger in the box (transitions leaving it are dropped)."""
    return (ladder(space, m1, dagger=True) @ ladder(space, m2, dagger=True)).tocsr()


def _hop(space, m1, m2):
    """Matrix of a_{m1}^dagger a_{m2}."""
    return (ladder(space, m1, dagger=True) @ ladder(space, m2)).tocsr()


def build_early_hamiltonian(sector: str, g: float, space: FockSpace) -> sp.csr_matrix:
    """``i g (a^dagger b^dagger - a b)`` for the sector's (a, b) pair.

    The matrix is ``i`` times a real antisymmetric matrix, hence exactly
    Hermitian.
    """
    if sector not in EARLY_SECTOR_MODES:
        raise DomainError(f"sector must be 'k' or '-k', got {sector!r}")
    a, b = EARLY_SECTOR_MODES[sector]
    if a not in space.modes or b not in space.modes:
        raise DomainError(f"space {space.modes} lacks sector {sector} modes ({a}, {b})")
    if g < 0:
        raise DomainError(f"g must be >= 0, got {g}")
    P = _raise_pair(space, a, b)
    return (1j * g * (P - P.T)).tocsr()


def build_late_hamiltonian(sector: str, couplings: CouplingConstants, space: FockSpace) -> sp.csr_matrix:
    """``i g (a^dag b^dag - a b) + i g' (a^dag c - a c^dag)`` for one sector."""
    if sector not in LATE_SECTOR_MODES:
        raise DomainError(f"sector must be 'k' or '-k', got {sector!r}")
    a, b, c = LATE_SECTOR_MODES[sector]
    missing = [m for m in (a, b, c) if m not in space.modes]
    if missing:
        raise DomainError(f"space {space.modes} lacks sector {sector} modes {missing}")
    P = _raise_pair(space, a, b)
    Q = _hop(space, a, c)
    return (1j * couplings.g * (P - P.T) + 1j * couplings.g_prime * (Q - Q.T)).tocsr()


def charge_operator(space: FockSpace, sector: str) -> np.ndarray:
    """Diagonal of ``N_a + N_c - N_b``, conserved by the late-time Hamiltonian."""
    a, b, c = LATE_SECTOR_MODES[sector]
    return space.number(a) + space.number(c) - space.number(b)


def _real_gauge(block: np.ndarray, atol: float):
    """Phases ``phi`` with ``diag(e^{-i phi}) H diag(e^{i phi})`` real, or None.

    Exists whenever every cycle of the coupling graph carries zero net phase,
    which holds for the squeezer/beamsplitter Hamiltonians here.
    """
    n = block.shape[0]
    phi = np.full(n, np.nan)
    adj = [np.nonzero(block[i])[0] for i in range(n)]
    for root in range(n):
        if not np.isnan(phi[root]):
            continue
        phi[root] = 0.0
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if np.isnan(phi[y]):
                    # choose phi[y] so that the (x, y) entry becomes real positive
                    phi[y] = phi[x] - np.angle(block[x, y])
                    queue.append(y)
    d = np.exp(1j * phi)
    real = (d.conj()[:, None] * block * d[None, :])
    if np.max(np.abs(real.imag), initial=0.0) > atol:
        return None
    return d, real.real


class Propagator:
    """Applies ``exp(-i H)`` block by block.

    ``method="eigh"`` uses the spectral decomposition of each Hermitian block,
    switched to a real symmetric problem when a diagonal phase gauge makes the
    block real. ``method="graded"`` is for states whose interesting amplitudes
    are far below machine epsilon relative to the norm: amplitudes are rescaled
    by ``scale**grade`` (``grade`` counts created pairs) before a Pade
    exponential, so that small amplitudes are obtained to relative rather than
    absolute precision.
    """

    def __init__(self, H, method: str = "eigh", grade=None, scale: float | None = None):
        if method not in ("eigh", "graded"):
            raise DomainError(f"unknown evolution method {method!r}")
        if method == "graded" and (grade is None or scale is None):
            raise DomainError("graded evolution needs grade and scale")
        self.H = sp.csr_matrix(H)
        self.method = method
        self.grade = None if grade is None else np.asarray(grade, dtype=float)
        self.scale = scale
        pattern = (abs(self.H) > 0).astype(np.int8)
        self.n_blocks, self.labels = connected_components(pattern, directed=False)
        order = np.argsort(self.labels, kind="stable")
        bounds = np.searchsorted(self.labels[order], np.arange(self.n_blocks + 1))
        self._members = [order[bounds[i]:bounds[i + 1]] for i in range(self.n_blocks)]
        self._cache = {}

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    def block_unitary(self, label: int):
        if label not in self._cache:
            idx = self._members[label]
            block = self.H[idx][:, idx].toarray()
            if self.method == "eigh":
                U = self._spectral(block)
            else:
                U = self._graded(block, self.grade[idx])
            self._cache[label] = (idx, U)
        return self._cache[label]

    @staticmethod
    def _spectral(block):
        scale = max(np.max(np.abs(block), initial=0.0), 1.0)
        try:
            gauge = _real_gauge(block, 1e-14 * scale)
            if gauge is not None:
                d, real = gauge
                w, V = np.linalg.eigh(real)
                U = (V * np.exp(-1j * w)) @ V.T
                return d[:, None] * U * d.conj()[None, :]
            w, V = np.linalg.eigh(block)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"eigendecomposition failed: {exc}") from exc
        return (V * np.exp(-1j * w)) @ V.conj().T

    def _graded(self, block, grade):
        log_s = math.log(self.scale)
        diff = grade[:, None] - grade[None, :]
        # A = D^-1 (-iH) D with D = diag(scale**grade)
        A = -1j * block * np.exp(-diff * log_s)
        E = scipy.linalg.expm(A)
        if not np.all(np.isfinite(E)):
            raise NumericalError("graded matrix exponential overflowed")
        return E * np.exp(diff * log_s)

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        psi = np.asarray(amplitudes, dtype=complex)
        out = np.zeros_like(psi)
        touched = np.unique(self.labels[np.nonzero(psi)[0]])
        for label in touched:
            idx, U = self.block_unitary(label)
            out[idx] = U @ psi[idx]
        return out


def evolve(H, psi_in: FockVector, method: str = "eigh", grade=None, scale=None) -> FockVector:
    """``|psi_out> = exp(-iH) |psi_in>`` on the space of ``psi_in``."""
    if H.shape != (psi_in.space.dim, psi_in.space.dim):
        raise DomainError(f"operator of shape {H.shape} does not act on dim {psi_in.space.dim}")
    prop = Propagator(H, method=method, grade=grade, scale=scale)
    return FockVector(psi_in.space, prop.apply(psi_in.amplitudes))


def edge_mass(space: FockSpace, amplitudes: np.ndarray) -> float:
    """Probability on basis states where some mode sits at the cutoff."""
    at_edge = np.any(space.occupations == space.n_max, axis=1)
    return float(np.sum(np.abs(amplitudes[at_edge]) ** 2))


@dataclass
class BranchState:
    """``sum_i c_i |u_i>_k |v_i>_-k`` over the two sector spaces."""

    spaces: tuple
    branches: list = field(default_factory=list)

    def norm(self) -> float:
        gram_k = np.array([[np.vdot(u2, u1) for (_, u1, _) in self.branches] for (_, u2, _) in self.branches])
        gram_mk = np.array([[np.vdot(v2, v1) for (_, _, v1) in self.branches] for (_, _, v2) in self.branches])
        c = np.array([b[0] for b in self.branches])
        val = np.vdot(c, (gram_k * gram_mk) @ c)
        return math.sqrt(max(val.real, 0.0))

    def evolve(self, prop_k: Propagator, prop_mk: Propagator) -> "BranchState":
        # both sectors usually share one Hamiltonian; cache evolved vectors by identity
        out = []
        for c, u, v in self.branches:
            out.append((c, prop_k.apply(u), prop_mk.apply(v)))
        return BranchState(self.spaces, out)

    def to_dense(self) -> FockVector:
        """Monolithic vector on the concatenated mode list (sector k modes first)."""
        sk, smk = self.spaces
        space = FockSpace(sk.modes + smk.modes, sk.n_max)
        psi = np.zeros(space.dim, dtype=complex)
        for c, u, v in self.branches:
            psi += c * np.kron(u, v)
        return FockVector(space, psi)

    def edge_mass(self) -> float:
        sk, smk = self.spaces
        total = 0.0
        for c, u, v in self.branches:
            total += abs(c) ** 2 * (edge_mass(sk, u) * np.vdot(v, v).real + np.vdot(u, u).real * edge_mass(smk, v))
        return float(total)


def sector_product_state(spaces, branches, atol: float = 1e-12) -> BranchState:
    """Build a ``BranchState`` from ``(coef, occupations_k, occupations_-k)`` triples.

    Occupations are dicts ``{mode: n}`` (missing modes empty) or arrays of
    amplitudes on the sector space.
    """
    sk, smk = spaces
    out = []
    for coef, occ_k, occ_mk in branches:
        u = sk.basis_vector(occ_k) if isinstance(occ_k, (dict, tuple)) else np.asarray(occ_k, dtype=complex)
        v = smk.basis_vector(occ_mk) if isinstance(occ_mk, (dict, tuple)) else np.asarray(occ_mk, dtype=complex)
        out.append((complex(coef), u, v))
    state = BranchState(tuple(spaces), out)
    nrm = state.norm()
    if abs(nrm**2 - 1.0) > atol:
        raise DomainError(f"input state has squared norm {nrm**2!r}, expected 1")
    return state


def _sector_factor(space, vec, mode):
    ax = space.axis(mode)
    t = np.moveaxis(vec.reshape(space.shape), ax, 0)
    return t.reshape(space.n_max + 1, -1)


@dataclass(frozen=True)
class ReducedState:
    """Density matrix over the occupations of ``modes`` (first mode slowest)."""

    modes: tuple
    matrix: np.ndarray
    tail_mass: float

    @property
    def dims(self) -> tuple:
        d = int(round(math.sqrt(self.matrix.shape[0])))
        return (d, d)

    def marginal(self, mode: str) -> np.ndarray:
        """Diagonal number distribution of one of the kept modes."""
        p = np.real(np.diag(self.matrix)).reshape(self.dims)
        return p.sum(axis=1) if mode == self.modes[0] else p.sum(axis=0)


def reduced_state(state: BranchState, keep=("a_k", "a_-k"), tail_tol=None) -> ReducedState:
    """Trace out everything except one mode from each sector.

    Cross terms between branches are included, so coherences of superposed
    inputs survive.
    """
    sk, smk = state.spaces
    owners = []
    for mode in keep:
        if mode in sk.modes:
            owners.append(0)
        elif mode in smk.modes:
            owners.append(1)
        else:
            raise DomainError(f"mode {mode!r} is in neither sector")
    if sorted(owners) != [0, 1]:
        raise DomainError(f"need one kept mode per sector, got {keep}")
    mode_k = keep[owners.index(0)]
    mode_mk = keep[owners.index(1)]
    Fk = [_sector_factor(sk, u, mode_k) for (_, u, _) in state.branches]
    Fmk = [_sector_factor(smk, v, mode_mk) for (_, _, v) in state.branches]
    coefs = [b[0] for b in state.branches]
    d = sk.n_max + 1
    rho = np.zeros((d * d, d * d), dtype=complex)
    for i, ci in enumerate(coefs):
        for j, cj in enumerate(coefs):
            Rk = Fk[i] @ Fk[j].conj().T
            Rmk = Fmk[i] @ Fmk[j].conj().T
            pair = np.kron(Rk, Rmk) if owners[0] == 0 else np.kron(Rmk, Rk)
            rho += ci * np.conj(cj) * pair
    tail = state.edge_mass()
    if tail_tol is not None and tail > tail_tol:
        raise TruncationError(f"truncation tail mass {tail:.3g} exceeds tolerance {tail_tol:.3g}")
    return ReducedState(tuple(keep), rho, tail)


def region1_reduced_state(state: BranchState, tail_tol=None) -> ReducedState:
    """State outside the horizon, over ``(n_{a_k}, n_{a_-k})``."""
    return reduced_state(state, ("a_k", "a_-k"), tail_tol)


def region2_reduced_state(state: BranchState, tail_tol=None) -> ReducedState:
    """State behind the horizon, over ``(n_{b_k}, n_{b_-k})``."""
    return reduced_state(state, ("b_k", "b_-k"), tail_tol)


def choose_truncation(params, N: int, M: int, tol: float, ceiling: int = DEFAULT_NMAX_CEILING) -> int:
    """Smallest safe per-mode cutoff for N quanta in and M post-selected quanta out.

    The excess occupation of any mode over its input is bounded by a negative
    binomial with ratio ``q`` (``exp(-omega/T)`` early, ``beta2/(1+beta2)``
    late). With ``k`` the smallest excess whose tail is below ``tol``, the
    cutoff is ``2 (k + N + 1)``, raised to ``N + M + 1 + k`` so that the
    post-selected M-quanta amplitudes keep the same headroom above them.
    """
    if not tol > 0:
        raise DomainError(f"tol must be > 0, got {tol}")
    if N < 0 or M < 0:
        raise DomainError(f"need N, M >= 0, got N={N}, M={M}")
    if not isinstance(params, (BlackHoleParams, EarlyTimeParams)):
        raise DomainError(f"unsupported parameter type {type(params).__name__}")
    floor = N + M + 1
    q = params.q
    if q == 0.0:
        n_max = floor
    else:
        k = 0
        while nbinom.sf(k, N + 1, 1.0 - q) >= tol:
            k += 1
            if k + N + 1 > ceiling:
                raise ResourceError(f"tol={tol:g} needs n_max > ceiling {ceiling} (q={q:.3g}); loosen tol")
        n_max = max(2 * (k + N + 1), floor + k)
    if n_max > ceiling:
        raise ResourceError(f"required n_max={n_max} exceeds ceiling {ceiling}; loosen tol")
    return n_max


def heisenberg_residual(
    couplings: CouplingConstants,
    n_max: int = 10,
    n_states: int = 4,
    seed: int = 0,
    builder=build_late_hamiltonian,
) -> float:
    """Largest mismatch between ``<U^dag a U>`` and the linear Bogoliubov prediction.

    The prediction is ``alpha <a> + beta <b^dag> + gamma <c>`` with
    ``alpha = cos(theta)``, ``beta = g sin(theta)/theta``,
    ``gamma = g' sin(theta)/theta`` and ``theta = sqrt(g'^2 - g^2)``. Their squares
    are the late-time coefficients; the signs are those produced by the
    Hamiltonian as built here. States are random with at most two quanta in
    total, so the box truncation is felt only through the evolved tails.
    """
    g, gp = couplings.g, couplings.g_prime
    theta = math.sqrt(max(gp * gp - g * g, 0.0))
    sinc = float(np.sinc(theta / math.pi))
    alpha, beta, gamma = math.cos(theta), g * sinc, gp * sinc

    a_mode, b_mode, c_mode = LATE_SECTOR_MODES["k"]
    space = FockSpace(LATE_SECTOR_MODES["k"], n_max)
    prop = Propagator(builder("k", couplings, space))
    a, bdag, c = ladder(space, a_mode), ladder(space, b_mode, dagger=True), ladder(space, c_mode)
    low = np.nonzero(space.occupations.sum(axis=1) <= 2)[0]
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_states):
        psi = np.zeros(space.dim, dtype=complex)
        psi[low] = rng.normal(size=low.size) + 1j * rng.normal(size=low.size)
        psi /= np.linalg.norm(psi)
        out = prop.apply(psi)
        lhs = np.vdot(out, a @ out)
        rhs = alpha * np.vdot(psi, a @ psi) + beta * np.vdot(psi, bdag @ psi) + gamma * np.vdot(psi, c @ psi)
        worst = max(worst, abs(lhs - rhs))
    return worst


def sector_vs_monolithic(
    couplings: CouplingConstants,
    n_max: int = 2,
    seed: int = 0,
    builder=build_late_hamiltonian,
) -> float:
    """Largest amplitude difference between per-sector and full six-mode evolution.

    A random superposition of product branches is evolved once sector by
    sector and once with both sector Hamiltonians summed on the
    ``(n_max+1)**6``-dimensional space of all modes.
    """
    sk = FockSpace(LATE_SECTOR_MODES["k"], n_max)
    smk = FockSpace(LATE_SECTOR_MODES["-k"], n_max)
    rng = np.random.default_rng(seed)

    def rand(space):
        v = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
        return v / np.linalg.norm(v)

    branches = [(c, rand(sk), rand(smk)) for c in rng.normal(size=3) + 1j * rng.normal(size=3)]
    state = BranchState((sk, smk), branches)
    nrm = state.norm()
    state = BranchState((sk, smk), [(c / nrm, u, v) for c, u, v in branches])

    evolved = state.evolve(Propagator(builder("k", couplings, sk)), Propagator(builder("-k", couplings, smk)))
    dense_in = state.to_dense()
    full = dense_in.space
    H = builder("k", couplings, full) + builder("-k", couplings, full)
    dense_out = evolve(H, dense_in)
    return float(np.max(np.abs(dense_out.amplitudes - evolved.to_dense().amplitudes)))
