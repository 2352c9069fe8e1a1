import math

import mpmath
import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from bhclone.bogoliubov import CouplingConstants, couplings_from_params, early_time_coeffs, late_time_coeffs
from bhclone.errors import DomainError, ResourceError
from bhclone.fock import (
    EARLY_SECTOR_MODES,
    LATE_SECTOR_MODES,
    BranchState,
    FockSpace,
    FockVector,
    Propagator,
    build_early_hamiltonian,
    build_late_hamiltonian,
    charge_operator,
    choose_truncation,
    edge_mass,
    evolve,
    heisenberg_residual,
    ladder,
    reduced_state,
    sector_product_state,
    sector_vs_monolithic,
)

EARLY = FockSpace(EARLY_SECTOR_MODES["k"], 8)
LATE = FockSpace(LATE_SECTOR_MODES["k"], 6)
COUPLINGS = couplings_from_params(late_time_coeffs(0.95, 4.0))


def _random_low_state(space, rng, max_quanta=3):
    low = np.nonzero(space.occupations.sum(axis=1) <= max_quanta)[0]
    psi = np.zeros(space.dim, dtype=complex)
    psi[low] = rng.normal(size=low.size) + 1j * rng.normal(size=low.size)
    return psi / np.linalg.norm(psi)


class TestFockSpace:
    def test_shape_and_dim(self):
        assert LATE.dim == 7**3 and LATE.shape == (7, 7, 7)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 5), st.data())
    def test_index_bijection(self, n_max, data):
        space = FockSpace(("a_k", "b_-k", "c_k"), n_max)
        occ = tuple(data.draw(st.integers(0, n_max)) for _ in range(3))
        assert space.occupation(space.index(occ)) == occ
        assert tuple(space.occupations[space.index(occ)]) == occ

    def test_basis_vector_from_dict(self):
        v = LATE.basis_vector({"c_k": 1})
        assert v[LATE.index((0, 0, 1))] == 1.0 and np.count_nonzero(v) == 1

    @pytest.mark.parametrize("modes", [("a_k", "a_k"), ("a_k", "z")])
    def test_bad_modes(self, modes):
        with pytest.raises(DomainError):
            FockSpace(modes, 2)

    def test_occupation_outside_box(self):
        with pytest.raises(DomainError):
            LATE.basis_vector({"a_k": 7})

    def test_ladder_commutator_below_cutoff(self):
        a = ladder(EARLY, "a_k")
        comm = (a @ a.T - a.T @ a).toarray()
        below = EARLY.number("a_k") < EARLY.n_max
        assert np.allclose(np.diag(comm)[below], 1.0)


class TestHamiltonians:
    def test_early_matrix_element(self):
        g = 0.37
        H = build_early_hamiltonian("k", g, EARLY)
        i11, i00 = EARLY.index((1, 1)), EARLY.index((0, 0))
        assert H[i11, i00] == pytest.approx(1j * g, abs=1e-15)

    def test_late_matrix_element(self):
        c = CouplingConstants(0.2, 0.9)
        H = build_late_hamiltonian("k", c, LATE)
        assert H[LATE.index((1, 0, 0)), LATE.index((0, 0, 1))] == pytest.approx(1j * 0.9, abs=1e-15)
        assert H[LATE.index((1, 1, 0)), LATE.index((0, 0, 0))] == pytest.approx(1j * 0.2, abs=1e-15)

    @pytest.mark.parametrize("sector", ["k", "-k"])
    def test_hermitian(self, sector):
        H = build_late_hamiltonian(sector, COUPLINGS, FockSpace(LATE_SECTOR_MODES[sector], 6))
        assert abs(H - H.getH()).max() <= 1e-14
        He = build_early_hamiltonian(sector, 0.8, FockSpace(EARLY_SECTOR_MODES[sector], 6))
        assert abs(He - He.getH()).max() <= 1e-14

    def test_zero_gain(self):
        assert build_early_hamiltonian("k", 0.0, EARLY).count_nonzero() == 0

    def test_pure_beamsplitter_couples_only_a_and_c(self):
        H = build_late_hamiltonian("k", CouplingConstants(0.0, 0.7), LATE).tocoo()
        occ = LATE.occupations
        for r, c in zip(H.row, H.col):
            assert occ[r][1] == occ[c][1]  # b untouched

    def test_no_beamsplitter_is_early_padded(self):
        g = 0.4
        H = build_late_hamiltonian("k", CouplingConstants(g, g), LATE)
        H_bs = build_late_hamiltonian("k", CouplingConstants(0.0, g), LATE)
        H_sq = H - H_bs
        # padded early-time squeezer: identity on c
        early = FockSpace(EARLY_SECTOR_MODES["k"], 6)
        padded = np.kron(build_early_hamiltonian("k", g, early).toarray(), np.eye(7))
        assert np.allclose(H_sq.toarray(), padded, atol=1e-15)

    def test_wrong_sector(self):
        with pytest.raises(DomainError):
            build_late_hamiltonian("-k", COUPLINGS, LATE)
        with pytest.raises(DomainError):
            build_early_hamiltonian("q", 0.1, EARLY)

    def test_charge_commutes(self):
        H = build_late_hamiltonian("k", COUPLINGS, LATE).toarray()
        Q = np.diag(charge_operator(LATE, "k"))
        assert np.abs(H @ Q - Q @ H).max() == 0.0


class TestEvolution:
    def test_zero_hamiltonian_is_identity(self):
        psi = _random_low_state(LATE, np.random.default_rng(0))
        H = build_late_hamiltonian("k", CouplingConstants(0.0, 0.0), LATE)
        assert np.allclose(evolve(H, FockVector(LATE, psi)).amplitudes, psi, atol=0)

    @pytest.mark.parametrize("g", [0.2, 0.6, 1.0])
    def test_squeezed_vacuum(self, g):
        space = FockSpace(EARLY_SECTOR_MODES["k"], 30)
        out = evolve(build_early_hamiltonian("k", g, space), FockVector(space, space.basis_vector((0, 0))))
        lam = math.tanh(g) ** 2
        n = np.arange(12)
        p = np.abs(out.tensor()[n, n]) ** 2
        tail = lam**31 * 31
        assert np.allclose(p, (1 - lam) * lam**n, atol=1e-12 + tail)
        # the a-marginal has mean sinh^2 g
        pa = (np.abs(out.tensor()) ** 2).sum(axis=1)
        mean_tail = 32 * lam**31 / (1 - lam) ** 2
        assert pa @ np.arange(31) == pytest.approx(math.sinh(g) ** 2, abs=1e-12 + mean_tail)

    @pytest.mark.parametrize("gp", [0.3, 0.9, 1.4])
    def test_beamsplitter_rotation(self, gp):
        H = build_late_hamiltonian("k", CouplingConstants(0.0, gp), LATE)
        out = evolve(H, FockVector(LATE, LATE.basis_vector((0, 0, 1))))
        assert abs(out.amplitudes[LATE.index((1, 0, 0))]) ** 2 == pytest.approx(math.sin(gp) ** 2, abs=1e-14)

    def test_matches_dense_expm(self):
        H = build_late_hamiltonian("k", COUPLINGS, LATE)
        U = scipy.linalg.expm(-1j * H.toarray())
        psi = _random_low_state(LATE, np.random.default_rng(2), max_quanta=5)
        assert np.allclose(Propagator(H).apply(psi), U @ psi, atol=1e-12)

    def test_complex_block_falls_back(self):
        # a random Hermitian matrix has no real gauge
        rng = np.random.default_rng(3)
        A = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        H = (A + A.conj().T) / 2
        psi = rng.normal(size=6) + 0j
        assert np.allclose(Propagator(H).apply(psi), scipy.linalg.expm(-1j * H) @ psi, atol=1e-12)

    def test_graded_against_high_precision_exponential(self):
        # deep in the tail: amplitudes near exp(-50 n) are lost by the spectral route
        space = FockSpace(EARLY_SECTOR_MODES["k"], 6)
        p = early_time_coeffs(100.0)
        H = build_early_hamiltonian("k", p.g_k, space)
        psi = space.basis_vector((1, 0))
        prop = Propagator(H, method="graded", grade=space.number("b_-k"), scale=math.sqrt(p.q))
        out = prop.apply(psi)
        with mpmath.workdps(130):
            Hm = mpmath.matrix(H.toarray().tolist())
            Um = mpmath.expm(-1j * Hm)
            ref = [Um[i, space.index((1, 0))] for i in range(space.dim)]
        for n in range(1, 6):
            i = space.index((1 + n, n))
            assert complex(out[i]) == pytest.approx(complex(ref[i]), rel=1e-10)
            assert abs(out[i]) < 1e-20**n

    def test_graded_squeezed_vacuum_closed_form(self):
        space = FockSpace(EARLY_SECTOR_MODES["k"], 8)
        p = early_time_coeffs(40.0)
        H = build_early_hamiltonian("k", p.g_k, space)
        prop = Propagator(H, method="graded", grade=space.number("b_-k"), scale=math.sqrt(p.q))
        out = prop.apply(space.basis_vector((0, 0)))
        t = math.tanh(p.g_k)
        for n in range(6):
            assert out[space.index((n, n))].real == pytest.approx(t**n / math.cosh(p.g_k), rel=1e-12)

    def test_unitarity_and_conservation(self):
        H = build_late_hamiltonian("k", COUPLINGS, LATE)
        prop = Propagator(H)
        Q = charge_operator(LATE, "k")
        rng = np.random.default_rng(4)
        for _ in range(5):
            psi = _random_low_state(LATE, rng)
            out = prop.apply(psi)
            assert np.linalg.norm(out) == pytest.approx(1.0, abs=1e-10)
            assert np.vdot(out, Q * out).real == pytest.approx(np.vdot(psi, Q * psi).real, abs=1e-10)

    def test_bad_method(self):
        with pytest.raises(DomainError):
            Propagator(build_early_hamiltonian("k", 0.1, EARLY), method="taylor")
        with pytest.raises(DomainError):
            Propagator(build_early_hamiltonian("k", 0.1, EARLY), method="graded")


class TestHeisenberg:
    # hotter channels populate higher occupations and need a larger box
    @pytest.mark.parametrize("g0,x,n_max", [(0.95, 4.0, 12), (0.3, 2.0, 12), (0.6, 1.0, 20)])
    def test_bogoliubov_relation(self, g0, x, n_max):
        assert heisenberg_residual(couplings_from_params(late_time_coeffs(g0, x)), n_max=n_max) <= 1e-8

    def test_residual_shrinks_with_box(self):
        c = couplings_from_params(late_time_coeffs(0.6, 1.0))
        res = [heisenberg_residual(c, n_max=n) for n in (8, 12, 16)]
        assert res[0] > res[1] > res[2]

    def test_flipped_squeezing_sign_is_caught(self):
        def mutated(sector, couplings, space):
            bs = build_late_hamiltonian(sector, CouplingConstants(0.0, couplings.g_prime), space)
            sq = build_late_hamiltonian(sector, CouplingConstants(couplings.g, couplings.g), space)
            sq = sq - build_late_hamiltonian(sector, CouplingConstants(0.0, couplings.g), space)
            return bs - sq

        c = couplings_from_params(late_time_coeffs(0.6, 1.0))
        assert heisenberg_residual(c, n_max=12, builder=mutated) > 1e-3


class TestSectors:
    def test_monolithic_agreement(self):
        assert sector_vs_monolithic(COUPLINGS, n_max=2) <= 1e-10

    def test_single_product_term(self):
        spaces = (FockSpace(LATE_SECTOR_MODES["k"], 3), FockSpace(LATE_SECTOR_MODES["-k"], 3))
        s = sector_product_state(spaces, [(1.0, {"c_k": 1}, {})])
        assert len(s.branches) == 1 and s.norm() == pytest.approx(1.0)

    def test_superposition_norm(self):
        spaces = (FockSpace(LATE_SECTOR_MODES["k"], 3), FockSpace(LATE_SECTOR_MODES["-k"], 3))
        r = 1 / math.sqrt(2)
        s = sector_product_state(spaces, [(r, {"c_k": 1}, {}), (r, {}, {"c_-k": 1})])
        assert s.norm() == pytest.approx(1.0, abs=1e-15)
        with pytest.raises(DomainError):
            sector_product_state(spaces, [(1.0, {"c_k": 1}, {}), (1.0, {}, {"c_-k": 1})])

    def _evolved(self, branches, couplings=COUPLINGS, n_max=8):
        sk, smk = FockSpace(LATE_SECTOR_MODES["k"], n_max), FockSpace(LATE_SECTOR_MODES["-k"], n_max)
        state = sector_product_state((sk, smk), branches)
        prop = Propagator(build_late_hamiltonian("k", couplings, sk))
        return state.evolve(prop, prop)

    def test_vacuum_without_squeezing_stays_vacuum(self):
        out = self._evolved([(1.0, {}, {})], CouplingConstants(0.0, 0.5), n_max=3)
        rho = reduced_state(out, ("a_k", "a_-k")).matrix
        expected = np.zeros_like(rho)
        expected[0, 0] = 1.0
        assert np.allclose(rho, expected, atol=1e-15)

    def test_basis_input_gives_diagonal_state(self):
        rho = reduced_state(self._evolved([(1.0, {"c_k": 1}, {})]), ("a_k", "a_-k")).matrix
        off = rho - np.diag(np.diag(rho))
        assert np.abs(off).max() <= 1e-10

    def test_reduced_state_trace(self):
        r = 1 / math.sqrt(2)
        red = reduced_state(self._evolved([(r, {"c_k": 1}, {}), (1j * r, {}, {"c_-k": 1})]))
        assert np.trace(red.matrix).real == pytest.approx(1.0, abs=1e-12)
        assert red.tail_mass < 1e-12

    def test_needs_one_mode_per_sector(self):
        out = self._evolved([(1.0, {}, {})], n_max=2)
        with pytest.raises(DomainError):
            reduced_state(out, ("a_k", "b_-k"))

    def test_edge_mass(self):
        space = FockSpace(("a_k",), 3)
        psi = np.array([0.6, 0, 0, 0.8])
        assert edge_mass(space, psi) == pytest.approx(0.64)
        state = BranchState((space, space), [(1.0, psi, np.array([1.0, 0, 0, 0]))])
        assert state.edge_mass() == pytest.approx(0.64)


class TestTruncation:
    def test_cold_channel_needs_only_the_inputs(self):
        p = late_time_coeffs(0.5, 800.0)
        assert p.beta2 == 0.0
        assert choose_truncation(p, 2, 3, 1e-8) == 6

    def test_reference_point(self):
        assert choose_truncation(late_time_coeffs(0.95, 4.0), 1, 1, 1e-8) <= 12

    def test_grows_with_tightening(self):
        p = late_time_coeffs(0.95, 2.0)
        sizes = [choose_truncation(p, 1, 1, tol) for tol in (1e-4, 1e-8, 1e-12)]
        assert sizes == sorted(sizes) and sizes[0] < sizes[-1]

    def test_covers_post_selection(self):
        p = late_time_coeffs(0.95, 4.0)
        assert choose_truncation(p, 1, 15, 1e-8) > 17

    def test_ceiling(self):
        with pytest.raises(ResourceError):
            choose_truncation(late_time_coeffs(1.0, 0.2), 1, 1, 1e-12)
        with pytest.raises(ResourceError):
            choose_truncation(late_time_coeffs(0.95, 4.0), 1, 1, 1e-8, ceiling=8)

    @pytest.mark.parametrize("tol", [0.0, -1.0])
    def test_domain(self, tol):
        with pytest.raises(DomainError):
            choose_truncation(late_time_coeffs(0.95, 4.0), 1, 1, tol)
