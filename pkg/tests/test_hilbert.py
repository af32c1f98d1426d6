import numpy as np
import pytest

from cqed import hilbert
from cqed.errors import ParameterError
from cqed.params import SystemParams


def params(n_max=3, N=1, **kw):
    return SystemParams(g=38.0, kappa=8.7, gamma=3.0, n_max=n_max, N=N, **kw)


def random_density(dim, rng):
    M = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = M @ M.conj().T
    return rho / np.trace(rho)


class TestSpace:
    def test_smallest_space(self):
        # direct arithmetic: (1+1)*2 = 4
        assert hilbert.HilbertSpace(n_max=1, N=1).dim == 4

    def test_two_atom_space(self):
        assert hilbert.HilbertSpace(n_max=3, N=2).dim == 16

    def test_truncated_two_atom_space(self):
        assert hilbert.HilbertSpace(n_max=10, N=2).dim == 44

    def test_build_space_from_params(self):
        assert hilbert.build_space(params(n_max=5, N=2)).dim == 6 * 4

    def test_basis_ordering_photon_major(self):
        sp = hilbert.HilbertSpace(n_max=2, N=2)
        # photon index major, atom 1 in the least significant bit
        assert sp.basis_index(0) == 0
        assert sp.basis_index(0, (1,)) == 1
        assert sp.basis_index(0, (2,)) == 2
        assert sp.basis_index(1) == 4
        assert np.array_equal(sp.photon_numbers()[:5], [0, 0, 0, 0, 1])

    def test_atom_index_validation(self):
        sp = hilbert.HilbertSpace(n_max=2, N=1)
        with pytest.raises(ParameterError):
            sp.excited_mask(2)


class TestFieldOperators:
    def test_annihilation_smallest(self):
        sp = hilbert.HilbertSpace(n_max=1, N=1)
        a = hilbert.annihilation(sp)
        # <0|a|1> = 1 on the field factor, everything else zero
        expected = np.kron([[0, 1], [0, 0]], np.eye(2))
        assert np.allclose(a, expected)

    def test_number_operator_diagonal(self):
        sp = hilbert.HilbertSpace(n_max=3, N=1)
        a = hilbert.annihilation(sp)
        n_op = a.conj().T @ a
        assert np.allclose(np.diag(n_op).real, sp.photon_numbers())
        assert np.allclose(n_op - np.diag(np.diag(n_op)), 0.0)

    def test_truncation_commutator(self):
        # [a, a'] = I except the (n_max, n_max) photon entry, which is -n_max
        sp = hilbert.HilbertSpace(n_max=4, N=1)
        a = hilbert.annihilation(sp)
        comm = a @ a.conj().T - a.conj().T @ a
        expected_diag = np.ones(sp.dim)
        expected_diag[sp.photon_numbers() == sp.n_max] = -sp.n_max
        assert np.allclose(comm, np.diag(expected_diag))


class TestAtomicOperators:
    def test_single_atom_completeness(self):
        sp = hilbert.HilbertSpace(n_max=2, N=1)
        sm, sp_, _ = hilbert.atomic_ops(sp, 1)
        assert np.allclose(sm @ sp_ + sp_ @ sm, np.eye(sp.dim))

    def test_distinct_atoms_commute(self):
        sp = hilbert.HilbertSpace(n_max=2, N=2)
        sm1 = hilbert.atomic_ops(sp, 1)[0]
        sm2 = hilbert.atomic_ops(sp, 2)[0]
        assert np.allclose(sm1 @ sm2 - sm2 @ sm1, 0.0)

    def test_collective_on_symmetric_state(self):
        # S+S- on the symmetric one-excitation state returns 2x the state
        sp = hilbert.HilbertSpace(n_max=2, N=2)
        sm, spl = hilbert.collective_ops(sp)
        sym = np.zeros(sp.dim, dtype=complex)
        sym[sp.basis_index(0, (1,))] = 1 / np.sqrt(2)
        sym[sp.basis_index(0, (2,))] = 1 / np.sqrt(2)
        assert np.allclose(spl @ sm @ sym, 2.0 * sym)

    def test_atom_out_of_range(self):
        sp = hilbert.HilbertSpace(n_max=2, N=2)
        with pytest.raises(ParameterError):
            hilbert.atomic_ops(sp, 3)


class TestHamiltonian:
    def test_zero_when_undriven_uncoupled(self):
        p = SystemParams(g=1e-12, kappa=8.7, gamma=3.0, epsilon=0.0)
        H = hilbert.hamiltonian(p, hilbert.build_space(p))
        assert np.max(np.abs(H)) < 1e-9

    def test_hermitian(self):
        p = params(epsilon=0.44)
        H = hilbert.hamiltonian(p, hilbert.build_space(p))
        assert np.max(np.abs(H - H.conj().T)) == 0.0

    def test_one_excitation_doublet_splitting(self):
        # undriven N=1: the first excited doublet sits at +-g (angular)
        p = params(epsilon=0.0)
        sp = hilbert.build_space(p)
        H = hilbert.hamiltonian(p, sp)
        i1 = sp.basis_index(1)
        i2 = sp.basis_index(0, (1,))
        sub = H[np.ix_([i1, i2], [i1, i2])]
        evals = np.sort(np.linalg.eigvalsh(sub))
        g_ang = p.angular().g
        assert abs(evals[1] - evals[0] - 2 * g_ang) / (2 * g_ang) < 1e-10


class TestLiouvillian:
    def test_trace_preservation_random(self):
        p = params(epsilon=0.44)
        sp = hilbert.build_space(p)
        L = hilbert.liouvillian(p, sp)
        rng = np.random.default_rng(7)
        for _ in range(10):
            rho = random_density(sp.dim, rng)
            assert abs(np.trace(hilbert.unvec(L @ hilbert.vec(rho)))) < 1e-12

    def test_dissipators_preserve_hermiticity(self):
        p = params(N=2, epsilon=0.3)
        sp = hilbert.build_space(p)
        L = hilbert.liouvillian(p, sp)
        rng = np.random.default_rng(11)
        for _ in range(5):
            rho = random_density(sp.dim, rng)
            out = hilbert.unvec(L @ hilbert.vec(rho))
            assert np.max(np.abs(out - out.conj().T)) < 1e-10

    def test_vacuum_dark_without_drive(self):
        p = params(epsilon=0.0)
        sp = hilbert.build_space(p)
        L = hilbert.liouvillian(p, sp)
        rho = np.zeros((sp.dim, sp.dim), dtype=complex)
        rho[0, 0] = 1.0
        assert np.max(np.abs(L @ hilbert.vec(rho))) < 1e-12

    def test_uncoupled_field_moment_equation(self):
        # g = 0: d<a>/dt = -kappa <a> + eps on states clear of the truncation edge
        p = SystemParams(g=1e-9, kappa=8.7, gamma=3.0, epsilon=0.7, n_max=5)
        sp = hilbert.build_space(p)
        L = hilbert.liouvillian(p, sp)
        a = hilbert.annihilation(sp)
        ang = p.angular()
        rng = np.random.default_rng(3)
        dim_low = (3 + 1) * sp.n_atomic  # support on n <= 3 only
        M = np.zeros((sp.dim, sp.dim), dtype=complex)
        blk = rng.normal(size=(dim_low, dim_low)) + 1j * rng.normal(size=(dim_low, dim_low))
        M[:dim_low, :dim_low] = blk @ blk.conj().T
        rho = M / np.trace(M)
        lhs = np.trace(a @ hilbert.unvec(L @ hilbert.vec(rho)))
        rhs = -ang.kappa * np.trace(a @ rho) + ang.epsilon
        assert abs(lhs - rhs) / abs(rhs) < 1e-9

    def test_vec_unvec_roundtrip(self):
        rng = np.random.default_rng(5)
        rho = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        assert np.allclose(hilbert.unvec(hilbert.vec(rho)), rho)
        # column stacking: vec(A rho B) = (B^T kron A) vec(rho)
        A = rng.normal(size=(6, 6))
        B = rng.normal(size=(6, 6))
        lhs = hilbert.sprepost(A, B) @ hilbert.vec(rho)
        assert np.allclose(hilbert.unvec(lhs), A @ rho @ B)
