"""Truncated Hilbert space, system operators, Hamiltonian and Liouvillian.

Basis ordering is fixed so that operator matrices are reproducible
bit-for-bit: the photon number n is the major index and the atomic
configuration m (a bitmask, atom 1 in the least significant bit, bit set =
excited) is the minor index,

    index = n * 2**N + m,   dim = (n_max + 1) * 2**N.

Superoperators act on column-stacked density matrices,
vec(rho)[i + dim*j] = rho[i, j], so vec(A rho B) = (B^T kron A) vec(rho).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .params import SystemParams


@dataclass(frozen=True)
class HilbertSpace:
    """Truncated field-plus-atoms space with the documented index layout."""

    n_max: int
    N: int

    @property
    def dim(self) -> int:
        return (self.n_max + 1) * 2**self.N

    @property
    def n_atomic(self) -> int:
        return 2**self.N

    def photon_numbers(self) -> np.ndarray:
        """Photon number of each basis state, shape (dim,)."""
        return np.repeat(np.arange(self.n_max + 1), self.n_atomic)

    def excited_mask(self, j: int) -> np.ndarray:
        """Boolean mask of basis states with atom j (1-based) excited."""
        if not 1 <= j <= self.N:
            raise ParameterError(f"atom index {j} outside 1..{self.N}")
        m = np.tile(np.arange(self.n_atomic), self.n_max + 1)
        return (m >> (j - 1)) & 1 == 1

    def basis_index(self, n: int, excited: tuple[int, ...] = ()) -> int:
        """Index of |n> with the listed atoms (1-based) excited."""
        if not 0 <= n <= self.n_max:
            raise ParameterError(f"photon number {n} outside 0..{self.n_max}")
        m = 0
        for j in excited:
            if not 1 <= j <= self.N:
                raise ParameterError(f"atom index {j} outside 1..{self.N}")
            m |= 1 << (j - 1)
        return n * self.n_atomic + m


def build_space(params: SystemParams) -> HilbertSpace:
    """Hilbert space for the given truncation and atom count."""
    return HilbertSpace(n_max=params.n_max, N=params.N)


def _field_annihilation(n_max: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)


_SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)  # |g><e|, basis (g, e)
_SIGMA_Z = np.array([[-1.0, 0.0], [0.0, 1.0]], dtype=complex)


def annihilation(space: HilbertSpace) -> np.ndarray:
    """Field annihilation operator a = a_field (x) I_atoms."""
    return np.kron(_field_annihilation(space.n_max), np.eye(space.n_atomic, dtype=complex))


def atomic_ops(space: HilbertSpace, j: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(sigma_minus, sigma_plus, sigma_z) for atom j, 1-based.

    Atom j occupies bit j-1 of the atomic index, so its operator sits at
    kron position I(2^(N-j)) (x) op (x) I(2^(j-1)) within the atomic factor.
    """
    if not 1 <= j <= space.N:
        raise ParameterError(f"atom index {j} outside 1..{space.N}")

    def embed(op: np.ndarray) -> np.ndarray:
        at = np.kron(np.kron(np.eye(2 ** (space.N - j), dtype=complex), op),
                     np.eye(2 ** (j - 1), dtype=complex))
        return np.kron(np.eye(space.n_max + 1, dtype=complex), at)

    sm = embed(_SIGMA_MINUS)
    return sm, sm.conj().T, embed(_SIGMA_Z)


def collective_ops(space: HilbertSpace) -> tuple[np.ndarray, np.ndarray]:
    """Collective (S_minus, S_plus) summed over atoms."""
    sm_tot = np.zeros((space.dim, space.dim), dtype=complex)
    for j in range(1, space.N + 1):
        sm_tot += atomic_ops(space, j)[0]
    return sm_tot, sm_tot.conj().T


def hamiltonian(params: SystemParams, space: HilbertSpace) -> np.ndarray:
    """Interaction-picture Hamiltonian on resonance, units of hbar (rad/us).

    H = -i g (S+ a - a' S-) + i eps (a' - a), g and eps angular.
    """
    ang = params.angular()
    a = annihilation(space)
    ad = a.conj().T
    sm, sp = collective_ops(space)
    return -1j * ang.g * (sp @ a - ad @ sm) + 1j * ang.epsilon * (ad - a)


def spre(op: np.ndarray) -> np.ndarray:
    """Superoperator for left multiplication, rho -> op rho."""
    d = op.shape[0]
    return np.kron(np.eye(d, dtype=complex), op)


def spost(op: np.ndarray) -> np.ndarray:
    """Superoperator for right multiplication, rho -> rho op."""
    d = op.shape[0]
    return np.kron(op.T, np.eye(d, dtype=complex))


def sprepost(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Superoperator for rho -> left rho right."""
    return np.kron(right.T, left)


def dissipator(c: np.ndarray) -> np.ndarray:
    """Lindblad dissipator rho -> c rho c' - (c'c rho + rho c'c)/2."""
    cdc = c.conj().T @ c
    return sprepost(c, c.conj().T) - 0.5 * (spre(cdc) + spost(cdc))


def vec(rho: np.ndarray) -> np.ndarray:
    """Column-stack a matrix."""
    return rho.reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    """Inverse of :func:`vec`."""
    d = int(round(np.sqrt(v.size)))
    return v.reshape((d, d), order="F")


def liouvillian(params: SystemParams, space: HilbertSpace) -> np.ndarray:
    """Generator of the master equation as a dim^2 x dim^2 matrix.

    L rho = -i[H, rho] + kappa(2 a rho a' - a'a rho - rho a'a)
          + gamma/2 sum_j (2 s-_j rho s+_j - s+_j s-_j rho - rho s+_j s-_j)
    """
    ang = params.angular()
    a = annihilation(space)
    H = hamiltonian(params, space)
    L = -1j * (spre(H) - spost(H))
    L += 2.0 * ang.kappa * dissipator(a)
    for j in range(1, space.N + 1):
        sm = atomic_ops(space, j)[0]
        L += ang.gamma * dissipator(sm)
    return L


def quadrature(space: HilbertSpace, theta: float = 0.0) -> np.ndarray:
    """Quadrature amplitude A_theta = (a e^{-i theta} + a' e^{i theta})/2."""
    a = annihilation(space)
    return 0.5 * (a * np.exp(-1j * theta) + a.conj().T * np.exp(1j * theta))
