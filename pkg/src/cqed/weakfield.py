"""Closed-form weak-field constants, regression waveforms and the quadratic
equilibrium state.

This layer is used as an independent oracle for the numeric pipeline and
never feeds it.  All constants are drive-independent except phi, which
scales with the steady-state field lam; the stored `phi_over_lambda` is the
ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import hilbert
from .errors import OverdampedError
from .params import SystemParams, derived_params


@dataclass(frozen=True)
class WeakFieldConstants:
    """Constants of the second-order weak-field solution.

    alpha*beta and beta are the fractional field steps after a cavity and a
    spontaneous emission; Omega (rad/us) and the envelope rate
    (kappa+gamma/2)/2 (rad/us) govern the regression back to equilibrium.
    """

    alpha: float
    beta: float
    zeta_cav: float
    zeta_spont: float
    Omega: float
    Phi_cav: float
    Phi_spont: float
    q: float
    phi_over_lambda: float
    envelope_rate: float

    @property
    def Omega_mhz(self) -> float:
        """Omega in the caption convention, value/2pi in MHz."""
        return self.Omega / (2.0 * math.pi)

    def zeta(self, kind: str) -> float:
        return {"cavity": self.zeta_cav, "spontaneous": self.zeta_spont}[kind]

    def Phi(self, kind: str) -> float:
        return {"cavity": self.Phi_cav, "spontaneous": self.Phi_spont}[kind]


def constants(params: SystemParams) -> WeakFieldConstants:
    """Evaluate the closed-form constants for the given rates."""
    dp = derived_params(params)
    C, C1p = dp.C, dp.C1prime
    ang = params.angular()
    disc = params.N * ang.g**2 - 0.25 * (ang.kappa - ang.gamma / 2.0) ** 2
    if disc <= 0.0:
        raise OverdampedError(
            "N g^2 <= (kappa - gamma/2)^2/4: regression is overdamped, "
            "oscillatory waveform constants undefined"
        )
    Omega = math.sqrt(disc)
    denom = 1.0 + 2.0 * C - 2.0 * C1p
    beta = (1.0 + 2.0 * C) / denom
    q = math.sqrt(1.0 - 1.0 / params.N)
    Phi_spont = (2.0 * ang.kappa - ang.gamma) / (4.0 * Omega) + (
        2.0 * params.N * ang.g**2 * (q * beta / math.sqrt(2.0) - 1.0)
        / (ang.gamma * Omega * (beta - 1.0))
    )
    return WeakFieldConstants(
        alpha=1.0 - 2.0 * C1p,
        beta=beta,
        zeta_cav=-4.0 * C1p * C / denom,
        zeta_spont=2.0 * C1p / denom,
        Omega=Omega,
        Phi_cav=-(2.0 * ang.kappa + ang.gamma) / (4.0 * Omega),
        Phi_spont=Phi_spont,
        q=q,
        phi_over_lambda=-2.0 * math.sqrt(params.N) * ang.g / ang.gamma,
        envelope_rate=0.5 * (ang.kappa + ang.gamma / 2.0),
    )


def waveform(wf: WeakFieldConstants, kind: str, tau: np.ndarray) -> np.ndarray:
    """Normalized conditioned field <A_0>(tau)/lam = 1 + zeta*f(tau).

    f(tau) = exp(-(kappa+gamma/2) tau/2) (cos(Omega tau) - Phi sin(Omega tau));
    kind is "cavity" or "spontaneous".  tau in us, tau >= 0.
    """
    tau = np.asarray(tau, dtype=float)
    f = np.exp(-wf.envelope_rate * tau) * (
        np.cos(wf.Omega * tau) - wf.Phi(kind) * np.sin(wf.Omega * tau)
    )
    return 1.0 + wf.zeta(kind) * f


def equilibrium_state(params: SystemParams, lam: float) -> np.ndarray:
    """Pure equilibrium state to second order in lam, normalized.

    Coefficients {1, lam, (lam^2/sqrt2) alpha*beta} on |0,1,2>|G> and
    {phi, lam*phi*beta} on |0,1>|E>, where |E> is the symmetric
    single-excitation atomic state; higher excitations are truncated.
    """
    wf = constants(params)
    space = hilbert.build_space(params)
    if space.n_max < 2:
        raise ValueError("equilibrium state needs n_max >= 2")
    phi = wf.phi_over_lambda * lam
    psi = np.zeros(space.dim, dtype=complex)
    psi[space.basis_index(0)] = 1.0
    psi[space.basis_index(1)] = lam
    psi[space.basis_index(2)] = (lam**2 / math.sqrt(2.0)) * wf.alpha * wf.beta
    # symmetric |E>: (1/sqrt N) sum_j |e_j>
    for j in range(1, params.N + 1):
        psi[space.basis_index(0, (j,))] = phi / math.sqrt(params.N)
        psi[space.basis_index(1, (j,))] = lam * phi * wf.beta / math.sqrt(params.N)
    return psi / np.linalg.norm(psi)


def emission_ratio(params: SystemParams) -> float:
    """Weak-field ratio of spontaneous to cavity emission probability, 2NC1."""
    return 2.0 * params.N * derived_params(params).C1
