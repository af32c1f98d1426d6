"""Steady state of the master equation and derived field moments."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg

from . import hilbert
from .errors import ConvergenceError, DegenerateSteadyStateError
from .params import SystemParams, derived_params


@dataclass(frozen=True)
class DensityDiagnostics:
    """Validation summary of a density matrix."""

    trace_defect: float
    hermiticity_defect: float
    min_eigenvalue: float


def density_diagnostics(rho: np.ndarray) -> DensityDiagnostics:
    herm = np.max(np.abs(rho - rho.conj().T))
    eigs = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
    return DensityDiagnostics(
        trace_defect=abs(np.trace(rho).real - 1.0) + abs(np.trace(rho).imag),
        hermiticity_defect=float(herm),
        min_eigenvalue=float(eigs.min()),
    )


def steady_state(L: np.ndarray, method: str = "svd") -> np.ndarray:
    """Solve L rho = 0 with Tr rho = 1.

    method="svd" (default) takes the right singular vector of the smallest
    singular value and checks that the null space is one-dimensional.
    method="direct" replaces the first row of L with the trace constraint
    and solves the resulting linear system; it skips the degeneracy check
    but is much faster for repeated calls (e.g. drive calibration).
    """
    n2 = L.shape[0]
    d = int(round(math.sqrt(n2)))
    if method == "svd":
        _, s, vh = scipy.linalg.svd(L)
        scale = s[0] if s[0] > 0 else 1.0
        if s[-1] > 1e-10 * scale:
            raise DegenerateSteadyStateError(
                f"no null vector: smallest singular value {s[-1]:.3e} (scale {scale:.3e})"
            )
        if s[-2] < 1e-10 * scale:
            raise DegenerateSteadyStateError(
                f"null space dimension > 1: s[-2] = {s[-2]:.3e} (scale {scale:.3e})"
            )
        rho = hilbert.unvec(vh[-1].conj())
    elif method == "direct":
        A = L.copy()
        b = np.zeros(n2, dtype=complex)
        # trace row: sum of diagonal entries of rho in column-stacked layout
        tr_row = np.zeros(n2, dtype=complex)
        tr_row[:: d + 1] = 1.0
        A[0, :] = tr_row
        b[0] = 1.0
        rho = hilbert.unvec(np.linalg.solve(A, b))
    else:
        raise ValueError(f"unknown method {method!r}")

    rho = 0.5 * (rho + rho.conj().T)
    rho /= np.trace(rho).real
    return rho


@dataclass(frozen=True)
class SteadyMoments:
    """Field moments of the steady state.

    lam is <a> (complex as computed); n_bar = <a'a>; n_inc = n_bar - |lam|^2;
    X = n_bar/n0; F = 2*kappa*n_bar is the output photon flux per us
    (kappa angular).
    """

    lam: complex
    n_bar: float
    n_inc: float
    X: float
    F: float

    @property
    def lam_real(self) -> float:
        return self.lam.real


def moments(rho: np.ndarray, params: SystemParams) -> SteadyMoments:
    """Steady-state field moments; on resonance Im lam should be ~0."""
    space = hilbert.build_space(params)
    a = hilbert.annihilation(space)
    lam = complex(np.trace(a @ rho))
    n_bar = float(np.trace(a.conj().T @ a @ rho).real)
    n0 = derived_params(params).n0
    return SteadyMoments(
        lam=lam,
        n_bar=n_bar,
        n_inc=n_bar - abs(lam) ** 2,
        X=n_bar / n0,
        F=2.0 * params.angular().kappa * n_bar,
    )


def solve(params: SystemParams, method: str = "svd") -> tuple[np.ndarray, SteadyMoments]:
    """Build the Liouvillian, solve for the steady state, return (rho, moments)."""
    space = hilbert.build_space(params)
    L = hilbert.liouvillian(params, space)
    rho = steady_state(L, method=method)
    return rho, moments(rho, params)


def converge_nmax(
    params: SystemParams,
    observable: Callable[[SystemParams], float] | None = None,
    rel_tol: float = 5e-4,
    n_start: int | None = None,
    n_cap: int = 40,
) -> int:
    """Smallest n_max whose observable moves < rel_tol when n_max grows by 2.

    `observable` maps a SystemParams (with its n_max set by the sweep) to a
    scalar; the default is the steady-state photon number.
    """
    if observable is None:
        observable = lambda p: solve(p, method="direct")[1].n_bar

    n = params.n_max if n_start is None else n_start
    prev = observable(params.replace(n_max=n))
    while n + 2 <= n_cap:
        cur = observable(params.replace(n_max=n + 2))
        scale = max(abs(cur), abs(prev), 1e-300)
        if abs(cur - prev) / scale < rel_tol:
            return n
        n += 2
        prev = cur
    raise ConvergenceError(
        f"observable not converged to {rel_tol:g} by n_max = {n_cap}; "
        "drive too strong for this truncation cap"
    )


def calibrate_drive(
    params: SystemParams,
    X_target: float,
    rel_tol: float = 1e-3,
    max_iter: int = 80,
) -> float:
    """Drive amplitude epsilon (MHz) that yields the requested X = <a'a>/n0.

    Bisection on the steady-state intensity over epsilon in [0, 20*kappa];
    X is monotone in the drive over the regimes treated here.
    """
    lo, hi = 0.0, 20.0 * params.kappa

    def X_of(eps: float) -> float:
        return solve(params.replace(epsilon=eps), method="direct")[1].X

    if X_of(hi) < X_target:
        raise ConvergenceError(f"X_target {X_target:g} unreachable within bracket")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        X_mid = X_of(mid)
        if abs(X_mid - X_target) <= rel_tol * X_target:
            return mid
        if X_mid < X_target:
            lo = mid
        else:
            hi = mid
    raise ConvergenceError(f"drive calibration did not reach {rel_tol:g} in {max_iter} steps")
