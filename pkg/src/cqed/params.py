"""System parameters for the driven atom-cavity model.

Rates are entered in the figure-caption convention: the numeric value of
(rate)/2pi in MHz.  Everything downstream works in angular units (rad/us),
obtained through :meth:`SystemParams.angular` exactly once; time is measured
in microseconds throughout the package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SystemParams:
    """Physical rates and detection settings.

    Parameters
    ----------
    g : float
        Atom-field coupling in MHz (the caption's g/2pi).
    kappa : float
        Cavity field decay in MHz.
    gamma : float
        Atomic inversion decay in MHz.
    epsilon : float
        Coherent drive amplitude in MHz, same convention.
    N : int
        Number of atoms, 1 or 2.
    n_max : int
        Photon-number truncation of the field basis.
    r : float
        Fraction of the cavity output tapped to the counting detector.
    theta : float
        Local-oscillator phase in radians.
    Gamma_bw : float
        Homodyne detector bandwidth in MHz.
    eta : float
        Homodyne coupling efficiency in (0, 1].
    """

    g: float
    kappa: float
    gamma: float
    epsilon: float = 0.0
    N: int = 1
    n_max: int = 3
    r: float = 0.5
    theta: float = 0.0
    Gamma_bw: float = 100.0
    eta: float = 1.0

    def __post_init__(self) -> None:
        if self.g <= 0 or self.kappa <= 0 or self.gamma <= 0 or self.Gamma_bw <= 0:
            raise ParameterError("g, kappa, gamma and Gamma_bw must be positive")
        if self.epsilon < 0:
            raise ParameterError("epsilon must be non-negative")
        if self.N not in (1, 2):
            raise ParameterError(f"N must be 1 or 2, got {self.N}")
        if self.n_max < 2:
            raise ParameterError(f"n_max must be >= 2, got {self.n_max}")
        if not 0.0 <= self.r <= 1.0:
            raise ParameterError(f"r must lie in [0, 1], got {self.r}")
        if not 0.0 < self.eta <= 1.0:
            raise ParameterError(f"eta must lie in (0, 1], got {self.eta}")

    def angular(self) -> "AngularRates":
        """Rates converted to angular units (rad/us)."""
        return AngularRates(
            g=TWO_PI * self.g,
            kappa=TWO_PI * self.kappa,
            gamma=TWO_PI * self.gamma,
            epsilon=TWO_PI * self.epsilon,
            Gamma=TWO_PI * self.Gamma_bw,
        )

    def replace(self, **kwargs) -> "SystemParams":
        """Copy with selected fields replaced."""
        from dataclasses import replace as _replace

        return _replace(self, **kwargs)


@dataclass(frozen=True)
class AngularRates:
    """Angular-frequency view of the rates, rad/us."""

    g: float
    kappa: float
    gamma: float
    epsilon: float
    Gamma: float


@dataclass(frozen=True)
class DerivedParams:
    """Dimensionless numbers of the optical-bistability scaling.

    C1 = g^2/(kappa*gamma), n0 = gamma^2/(8 g^2), C = N*C1,
    C1prime = C1/(1 + gamma/2kappa).  The field variables x, X refer to the
    intracavity steady state and are only populated when the corresponding
    moments are supplied; y, Y characterize the empty-cavity drive.
    """

    C1: float
    n0: float
    C: float
    C1prime: float
    y: float
    Y: float
    x: float | None = None
    X: float | None = None


def derived_params(
    params: SystemParams,
    lam: float | None = None,
    n_bar: float | None = None,
) -> DerivedParams:
    """Cooperativity, saturation photon number and dimensionless fields.

    `lam` and `n_bar` (steady-state <a> and <a'a>) are optional; when given,
    the intracavity x = lam/sqrt(n0) and X = n_bar/n0 are filled in.
    """
    C1 = params.g**2 / (params.kappa * params.gamma)
    n0 = params.gamma**2 / (8.0 * params.g**2)
    y = params.epsilon / (params.kappa * math.sqrt(n0))
    return DerivedParams(
        C1=C1,
        n0=n0,
        C=params.N * C1,
        C1prime=C1 / (1.0 + params.gamma / (2.0 * params.kappa)),
        y=y,
        Y=y * y,
        x=None if lam is None else lam / math.sqrt(n0),
        X=None if n_bar is None else n_bar / n0,
    )
