import numpy as np
import pytest

from cqed.params import SystemParams

# Calibrated drive amplitudes (MHz) for the standard operating points; frozen
# from steady.calibrate_drive and re-verified in test_steady.py.
EPS_FIG5 = 0.43518400  # N=1, X = 2.99e-4
EPS_WEAK_1 = 0.02710446  # N=1, X = 1e-6
EPS_WEAK_2 = 0.03834294  # N=2, X = 1e-6


@pytest.fixture(scope="session")
def fig5_params() -> SystemParams:
    """N=1 weak-drive operating point of the low-intensity scenario."""
    return SystemParams(
        g=38.0, kappa=8.7, gamma=3.0, epsilon=EPS_FIG5, N=1, n_max=3, r=0.5, Gamma_bw=100.0
    )


@pytest.fixture(scope="session")
def weak1_params() -> SystemParams:
    """N=1 at X = 1e-6, deep in the weak-field regime."""
    return SystemParams(
        g=38.0, kappa=8.7, gamma=3.0, epsilon=EPS_WEAK_1, N=1, n_max=3, r=0.5, Gamma_bw=100.0
    )


@pytest.fixture(scope="session")
def weak2_params() -> SystemParams:
    """N=2 (g scaled by 1/sqrt2 to keep g sqrt N) at X = 1e-6."""
    return SystemParams(
        g=38.0 / np.sqrt(2.0),
        kappa=8.7,
        gamma=3.0,
        epsilon=EPS_WEAK_2,
        N=2,
        n_max=3,
        r=0.5,
        Gamma_bw=100.0,
    )
