"""Conditional field dynamics and the spectrum of squeezing for strongly
coupled cavity QED, by master-equation regression and by quantum-trajectory
unravelling of the conditional homodyne measurement."""

from .params import AngularRates, DerivedParams, SystemParams, derived_params
from .hilbert import (
    HilbertSpace,
    annihilation,
    atomic_ops,
    build_space,
    collective_ops,
    hamiltonian,
    liouvillian,
    quadrature,
)
from .steady import (
    SteadyMoments,
    calibrate_drive,
    converge_nmax,
    density_diagnostics,
    moments,
    solve,
    steady_state,
)
from .weakfield import WeakFieldConstants, constants, emission_ratio, equilibrium_state, waveform
from .qrt import (
    CorrelationSeries,
    LiouvillePropagator,
    SpectrumSeries,
    default_tau_grid,
    dominant_frequency,
    fwhm_zero_peak,
    h_from_qrt,
    regression_field,
    spectrum,
    two_time_corr,
)
from .trajectory import (
    PhotocountTrajectory,
    TrajectoryEvent,
    TrajectoryRecord,
    UnravellingOps,
    apply_collapse,
    drift_step,
    jump_probabilities,
    photocurrent_step,
    run_trajectory,
)
from .ensemble import (
    EmissionStats,
    TriggeredBatch,
    emission_statistics,
    post_click_regression,
    triggered_homodyne_batch,
)
from .correlator import (
    AveragedCurrent,
    StartClickSet,
    average_current,
    collect_starts,
    deconvolve_response,
    h_from_current,
    pooled_shot_noise_fit,
    shot_noise_amplitude,
    shot_noise_check,
    symmetrize,
    symmetrize_and_transform,
    truncate,
)

__version__ = "0.1.0"
