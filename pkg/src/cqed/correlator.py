"""From photocurrent records to the wave-particle correlation h_theta(tau).

Start clicks are cavity counts with full +/- tau_max context; the averaged
photocurrent around them converts to h through the large-bandwidth relation
h = H / (<a> sqrt(8 kappa (1-r))).  The residual shot noise left after
averaging N_s starts is characterized by an exponential autocorrelation fit
in the signal-free tail.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .ensemble import TriggeredBatch
from .errors import NoStartsError
from .params import SystemParams
from .qrt import CorrelationSeries, SpectrumSeries, spectrum
from .trajectory import TrajectoryRecord


@dataclass(frozen=True)
class StartClickSet:
    """Trigger times: cavity counts at least tau_max away from the record edges."""

    times: np.ndarray
    tau_max: float

    @property
    def n_starts(self) -> int:
        return len(self.times)


@dataclass(frozen=True)
class AveragedCurrent:
    """Mean photocurrent around start clicks on a symmetric tau grid."""

    tau: np.ndarray
    H: np.ndarray
    n_starts: int
    stderr: np.ndarray | None = None


def collect_starts(record: TrajectoryRecord, tau_max: float) -> StartClickSet:
    """Every cavity count with full context; overlapping windows are allowed."""
    if record.current is None:
        raise ValueError("record has no photocurrent (photocount mode)")
    t_lo = record.t[0] + tau_max
    t_hi = record.t[-1] - tau_max
    times = np.array(
        [e.time for e in record.events if e.kind == "cavity_count" and t_lo <= e.time <= t_hi]
    )
    if len(times) == 0:
        raise NoStartsError(f"no cavity counts with +/-{tau_max} us context")
    return StartClickSet(times=times, tau_max=tau_max)


def average_current(
    records: list[TrajectoryRecord],
    starts: list[StartClickSet],
    tau_grid: np.ndarray,
    weights: list[np.ndarray] | None = None,
) -> AveragedCurrent:
    """H(tau) = (1/N_s) sum_j i(t_j + tau), nearest-sample lookup.

    `weights` (optional, one array per record) turns the mean into a
    weighted mean; the unweighted default is the plain click average.
    """
    tau_grid = np.asarray(tau_grid, dtype=float)
    acc = np.zeros(len(tau_grid))
    acc2 = np.zeros(len(tau_grid))
    w_tot = 0.0
    w2_tot = 0.0
    for rec_idx, (record, ss) in enumerate(zip(records, starts)):
        dt_s = record.dt_sample
        t0 = record.t[0]
        w_rec = None if weights is None else np.asarray(weights[rec_idx], dtype=float)
        for k, tj in enumerate(ss.times):
            idx = np.rint((tj + tau_grid - t0) / dt_s).astype(int)
            if idx.min() < 0 or idx.max() >= len(record.t):
                raise ValueError("tau grid extends beyond the recorded context")
            seg = record.current[idx]
            w = 1.0 if w_rec is None else float(w_rec[k])
            acc += w * seg
            acc2 += w * seg**2
            w_tot += w
            w2_tot += w * w
    H = acc / w_tot
    var_pop = np.maximum(acc2 / w_tot - H**2, 0.0)
    stderr = np.sqrt(var_pop * w2_tot) / w_tot
    n_starts = sum(s.n_starts for s in starts)
    return AveragedCurrent(tau=tau_grid, H=H, n_starts=n_starts, stderr=stderr)


def from_triggered_batch(batch: TriggeredBatch) -> AveragedCurrent:
    """Adapt the block-ensemble result to the averaged-current interface."""
    return AveragedCurrent(
        tau=batch.tau, H=batch.H, n_starts=batch.n_starts, stderr=batch.stderr
    )


def deconvolve_response(
    avg: AveragedCurrent, params: SystemParams, dt: float
) -> AveragedCurrent:
    """Invert the detector's one-pole response, recovering the averaged record.

    The recorded current is the exact discrete low-pass
    i_{k+1} = a^m i_k + Gamma sum_j a^{m-1-j} (s dt + dW), a = 1 - Gamma dt,
    so the bin-averaged measurement record follows from consecutive samples,
    R_k = (i_{k+1} - a^m i_k)/(1 - a^m), with noise that is white across
    bins.  This removes the causal-filter lag that otherwise skews h around
    tau = 0 and attenuates it by Gamma^2/(Gamma^2 + omega^2) in the
    spectrum (13% at the vacuum-Rabi sideband for the Fig.-5 bandwidth);
    only the instrument constants enter, keeping the trajectory route
    independent of the regression-theorem result.
    """
    Gamma = params.angular().Gamma
    dt_s = avg.tau[1] - avg.tau[0]
    m = int(round(dt_s / dt))
    alpha_m = (1.0 - Gamma * dt) ** m
    half = (avg.H[1:] - alpha_m * avg.H[:-1]) / (1.0 - alpha_m)  # bin midpoints
    R = 0.5 * (half[1:] + half[:-1])  # back onto the sample grid, edges dropped
    stderr = None
    if avg.stderr is not None:
        se_half = (
            np.sqrt(avg.stderr[1:] ** 2 + alpha_m**2 * avg.stderr[:-1] ** 2)
            / (1.0 - alpha_m)
        )
        stderr = 0.5 * np.sqrt(se_half[1:] ** 2 + se_half[:-1] ** 2)
    return AveragedCurrent(tau=avg.tau[1:-1], H=R, n_starts=avg.n_starts, stderr=stderr)


def h_from_current(
    avg: AveragedCurrent, lam: float, params: SystemParams
) -> CorrelationSeries:
    """Convert the averaged current to h via Eq.-25 scaling (eta fixed to 1)."""
    if not lam > 0:
        raise ValueError(f"conversion needs lam > 0, got {lam}")
    ang = params.angular()
    if ang.Gamma < 5.0 * max(ang.kappa, ang.g):
        warnings.warn(
            "detector bandwidth is not large compared to kappa and g; "
            "the large-bandwidth conversion to h is approximate",
            stacklevel=2,
        )
    scale = lam * math.sqrt(8.0 * ang.kappa * (1.0 - params.r))
    stderr = None if avg.stderr is None else avg.stderr / scale
    return CorrelationSeries(
        tau=avg.tau,
        h=avg.H / scale,
        lam=lam,
        n_inc=0.0,
        source="trajectory",
        stderr=stderr,
    )


@dataclass(frozen=True)
class ShotNoiseFit:
    """Exponential fit of the residual shot-noise autocorrelation."""

    rate: float  # decay rate of the autocorrelation, rad/us
    amplitude: float  # variance at zero lag
    n_lags: int
    band: tuple[float, float]


def shot_noise_check(
    h: CorrelationSeries,
    params: SystemParams,
    band_start_env: float = 10.0,
) -> ShotNoiseFit:
    """Fit A exp(-rate lag) to the autocorrelation of h-1 in the quiet tail.

    The band is |tau| beyond `band_start_env` envelope time constants of the
    regression; both tails contribute.  Lags up to ~4 detector correlation
    times enter the fit.
    """
    ang = params.angular()
    env_rate = 0.5 * (ang.kappa + ang.gamma / 2.0)
    t_band = band_start_env / env_rate
    dt_s = h.tau[1] - h.tau[0]
    if h.tau[-1] < t_band + 10.0 * dt_s:
        raise ValueError("tau grid has no signal-free band beyond the regression")
    max_lag = int(round(4.0 / ang.Gamma / dt_s))
    max_lag = max(max_lag, 4)

    def tail_autocorr(x: np.ndarray) -> np.ndarray:
        x = x - x.mean()
        return np.array(
            [np.mean(x[: len(x) - l] * x[l:]) for l in range(max_lag + 1)]
        )

    x_neg = (h.h - 1.0)[h.tau <= -t_band]
    x_pos = (h.h - 1.0)[h.tau >= t_band]
    corr = 0.5 * (tail_autocorr(x_neg) + tail_autocorr(x_pos))
    lags = dt_s * np.arange(max_lag + 1)

    # the constant term absorbs the tail-mean subtraction offset
    def resid(p):
        return p[0] * np.exp(-p[1] * lags) + p[2] - corr

    p0 = np.array([max(corr[0], 1e-300), ang.Gamma, 0.0])
    fit = scipy.optimize.least_squares(resid, p0, max_nfev=2000)
    return ShotNoiseFit(
        rate=float(fit.x[1]),
        amplitude=float(fit.x[0]),
        n_lags=max_lag + 1,
        band=(t_band, float(h.tau[-1])),
    )


def pooled_shot_noise_fit(batch: TriggeredBatch, params: SystemParams) -> ShotNoiseFit:
    """Shot-noise rate and amplitude from per-start pooled band statistics.

    The batch accumulates the per-window current-noise autocovariance over
    the signal-free band; pooling across all starts makes the rate estimate
    sharp, where a fit to the single averaged h-1 curve is limited to the
    ~band_length*Gamma independent noise samples it contains.  The returned
    amplitude is the zero-lag variance of the residual in h units,
    c_pop(0) * sum(w^2)/(sum w)^2 / (lam sqrt(8 kappa (1-r)))^2.
    """
    if batch.noise_autocorr is None:
        raise ValueError("batch carries no pooled noise statistics (band too short)")
    lags = batch.noise_lags
    c = batch.noise_autocorr
    ang = params.angular()

    # the constant term absorbs the per-window band-mean subtraction offset
    def resid(p):
        return p[0] * np.exp(-p[1] * lags) + p[2] - c

    fit = scipy.optimize.least_squares(
        resid, np.array([c[0], ang.Gamma, 0.0]), max_nfev=2000
    )
    scale2 = (batch.lam * math.sqrt(8.0 * ang.kappa * (1.0 - params.r))) ** 2
    amp = float(fit.x[0]) * batch.weight_sq_sum / batch.weight_sum**2 / scale2
    return ShotNoiseFit(
        rate=float(fit.x[1]),
        amplitude=amp,
        n_lags=len(lags),
        band=(float(lags[0]), float(lags[-1])),
    )


def shot_noise_amplitude(params: SystemParams, n_starts: int, lam: float) -> float:
    """Expected zero-lag shot-noise variance of h after N_s starts.

    Gamma/(16 eta N_s |<b>|^2) with the tapped-output normalization
    |<b>|^2 = kappa (1-r) lam^2, the reading consistent with the current and
    conversion equations (see the decisions ledger).
    """
    ang = params.angular()
    return ang.Gamma / (
        16.0 * params.eta * n_starts * ang.kappa * (1.0 - params.r) * lam**2
    )


def symmetrize(h: CorrelationSeries) -> CorrelationSeries:
    """hbar(tau) = (h(tau) + h(-tau))/2 on the same grid."""
    return CorrelationSeries(
        tau=h.tau,
        h=0.5 * (h.h + h.h[::-1]),
        lam=h.lam,
        n_inc=h.n_inc,
        source=h.source,
        stderr=None if h.stderr is None else h.stderr / math.sqrt(2.0),
    )


def truncate(h: CorrelationSeries, tau_cut: float) -> CorrelationSeries:
    """Restrict the series to |tau| <= tau_cut (noise control in transforms)."""
    sel = np.abs(h.tau) <= tau_cut + 1e-15
    return CorrelationSeries(
        tau=h.tau[sel],
        h=h.h[sel],
        lam=h.lam,
        n_inc=h.n_inc,
        source=h.source,
        stderr=None if h.stderr is None else h.stderr[sel],
    )


def symmetrize_and_transform(
    h: CorrelationSeries, F: float, nu: np.ndarray, tail_tol: float = 1e-4
) -> SpectrumSeries:
    """Symmetrize h and hand off to the cosine transform with flux F."""
    return spectrum(symmetrize(h), F, nu, tail_tol=tail_tol)
