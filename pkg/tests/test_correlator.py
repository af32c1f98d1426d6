import math

import numpy as np
import pytest

from cqed import correlator, trajectory as tj
from cqed.errors import NoStartsError
from cqed.params import SystemParams
from cqed.qrt import CorrelationSeries
from cqed.trajectory import TrajectoryEvent, TrajectoryRecord


def make_record(params, t, current, events=()):
    return TrajectoryRecord(
        params=params,
        mode="homodyne",
        seed=0,
        dt_sample=t[1] - t[0],
        t=t,
        cond_field=np.zeros_like(t),
        current=current,
        events=list(events),
    )


@pytest.fixture
def flat_record(fig5_params):
    t = np.arange(0, 10.0, 0.01)
    events = [TrajectoryEvent("cavity_count", 5.0)]
    return make_record(fig5_params, t, np.full(len(t), 3.3), events)


class TestCollectStarts:
    def test_no_cavity_events_raises(self, fig5_params):
        t = np.arange(0, 1.0, 0.01)
        rec = make_record(fig5_params, t, np.zeros(len(t)))
        with pytest.raises(NoStartsError):
            correlator.collect_starts(rec, tau_max=0.1)

    def test_single_midpoint_event(self, flat_record):
        ss = correlator.collect_starts(flat_record, tau_max=1.0)
        assert ss.n_starts == 1
        assert ss.times[0] == 5.0

    def test_edge_events_excluded(self, fig5_params):
        t = np.arange(0, 10.0, 0.01)
        events = [
            TrajectoryEvent("cavity_count", 0.5),
            TrajectoryEvent("cavity_count", 5.0),
            TrajectoryEvent("cavity_count", 9.8),
        ]
        rec = make_record(fig5_params, t, np.zeros(len(t)), events)
        ss = correlator.collect_starts(rec, tau_max=1.0)
        assert list(ss.times) == [5.0]


class TestAverageCurrent:
    def test_constant_current_passthrough(self, flat_record):
        ss = correlator.collect_starts(flat_record, tau_max=1.0)
        tau = np.arange(-1.0, 1.0 + 1e-9, 0.01)
        avg = correlator.average_current([flat_record], [ss], tau)
        assert np.allclose(avg.H, 3.3)
        assert avg.n_starts == 1

    def test_two_starts_pointwise_mean(self, fig5_params):
        t = np.arange(0, 20.0, 0.01)
        cur = np.sin(t)
        rec = make_record(
            fig5_params,
            t,
            cur,
            [TrajectoryEvent("cavity_count", 6.0), TrajectoryEvent("cavity_count", 12.0)],
        )
        ss = correlator.collect_starts(rec, tau_max=2.0)
        tau = np.arange(-2.0, 2.0 + 1e-9, 0.01)
        avg = correlator.average_current([rec], [ss], tau)
        expected = 0.5 * (np.sin(6.0 + tau) + np.sin(12.0 + tau))
        assert np.max(np.abs(avg.H - expected)) < 1e-9

    def test_grid_beyond_context_rejected(self, flat_record):
        ss = correlator.collect_starts(flat_record, tau_max=1.0)
        tau = np.arange(-6.0, 6.0, 0.01)
        with pytest.raises(ValueError):
            correlator.average_current([flat_record], [ss], tau)

    def test_weighted_mean(self, fig5_params):
        t = np.arange(0, 20.0, 0.01)
        cur = t.copy()
        rec = make_record(
            fig5_params,
            t,
            cur,
            [TrajectoryEvent("cavity_count", 6.0), TrajectoryEvent("cavity_count", 12.0)],
        )
        ss = correlator.collect_starts(rec, tau_max=1.0)
        tau = np.array([0.0])
        avg = correlator.average_current([rec], [ss], tau, weights=[np.array([3.0, 1.0])])
        assert avg.H[0] == pytest.approx((3 * 6.0 + 12.0) / 4.0)


class TestConversion:
    def test_steady_current_gives_unity(self, fig5_params):
        lam = 4.49e-4
        scale = lam * math.sqrt(8 * fig5_params.angular().kappa * (1 - fig5_params.r))
        avg = correlator.AveragedCurrent(
            tau=np.linspace(-1, 1, 11), H=np.full(11, scale), n_starts=100
        )
        h = correlator.h_from_current(avg, lam, fig5_params)
        assert np.allclose(h.h, 1.0)
        assert h.source == "trajectory"

    def test_nonpositive_lam_rejected(self, fig5_params):
        avg = correlator.AveragedCurrent(tau=np.zeros(3), H=np.zeros(3), n_starts=1)
        with pytest.raises(ValueError):
            correlator.h_from_current(avg, 0.0, fig5_params)

    def test_small_bandwidth_warns(self, fig5_params):
        p = fig5_params.replace(Gamma_bw=10.0)
        avg = correlator.AveragedCurrent(
            tau=np.linspace(-1, 1, 11), H=np.ones(11), n_starts=1
        )
        with pytest.warns(UserWarning):
            correlator.h_from_current(avg, 1e-3, p)


class TestDeconvolution:
    def test_recovers_step_response(self, fig5_params):
        # feed a known record through the exact discrete filter and invert it
        p = fig5_params
        Gamma = p.angular().Gamma
        dt_s = 1.0 / (10.0 * Gamma)
        m = 8
        dt = dt_s / m
        n = 600
        t_fine = dt * np.arange(n * m)
        signal = 0.7 + 0.5 * np.cos(37.8 * 2 * np.pi * t_fine) * np.exp(-20 * t_fine)
        i = np.empty(n)
        cur = signal[0]
        k = 0
        for j, s in enumerate(signal):
            if j % m == 0:
                i[k] = cur
                k += 1
            cur = cur + (-Gamma) * (cur * dt - s * dt)
        tau = dt_s * (np.arange(n) - n // 2)
        avg = correlator.AveragedCurrent(tau=tau, H=i, n_starts=1)
        rec = correlator.deconvolve_response(avg, p, dt)
        target = np.interp(rec.tau, tau, signal[::m])
        # the filtered current lags by ~1/Gamma; the recovered record does not
        assert np.max(np.abs(rec.H - target)) < 0.02 * np.max(np.abs(signal))
        lag_err = np.max(np.abs(i - signal[::m]))
        assert lag_err > 5 * np.max(np.abs(rec.H - target))


class TestSymmetrize:
    def test_symmetric_input_unchanged(self):
        tau = np.linspace(-1, 1, 21)
        h = 1.0 + np.cos(3 * tau)
        s = CorrelationSeries(tau=tau, h=h, lam=1.0, n_inc=0.0, source="qrt")
        out = correlator.symmetrize(s)
        assert np.allclose(out.h, h)

    def test_antisymmetric_part_removed(self):
        tau = np.linspace(-1, 1, 21)
        h = 1.0 + np.sin(3 * tau)
        s = CorrelationSeries(tau=tau, h=h, lam=1.0, n_inc=0.0, source="qrt")
        out = correlator.symmetrize(s)
        assert np.allclose(out.h, 1.0)

    def test_constant_current_transforms_to_null_spectrum(self, fig5_params):
        lam = 4.49e-4
        scale = lam * math.sqrt(8 * fig5_params.angular().kappa * (1 - fig5_params.r))
        tau = np.linspace(-1, 1, 2001)
        avg = correlator.AveragedCurrent(tau=tau, H=np.full(len(tau), scale), n_starts=10)
        h = correlator.h_from_current(avg, lam, fig5_params)
        S = correlator.symmetrize_and_transform(h, F=1.0, nu=np.linspace(0, 40, 41))
        assert np.max(np.abs(S.S)) < 1e-12

    def test_truncate(self):
        tau = np.linspace(-2, 2, 41)
        s = CorrelationSeries(tau=tau, h=np.ones(41), lam=1.0, n_inc=0.0, source="qrt")
        out = correlator.truncate(s, 1.0)
        assert out.tau.min() == pytest.approx(-1.0)
        assert out.tau.max() == pytest.approx(1.0)


class TestShotNoise:
    def test_noiseless_series_has_tiny_amplitude(self, fig5_params):
        tau = np.arange(-0.6, 0.6 + 1e-12, 1e-3)
        h = CorrelationSeries(
            tau=tau, h=np.ones(len(tau)), lam=1e-3, n_inc=0.0, source="qrt"
        )
        fit = correlator.shot_noise_check(h, fig5_params)
        assert abs(fit.amplitude) < 1e-20

    def test_synthetic_ou_noise_fit(self, fig5_params):
        # h-1 = OU noise with known rate and variance in the quiet band
        p = fig5_params
        Gamma = p.angular().Gamma
        dt_s = 1.0 / (10.0 * Gamma)
        n_side = 4000
        tau = dt_s * np.arange(-n_side, n_side + 1)
        rng = np.random.default_rng(31)
        var = 25.0
        alpha = math.exp(-Gamma * dt_s)
        noise = np.empty(len(tau))
        noise[0] = rng.standard_normal() * math.sqrt(var)
        for k in range(1, len(tau)):
            noise[k] = alpha * noise[k - 1] + math.sqrt(var * (1 - alpha**2)) * rng.standard_normal()
        h = CorrelationSeries(
            tau=tau, h=1.0 + noise, lam=1e-3, n_inc=0.0, source="trajectory"
        )
        fit = correlator.shot_noise_check(h, p)
        assert fit.rate == pytest.approx(Gamma, rel=0.10)
        assert fit.amplitude == pytest.approx(var, rel=0.25)

    def test_expected_amplitude_scalings(self, fig5_params):
        a1 = correlator.shot_noise_amplitude(fig5_params, 1000, 1e-3)
        assert correlator.shot_noise_amplitude(fig5_params, 2000, 1e-3) == pytest.approx(a1 / 2)
        assert correlator.shot_noise_amplitude(fig5_params, 1000, 2e-3) == pytest.approx(a1 / 4)
