"""Quantum-trajectory unravelling of the master equation.

Two modes, matching the two detection schemes:

* "homodyne": jump channels for the counting tap (rate 2 kappa r <a'a>) and
  spontaneous emission (gamma <s+ s->), plus the diffusive balanced-homodyne
  channel.  Between jumps the unnormalized state obeys

      d|psi> = [K dt + sqrt(2 kappa (1-r)) a e^{-i theta} dQ] |psi>,
      dQ = sqrt(8 kappa (1-r)) <a_theta>_c dt + dW,

  with K = -iH - kappa a'a - (gamma/2) sum_j s+_j s-_j, and the recorded
  photocurrent low-passes the same measurement record,
  di = -Gamma (i dt - dQ).  First-order Euler-Maruyama with normalization
  each step; the same Wiener increment drives both equations.

* "photocount": r ~ 1, the diffusive term vanishes and the evolution
  between jumps is deterministic, so events are generated by exact
  waiting-time sampling on the eigendecomposed generator K instead of
  time stepping (statistically identical, and removes the dt constraint
  for the very long weak-drive records).

Random numbers: each trajectory owns one numpy Generator seeded by
default_rng((base_seed, trajectory_index)).  Per step the stream is
consumed in a fixed order: the Wiener increment, then one uniform per jump
channel (cavity first, then atoms in index order), then one tie-break
uniform only when several channels fire at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize

from . import hilbert, steady
from .errors import CollapseError, StepSizeError
from .params import SystemParams

PHOTOCOUNT_R = 1.0 - 1e-6
MAX_JUMP_PROBABILITY = 0.01


@dataclass(frozen=True)
class TrajectoryEvent:
    """One detection: kind is "cavity_count" or "spont"; atom is 1-based."""

    kind: str
    time: float
    atom: int | None = None


@dataclass
class TrajectoryRecord:
    """Event log plus uniformly sampled traces.

    `t` holds the sample instants (us); `current` is the homodyne difference
    photocurrent (None in photocount mode); `cond_field` is <A_theta>_c.
    """

    params: SystemParams
    mode: str
    seed: object
    dt_sample: float
    t: np.ndarray
    cond_field: np.ndarray
    current: np.ndarray | None
    events: list[TrajectoryEvent] = field(default_factory=list)

    @property
    def duration(self) -> float:
        return float(self.t[-1]) if len(self.t) else 0.0

    def event_times(self, kind: str) -> np.ndarray:
        return np.array([e.time for e in self.events if e.kind == kind])


class UnravellingOps:
    """Operators, masks and coefficients precomputed for one parameter set."""

    def __init__(self, params: SystemParams, mode: str = "homodyne"):
        if mode not in ("homodyne", "photocount"):
            raise ValueError(f"unknown mode {mode!r}")
        self.params = params
        self.mode = mode
        self.space = hilbert.build_space(params)
        ang = params.angular()
        self.ang = ang
        self.r = PHOTOCOUNT_R if mode == "photocount" else params.r
        self.theta = params.theta

        self.a = hilbert.annihilation(self.space)
        self.n_diag = self.space.photon_numbers().astype(float)
        self.excited_masks = [
            self.space.excited_mask(j).astype(float) for j in range(1, params.N + 1)
        ]
        H = hilbert.hamiltonian(params, self.space)
        decay = ang.kappa * self.n_diag + 0.5 * ang.gamma * sum(self.excited_masks)
        self.K = -1j * H - np.diag(decay).astype(complex)
        self.sm = [hilbert.atomic_ops(self.space, j)[0] for j in range(1, params.N + 1)]

        one_minus_r = 0.0 if mode == "photocount" else (1.0 - self.r)
        self.count_rate = 2.0 * ang.kappa * self.r
        self.diff_coeff = math.sqrt(2.0 * ang.kappa * one_minus_r) * np.exp(-1j * self.theta)
        self.record_coeff = math.sqrt(8.0 * ang.kappa * one_minus_r)
        self.Gamma = ang.Gamma

    def rate_total(self, psi: np.ndarray) -> float:
        pops = np.abs(psi) ** 2
        rate = self.count_rate * float(pops @ self.n_diag)
        for mask in self.excited_masks:
            rate += self.ang.gamma * float(pops @ mask)
        return rate

    def quad_expectation(self, psi: np.ndarray) -> float:
        """<A_theta> = Re(e^{-i theta} <a>) of a normalized state."""
        return float((np.exp(-1j * self.theta) * np.vdot(psi, self.a @ psi)).real)

    def spec_dt(self) -> float:
        """Spec step-size rule: max(g, kappa, gamma, Gamma, eps) * dt = 1e-3."""
        ang = self.ang
        fastest = max(ang.g, ang.kappa, ang.gamma, ang.Gamma, ang.epsilon)
        return 1e-3 / fastest


def jump_probabilities(psi: np.ndarray, ops: UnravellingOps, dt: float) -> dict:
    """Per-channel jump probabilities for one step.

    Keys: "cavity" and ("spont", j).  Any probability above 0.01 signals a
    step-size violation.
    """
    pops = np.abs(psi) ** 2
    probs = {"cavity": ops.count_rate * float(pops @ ops.n_diag) * dt}
    for j, mask in enumerate(ops.excited_masks, start=1):
        probs[("spont", j)] = ops.ang.gamma * float(pops @ mask) * dt
    worst = max(probs.values())
    if worst > MAX_JUMP_PROBABILITY:
        raise StepSizeError(f"jump probability {worst:.3e} > {MAX_JUMP_PROBABILITY}; shrink dt")
    return probs


def apply_collapse(psi: np.ndarray, channel, ops: UnravellingOps) -> np.ndarray:
    """Collapse psi through a channel ("cavity" or ("spont", j)) and renormalize."""
    if channel == "cavity":
        out = ops.a @ psi
    else:
        kind, j = channel
        if kind != "spont":
            raise ValueError(f"unknown channel {channel!r}")
        out = ops.sm[j - 1] @ psi
    norm = np.linalg.norm(out)
    if norm < 1e-12:
        raise CollapseError(f"channel {channel!r} annihilated the state")
    return out / norm


def drift_step(psi: np.ndarray, dW: float, dt: float, ops: UnravellingOps) -> np.ndarray:
    """One Euler-Maruyama update of the unnormalized state, then normalize."""
    u = ops.a @ psi
    a_theta = float((np.exp(-1j * ops.theta) * np.vdot(psi, u)).real)
    record = ops.record_coeff * a_theta * dt + dW
    out = psi + dt * (ops.K @ psi) + (ops.diff_coeff * record) * u
    norm = np.linalg.norm(out)
    if norm < 1e-8:
        raise StepSizeError("state norm collapsed during drift step; shrink dt")
    return out / norm


def photocurrent_step(
    i: float, psi: np.ndarray, dW: float, dt: float, ops: UnravellingOps
) -> float:
    """Advance the homodyne difference current one step.

    i low-passes the measurement record dQ = sqrt(8 kappa (1-r)) <a_theta> dt + dW
    at bandwidth Gamma: di = -Gamma (i dt - dQ).
    """
    u = ops.a @ psi
    a_theta = float((np.exp(-1j * ops.theta) * np.vdot(psi, u)).real)
    dQ = ops.record_coeff * a_theta * dt + dW
    return i + (-ops.Gamma * (i * dt - dQ))


def initial_state(params: SystemParams) -> np.ndarray:
    """Dominant eigenvector of the steady-state density matrix."""
    rho, _ = steady.solve(params, method="direct")
    _, vecs = np.linalg.eigh(rho)
    return vecs[:, -1].astype(complex)


class NoJumpPropagator:
    """Exact exp(K t) action via one eigendecomposition of K."""

    def __init__(self, K: np.ndarray):
        w, V = scipy.linalg.eig(K)
        self.w = w
        self.V = V
        self.Vinv = scipy.linalg.inv(V)
        residual = np.max(np.abs(V @ (w[:, None] * self.Vinv) - K))
        if residual > 1e-8 * max(np.max(np.abs(K)), 1.0):
            raise np.linalg.LinAlgError("no-jump generator eigendecomposition ill-conditioned")

    def coeffs(self, psi: np.ndarray) -> np.ndarray:
        return self.Vinv @ psi

    def state(self, c: np.ndarray, t: float) -> np.ndarray:
        return self.V @ (np.exp(self.w * t) * c)

    def states(self, c: np.ndarray, ts: np.ndarray) -> np.ndarray:
        """Unnormalized states at several times, shape (dim, len(ts))."""
        return self.V @ (np.exp(np.multiply.outer(self.w, np.asarray(ts, float))) * c[:, None])

    def norm2(self, c: np.ndarray, t: float) -> float:
        return float(np.linalg.norm(self.state(c, t)) ** 2)


@dataclass
class _Segment:
    t0: float
    t1: float
    c: np.ndarray  # propagator coefficients of the normalized segment start state


class PhotocountTrajectory:
    """Exact-jump photocounting record (r ~ 1, deterministic between jumps).

    Waiting times are sampled from the monotone survival ||exp(K t) psi||^2
    by bracketing and Brent root finding; the conditioned state is available
    at arbitrary times through the stored segment list.
    """

    def __init__(self, params: SystemParams, seed, psi0: np.ndarray | None = None):
        self.ops = UnravellingOps(params, mode="photocount")
        self.prop = NoJumpPropagator(self.ops.K)
        self.rng = np.random.default_rng(seed)
        psi = initial_state(params) if psi0 is None else psi0 / np.linalg.norm(psi0)
        self.events: list[TrajectoryEvent] = []
        self.segments: list[_Segment] = [_Segment(0.0, math.inf, self.prop.coeffs(psi))]
        self._u = float(self.rng.random())
        self.t = 0.0

    def _waiting_time(self, c: np.ndarray, u: float, horizon: float) -> float | None:
        """First t <= horizon with ||exp(K t) psi||^2 = u, else None.

        The survival norm is monotone non-increasing from 1, so [0, t_hi]
        brackets the root once norm2(t_hi) <= u.
        """
        finite = math.isfinite(horizon)
        if finite and self.prop.norm2(c, horizon) > u:
            return None
        psi0 = self.prop.state(c, 0.0)
        rate0 = self.ops.rate_total(psi0 / np.linalg.norm(psi0))
        if rate0 <= 0.0:
            return None  # dark state, no jump ever
        cap = horizon if finite else 1e30
        t_hi = min(0.1 / rate0, cap)
        while self.prop.norm2(c, t_hi) > u:
            if t_hi >= cap:
                return None
            t_hi = min(2.0 * t_hi, cap)
        return float(
            scipy.optimize.brentq(
                lambda t: self.prop.norm2(c, t) - u, 0.0, t_hi, xtol=1e-14, rtol=1e-13
            )
        )

    def _choose_channel(self, psi: np.ndarray):
        pops = np.abs(psi) ** 2
        rates = [("cavity", self.ops.count_rate * float(pops @ self.ops.n_diag))]
        for j, mask in enumerate(self.ops.excited_masks, start=1):
            rates.append((("spont", j), self.ops.ang.gamma * float(pops @ mask)))
        total = sum(r for _, r in rates)
        pick = float(self.rng.random()) * total
        acc = 0.0
        for channel, r in rates:
            acc += r
            if pick <= acc:
                return channel
        return rates[-1][0]

    def advance_to(self, t_end: float, max_jumps: int = 10_000_000) -> None:
        """Generate jumps (exact times) until t_end."""
        n = 0
        while self.t < t_end:
            seg = self.segments[-1]
            dt_jump = self._waiting_time(seg.c, self._u, t_end - seg.t0)
            if dt_jump is None:
                self.t = t_end
                return
            t_jump = seg.t0 + dt_jump
            psi = self.prop.state(seg.c, dt_jump)
            psi /= np.linalg.norm(psi)
            channel = self._choose_channel(psi)
            psi_new = apply_collapse(psi, channel, self.ops)
            if channel == "cavity":
                self.events.append(TrajectoryEvent("cavity_count", t_jump))
            else:
                self.events.append(TrajectoryEvent("spont", t_jump, atom=channel[1]))
            seg.t1 = t_jump
            self.segments.append(_Segment(t_jump, math.inf, self.prop.coeffs(psi_new)))
            self._u = float(self.rng.random())
            self.t = t_jump
            n += 1
            if n > max_jumps:
                raise RuntimeError("jump budget exceeded")

    def advance_until_counts(self, kind: str, n_target: int, max_jumps: int = 10_000_000) -> None:
        """Generate jumps until n_target events of `kind` were recorded."""
        have = sum(1 for e in self.events if e.kind == kind)
        while have < n_target:
            seg = self.segments[-1]
            dt_jump = self._waiting_time(seg.c, self._u, math.inf)
            if dt_jump is None:
                raise RuntimeError("no further jumps possible (dark state)")
            t_jump = seg.t0 + dt_jump
            psi = self.prop.state(seg.c, dt_jump)
            psi /= np.linalg.norm(psi)
            channel = self._choose_channel(psi)
            psi_new = apply_collapse(psi, channel, self.ops)
            if channel == "cavity":
                self.events.append(TrajectoryEvent("cavity_count", t_jump))
                if kind == "cavity_count":
                    have += 1
            else:
                self.events.append(TrajectoryEvent("spont", t_jump, atom=channel[1]))
                if kind == "spont":
                    have += 1
            seg.t1 = t_jump
            self.segments.append(_Segment(t_jump, math.inf, self.prop.coeffs(psi_new)))
            self._u = float(self.rng.random())
            self.t = t_jump
            if len(self.events) > max_jumps:
                raise RuntimeError("jump budget exceeded")

    def field_at(self, times: np.ndarray) -> np.ndarray:
        """Conditioned <A_theta>_c at arbitrary times within the generated span.

        At a jump instant the post-collapse segment applies (right limit).
        """
        times = np.asarray(times, dtype=float)
        starts = np.array([s.t0 for s in self.segments])
        idx = np.searchsorted(starts, times, side="right") - 1
        out = np.empty(len(times))
        e_m_theta = np.exp(-1j * self.ops.theta)
        for k in np.unique(idx):
            sel = idx == k
            seg = self.segments[k]
            psis = self.prop.states(seg.c, times[sel] - seg.t0)
            psis /= np.linalg.norm(psis, axis=0, keepdims=True)
            u = self.ops.a @ psis
            out[sel] = (e_m_theta * np.sum(psis.conj() * u, axis=0)).real
        return out


def run_trajectory(
    params: SystemParams,
    seed,
    duration: float,
    mode: str = "homodyne",
    dt: float | None = None,
    dt_sample: float | None = None,
    burn_in: float | None = None,
) -> TrajectoryRecord:
    """Simulate one record of the chosen unravelling.

    The recorded grid starts after `burn_in` (default 10/kappa for homodyne,
    0 for photocount; the initial state is the dominant eigenvector of the
    steady state).  dt defaults to the 1e-3/max-rate rule and is snapped so
    an integer number of steps fits each sample interval.
    """
    ops = UnravellingOps(params, mode=mode)
    if dt_sample is None:
        dt_sample = 1.0 / (10.0 * ops.Gamma)
    if duration < 0:
        raise ValueError("duration must be >= 0")

    if mode == "photocount":
        traj = PhotocountTrajectory(params, seed)
        traj.advance_to(duration)
        n_samp = int(math.floor(duration / dt_sample)) + 1 if duration > 0 else 1
        t = dt_sample * np.arange(n_samp)
        cond = traj.field_at(t) if duration > 0 else traj.field_at(np.array([0.0]))
        return TrajectoryRecord(
            params=params,
            mode=mode,
            seed=seed,
            dt_sample=dt_sample,
            t=t,
            cond_field=cond,
            current=None,
            events=list(traj.events),
        )

    if dt is None:
        dt = ops.spec_dt()
    m = max(1, int(math.ceil(dt_sample / dt)))
    dt = dt_sample / m
    if burn_in is None:
        burn_in = 10.0 / ops.ang.kappa

    rng = np.random.default_rng(seed)
    psi = initial_state(params)
    # start the current filter at its deterministic fixed point
    i_cur = ops.record_coeff * ops.quad_expectation(psi)

    n_burn = int(round(burn_in / dt))
    n_samp = int(math.floor(duration / dt_sample)) + 1
    t_grid = dt_sample * np.arange(n_samp)
    current = np.empty(n_samp)
    cond = np.empty(n_samp)
    events: list[TrajectoryEvent] = []
    sqrt_dt = math.sqrt(dt)

    k_sample = 0
    total_steps = n_burn + (n_samp - 1) * m
    for step in range(total_steps + 1):
        recording = step >= n_burn
        if recording and (step - n_burn) % m == 0:
            u = ops.a @ psi
            cond[k_sample] = (np.exp(-1j * ops.theta) * np.vdot(psi, u)).real
            current[k_sample] = i_cur
            k_sample += 1
        if step == total_steps:
            break
        dW = float(rng.standard_normal()) * sqrt_dt
        probs = jump_probabilities(psi, ops, dt)
        draws = {ch: float(rng.random()) for ch in probs}
        fired = [ch for ch, p in probs.items() if draws[ch] < p]
        i_cur = photocurrent_step(i_cur, psi, dW, dt, ops)
        if fired:
            if len(fired) > 1:
                weights = np.array([probs[ch] for ch in fired])
                pick = float(rng.random()) * weights.sum()
                channel = fired[int(np.searchsorted(np.cumsum(weights), pick))]
            else:
                channel = fired[0]
            psi = apply_collapse(psi, channel, ops)
            if recording:
                t_now = (step - n_burn) * dt
                if channel == "cavity":
                    events.append(TrajectoryEvent("cavity_count", t_now))
                else:
                    events.append(TrajectoryEvent("spont", t_now, atom=channel[1]))
        else:
            psi = drift_step(psi, dW, dt, ops)

    return TrajectoryRecord(
        params=params,
        mode=mode,
        seed=seed,
        dt_sample=dt_sample,
        t=t_grid,
        cond_field=cond,
        current=current,
        events=events,
    )
