"""Open-system evolution of a schedule: quantum jumps and a Lindblad oracle.

Photon loss is the only decay channel (zero temperature): collapse
operator sqrt(kappa) a with kappa = 1/tau, tau the photon lifetime, so
<n> decays as exp(-t/tau).  Atomic decay is neglected (circular states).

The jump unraveling evolves the unnormalized state under
K = H - (i/2) kappa a^dag a, exactly per segment (segments have constant
Hamiltonians), monitors the squared norm on substeps of at most dt_max,
and fires a jump when the norm crosses a uniform threshold; the crossing
time is refined by bisection to dt_max/100.

Randomness contract: one root seed; the stream for trajectory k of basis
input b in grid cell c is the counter-based Philox block with counter
(0, k, b, c).  Streams are independent of execution order, so results
are bit-reproducible no matter how trajectories are scheduled.  Each
trajectory first draws its per-segment jitter factors (one truncated
Gaussian per jittered segment, in segment order), then jump thresholds
as needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.linalg

from .model import annihilation, number_operator, rge_block, rig_block
from .protocol import Schedule, Segment, segment_drift, segment_unitary
from .qmath import (CompositeSpace, DensityMatrix, StateVector, embed_operator)

#: target phase advance per RK4 step; keeps the integrator error ~1e-10
_RK4_MAX_PHASE_STEP = 5e-3


@dataclass(frozen=True)
class NoiseParams:
    """Decoherence and imprecision settings for trajectory runs.

    tau      cavity photon lifetime in seconds (math.inf for lossless)
    epsilon  relative timing/angle error, std of the per-segment Gaussian
    n_traj   trajectories per initial state
    seed     64-bit root seed
    dt_max   norm-monitoring substep bound; defaults to tau/100
    """

    tau: float = 1e-3
    epsilon: float = 0.03
    n_traj: int = 2000
    seed: int = 42
    dt_max: Optional[float] = None

    def __post_init__(self):
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not 0.0 <= self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in [0, 1), got {self.epsilon}")
        if self.n_traj < 1:
            raise ValueError("n_traj must be positive")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.dt_max is not None:
            if not self.dt_max > 0:
                raise ValueError("dt_max must be positive")
            if math.isfinite(self.tau) and self.dt_max > self.tau / 100.0:
                raise ValueError("dt_max must not exceed tau/100")

    @property
    def kappa(self) -> float:
        return 0.0 if math.isinf(self.tau) else 1.0 / self.tau

    def effective_dt_max(self, fallback_scale: float) -> float:
        if self.dt_max is not None:
            return self.dt_max
        if math.isfinite(self.tau):
            return self.tau / 100.0
        # lossless: substeps only matter for norm monitoring, which is moot
        return fallback_scale


@dataclass(frozen=True)
class TrajectoryResult:
    """One quantum-jump realization of a schedule."""

    final_state: StateVector
    jump_times: tuple[float, ...]
    perturbed_durations: tuple[float, ...]


def substream(seed: int, *, traj: int = 0, basis_input: int = 0,
              cell: int = 0) -> np.random.Generator:
    """Deterministic counter-based stream for one trajectory."""
    bitgen = np.random.Philox(key=np.uint64(seed),
                              counter=[0, int(traj), int(basis_input), int(cell)])
    return np.random.Generator(bitgen)


class _StreamFactory:
    """Streams bit-identical to ``substream`` without per-call entropy setup.

    Reuses a single Philox instance, resetting its counter block per call;
    equality with fresh construction is asserted in the test suite.
    """

    def __init__(self, seed: int):
        self._philox = np.random.Philox(key=np.uint64(seed))
        self._template = self._philox.state

    def stream(self, *, traj: int = 0, basis_input: int = 0,
               cell: int = 0) -> np.random.Generator:
        state = self._template
        state["state"]["counter"] = np.array(
            [0, traj, basis_input, cell], dtype=np.uint64)
        state["buffer_pos"] = 4  # mark the output buffer exhausted
        self._philox.state = state
        return np.random.Generator(self._philox)


def jitter_factors(schedule: Schedule, epsilon: float,
                   rng: np.random.Generator) -> np.ndarray:
    """Per-segment scale factors 1 + eta, eta ~ N(0, epsilon^2) truncated > -1.

    Segments with jitter_applies=False get exactly 1.0; zero-duration
    segments use their factor as a rotation-angle scale instead.
    """
    factors = np.ones(len(schedule.segments))
    for k, seg in enumerate(schedule.segments):
        if not seg.jitter_applies:
            continue
        eta = rng.standard_normal() * epsilon
        while eta <= -1.0:
            eta = rng.standard_normal() * epsilon
        factors[k] = 1.0 + eta
    return factors


def jitter_durations(schedule: Schedule, epsilon: float,
                     rng: np.random.Generator) -> np.ndarray:
    """Perturbed segment durations T(1 + eta); zero-duration segments stay 0."""
    nominal = np.array([seg.nominal_duration for seg in schedule.segments])
    return nominal * jitter_factors(schedule, epsilon, rng)


class _PulseEvolver:
    """Instantaneous classical pulse, applied on the atom's tensor axis."""

    def __init__(self, schedule: Schedule, seg: Segment):
        self._seg = seg
        dims = schedule.space.subsystem_dims
        self._axis = seg.atom
        self.lossy = False
        # group the tensor axes around the pulsed one for a broadcast matmul
        self._lead = math.prod(dims[:self._axis])
        self._dim = dims[self._axis]
        self._trail = math.prod(dims[self._axis + 1:])

    def _block(self, angle_scale: float) -> np.ndarray:
        seg = self._seg
        if seg.pulse == "rig":
            return rig_block(math.pi * angle_scale)
        return rge_block(seg.theta * angle_scale, seg.phi)

    def apply(self, psi: np.ndarray, angle_scale: float) -> np.ndarray:
        u3 = self._block(angle_scale)
        tensor = psi.reshape(self._lead, self._dim, self._trail)
        return (u3 @ tensor).reshape(-1)


class _DriftEvolver:
    """Exact evolution under K = H - (i/2) kappa N for one timed segment.

    Diagonalizes K once; arbitrary-time evolution and vectorized norm
    monitoring are then elementwise operations in the eigenbasis.  Falls
    back to dense expm if the eigendecomposition reconstructs poorly
    (never the case away from exceptional points, but cheap insurance).
    """

    def __init__(self, h: np.ndarray, kappa: float, n_cav: np.ndarray):
        self.kappa = kappa
        self.lossy = kappa > 0.0
        if not self.lossy:
            w, v = np.linalg.eigh(h)
            self._w = w.astype(np.complex128)
            self._v = v
            self._vinv = v.conj().T
            self._vt = v.T.copy()
            self._k = h
            self._exact = True
            return
        k_op = h - 0.5j * kappa * n_cav
        self._k = k_op
        w, v = np.linalg.eig(k_op)
        vinv = np.linalg.inv(v)
        recon_err = np.max(np.abs((v * w) @ vinv - k_op))
        scale = max(np.max(np.abs(k_op)), 1.0)
        self._exact = recon_err <= 1e-9 * scale
        if self._exact:
            self._w = w
            self._v = v
            self._vinv = vinv
            self._vt = v.T.copy()

    def propagate(self, psi: np.ndarray, t: float) -> np.ndarray:
        if self._exact:
            return self._v @ (np.exp(-1j * self._w * t) * (self._vinv @ psi))
        return scipy.linalg.expm(-1j * self._k * t) @ psi

    def states_at(self, psi: np.ndarray, times: np.ndarray) -> np.ndarray:
        """exp(-iKt)psi as rows, one per entry of ``times``."""
        if self._exact:
            phases = np.exp(np.outer(times, -1j * self._w))
            return (phases * (self._vinv @ psi)) @ self._vt
        return np.stack([self.propagate(psi, t) for t in times])


@dataclass(frozen=True)
class _CompiledSchedule:
    """Per-segment evolvers plus the embedded jump operator (internal)."""

    evolvers: tuple
    annihilator: np.ndarray


def _annihilator(space: CompositeSpace) -> np.ndarray:
    return embed_operator(space, [0], annihilation(space.subsystem_dims[0])).entries


def _compile(schedule: Schedule, noise: NoiseParams) -> _CompiledSchedule:
    space = schedule.space
    n_cav = embed_operator(space, [0],
                           number_operator(space.subsystem_dims[0])).entries
    evolvers = []
    for seg in schedule.segments:
        if seg.kind == "classical_pulse":
            evolvers.append(_PulseEvolver(schedule, seg))
        else:
            kappa = noise.kappa if seg.loss_active else 0.0
            h = segment_drift(schedule, seg).entries
            evolvers.append(_DriftEvolver(h, kappa, n_cav))
    return _CompiledSchedule(tuple(evolvers), _annihilator(space))


def mcwf_trajectory(schedule: Schedule, psi0: StateVector, noise: NoiseParams,
                    rng: np.random.Generator, *,
                    _compiled: Optional[_CompiledSchedule] = None) -> TrajectoryResult:
    """One Monte Carlo wavefunction realization of the schedule.

    Consumes ``rng`` in a fixed order: jitter factors first, then one
    uniform threshold per decay record.
    """
    if psi0.space != schedule.space:
        raise ValueError("initial state does not live on the schedule's space")
    if not psi0.normalized:
        raise ValueError("initial state must be normalized")

    factors = jitter_factors(schedule, noise.epsilon, rng)
    compiled = _compile(schedule, noise) if _compiled is None else _compiled
    a_full = compiled.annihilator

    psi = psi0.amplitudes.copy()
    threshold: Optional[float] = None
    jump_times: list[float] = []
    durations = np.zeros(len(schedule.segments))
    elapsed = 0.0

    for k, seg in enumerate(schedule.segments):
        ev = compiled.evolvers[k]
        if seg.kind == "classical_pulse":
            psi = ev.apply(psi, factors[k])
            continue

        duration = seg.nominal_duration * factors[k]
        durations[k] = duration
        if duration <= 0.0:
            continue

        if not ev.lossy:
            psi = ev.propagate(psi, duration)
            elapsed += duration
            continue

        if threshold is None:
            threshold = rng.uniform()
        dt_max = noise.effective_dt_max(duration)
        t_done = 0.0
        while duration - t_done > 0.0:
            remaining = duration - t_done
            n_sub = max(1, math.ceil(remaining / dt_max))
            times = (remaining / n_sub) * np.arange(1, n_sub + 1)
            states = ev.states_at(psi, times)
            norms = (states.real ** 2 + states.imag ** 2).sum(axis=1)
            start_norm = float(np.vdot(psi, psi).real)
            slack = 1e-12 * start_norm
            assert norms[0] <= start_norm + slack and np.all(
                norms[1:] <= norms[:-1] + slack), \
                "squared norm must be non-increasing between jumps"

            crossings = np.nonzero(norms < threshold)[0]
            if crossings.size == 0:
                psi = states[-1]
                t_done = duration
                break

            j = int(crossings[0])
            t_lo = 0.0 if j == 0 else float(times[j - 1])
            t_hi = float(times[j])
            resolution = dt_max / 100.0
            while t_hi - t_lo > resolution:
                mid = 0.5 * (t_lo + t_hi)
                probe = ev.states_at(psi, np.array([mid]))[0]
                if float(np.vdot(probe, probe).real) < threshold:
                    t_hi = mid
                else:
                    t_lo = mid
            t_jump = 0.5 * (t_lo + t_hi)

            psi = a_full @ ev.propagate(psi, t_jump)
            nrm = float(np.linalg.norm(psi))
            if nrm < 1e-15:
                raise RuntimeError(
                    "norm underflow: jump operator annihilated the state")
            psi = psi / nrm
            jump_times.append(elapsed + t_done + t_jump)
            threshold = rng.uniform()
            t_done += t_jump
        elapsed += duration

    final = StateVector(schedule.space, psi / np.linalg.norm(psi))
    return TrajectoryResult(final, tuple(jump_times), tuple(durations))


def run_trajectories(schedule: Schedule, psi0: StateVector, noise: NoiseParams,
                     *, basis_input: int = 0, cell: int = 0) -> list[TrajectoryResult]:
    """n_traj independent trajectories with per-index derived streams."""
    compiled = _compile(schedule, noise)
    streams = _StreamFactory(noise.seed)
    results = []
    for k in range(noise.n_traj):
        rng = streams.stream(traj=k, basis_input=basis_input, cell=cell)
        results.append(mcwf_trajectory(schedule, psi0, noise, rng,
                                       _compiled=compiled))
    return results


def ensemble_density(results: Sequence[TrajectoryResult]) -> DensityMatrix:
    """(1/N) sum |psi_k><psi_k|, accumulated in trajectory-index order."""
    if len(results) == 0:
        raise ValueError("ensemble_density needs at least one trajectory")
    space = results[0].final_state.space
    acc = np.zeros((space.total_dim,) * 2, dtype=np.complex128)
    for res in results:
        if res.final_state.space != space:
            raise ValueError("trajectories live on different spaces")
        amps = res.final_state.amplitudes
        acc += np.outer(amps, amps.conj())
    return DensityMatrix(space, acc / len(results))


def lindblad_evolve(schedule: Schedule, rho0: DensityMatrix, tau: float,
                    *, dt_max: Optional[float] = None) -> DensityMatrix:
    """Deterministic master-equation integration of the schedule.

    d rho/dt = -i[H, rho] + kappa (a rho a^dag - {a^dag a, rho}/2),
    fixed-step classical RK4 per segment, step bounded by ``dt_max``
    (default tau/100) and by the phase-accuracy cap.  Serves as the
    sampling-free oracle for the quantum-jump method.
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if rho0.space != schedule.space:
        raise ValueError("initial state does not live on the schedule's space")

    space = schedule.space
    a_full = _annihilator(space)
    adag_full = a_full.conj().T
    n_full = adag_full @ a_full
    kappa_base = 0.0 if math.isinf(tau) else 1.0 / tau
    if dt_max is None:
        dt_max = math.inf if math.isinf(tau) else tau / 100.0

    rho = rho0.entries.copy()
    for seg in schedule.segments:
        if seg.kind == "classical_pulse":
            u = segment_unitary(schedule, seg).entries
            rho = u @ rho @ u.conj().T
            continue
        duration = seg.nominal_duration
        if duration <= 0.0:
            continue
        kappa = kappa_base if seg.loss_active else 0.0
        h = segment_drift(schedule, seg).entries
        scale = float(np.max(np.abs(np.linalg.eigvalsh(h)))) + kappa
        n_steps = max(1, math.ceil(duration / dt_max) if math.isfinite(dt_max) else 1,
                      math.ceil(duration * scale / _RK4_MAX_PHASE_STEP))
        dt = duration / n_steps

        def rhs(r):
            out = -1j * (h @ r - r @ h)
            if kappa > 0.0:
                out += kappa * (a_full @ r @ adag_full
                                - 0.5 * (n_full @ r + r @ n_full))
            return out

        for _ in range(n_steps):
            k1 = rhs(rho)
            k2 = rhs(rho + 0.5 * dt * k1)
            k3 = rhs(rho + 0.5 * dt * k2)
            k4 = rhs(rho + dt * k3)
            rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            rho = 0.5 * (rho + rho.conj().T)

    return DensityMatrix(space, rho)
