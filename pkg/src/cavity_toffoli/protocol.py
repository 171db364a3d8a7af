"""The Toffoli protocol: logical encoding, pulse schedule, ideal execution.

Logical basis (control 1 = cavity, control 2 = atom A_c, target = atom A_t):

    c1 = 0 -> |1_c>        c1 = 1 -> |0_c>
    c2 = 0 -> |i_c>        c2 = 1 -> |g_c>
    t  = 0 -> (|g_t> + |e_t>)/sqrt(2)
    t  = 1 -> (|g_t> - |e_t>)/sqrt(2)

The gate is five segments: pi-Rabi on A_c, R_ig swap pulse, dispersive
collision for pi/lambda, R_ig again, and the ADJOINT pi-Rabi.  Decoding
with the inverse pulse (rather than repeating the forward pulse) is what
keeps the |1_c g_c> branch free of a spurious -1: two identical pi pulses
would compose to -1 on the swapped subspace.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from .model import (ATOM_DIM, Level, PhysicalParams, jc_hamiltonian,
                    dispersive_hamiltonian, rabi_propagator, rig_pulse,
                    rge_pulse, require_dispersive_regime)
from .qmath import (CompositeSpace, OperatorMatrix, StateVector, propagator,
                    state_fidelity, tensor_state)

CAVITY = 0
CONTROL_ATOM = 1
TARGET_ATOM = 2

SEGMENT_KINDS = ("resonant_rabi", "classical_pulse", "collision", "idle")

#: the 8 logical inputs in enumeration order (c1, c2, t)
LOGICAL_BITS = tuple((c1, c2, t) for c1 in (0, 1) for c2 in (0, 1) for t in (0, 1))


@dataclass(frozen=True)
class Segment:
    """One timed (or instantaneous) step of the protocol."""

    kind: str
    nominal_duration: float
    jitter_applies: bool = True
    loss_active: bool = True
    atom: Optional[int] = None
    angle: Optional[float] = None   # resonant_rabi rotation angle
    adjoint: bool = False
    pulse: Optional[str] = None     # classical_pulse: "rig" | "rge"
    theta: Optional[float] = None   # rge parameters
    phi: Optional[float] = None

    def __post_init__(self):
        if self.kind not in SEGMENT_KINDS:
            raise ValueError(f"unknown segment kind {self.kind!r}")
        if self.nominal_duration < 0:
            raise ValueError("segment duration must be >= 0")
        if self.kind == "classical_pulse":
            if self.nominal_duration != 0.0:
                raise ValueError("classical pulses are instantaneous")
            if self.pulse not in ("rig", "rge"):
                raise ValueError(f"unknown pulse {self.pulse!r}")
            if self.pulse == "rge" and (self.theta is None or self.phi is None):
                raise ValueError("rge pulse needs theta and phi")
            if self.atom is None:
                raise ValueError("classical pulse needs a target atom")
        if self.kind == "resonant_rabi" and (self.atom is None or self.angle is None):
            raise ValueError("resonant_rabi needs atom and angle")

    def to_jsonable(self) -> dict:
        out = {"kind": self.kind, "nominal_duration": self.nominal_duration,
               "jitter_applies": self.jitter_applies, "loss_active": self.loss_active}
        for key in ("atom", "angle", "pulse", "theta", "phi"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        if self.kind == "resonant_rabi":
            out["adjoint"] = self.adjoint
        return out


@dataclass(frozen=True)
class Schedule:
    """Ordered segment list over a fixed composite space."""

    space: CompositeSpace
    segments: tuple[Segment, ...]
    params: PhysicalParams

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))

    @property
    def total_duration(self) -> float:
        return float(sum(seg.nominal_duration for seg in self.segments))

    def to_jsonable(self) -> dict:
        return {
            "subsystem_dims": list(self.space.subsystem_dims),
            "total_duration": self.total_duration,
            "segments": [seg.to_jsonable() for seg in self.segments],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_jsonable(), indent=indent)


def toffoli_schedule(params: PhysicalParams, *, decode_adjoint: bool = True,
                     loss_scope: str = "all_segments",
                     jitter_scope: str = "all") -> Schedule:
    """The five-segment gate sequence.

    loss_scope:   "all_segments" (default; the cavity always decays) or
                  "collision_only" (decay modeled during the collision only).
    jitter_scope: "all" (default) or "interactions_only" (classical pulses
                  exempt from timing/angle imprecision).
    decode_adjoint=False is a debug knob reproducing the -1 phase defect of
    a naive repeated decoding pulse.
    """
    if loss_scope not in ("all_segments", "collision_only"):
        raise ValueError(f"unknown loss_scope {loss_scope!r}")
    if jitter_scope not in ("all", "interactions_only"):
        raise ValueError(f"unknown jitter_scope {jitter_scope!r}")
    require_dispersive_regime(params)

    space = params.protocol_space()
    loss_all = loss_scope == "all_segments"
    jitter_pulses = jitter_scope == "all"
    segments = (
        Segment("resonant_rabi", params.t_pi, atom=CONTROL_ATOM, angle=math.pi,
                loss_active=loss_all),
        Segment("classical_pulse", 0.0, atom=CONTROL_ATOM, pulse="rig",
                jitter_applies=jitter_pulses, loss_active=loss_all),
        Segment("collision", params.t_collision, loss_active=True),
        Segment("classical_pulse", 0.0, atom=CONTROL_ATOM, pulse="rig",
                jitter_applies=jitter_pulses, loss_active=loss_all),
        Segment("resonant_rabi", params.t_pi, atom=CONTROL_ATOM, angle=math.pi,
                adjoint=decode_adjoint, loss_active=loss_all),
    )
    return Schedule(space, segments, params)


def encode_logical(bits: Iterable[int], space: CompositeSpace) -> StateVector:
    """Physical ket for one logical basis input (c1, c2, t)."""
    c1, c2, t = (int(b) for b in bits)
    if any(b not in (0, 1) for b in (c1, c2, t)):
        raise ValueError(f"bits must be 0/1, got {(c1, c2, t)}")
    dims = space.subsystem_dims
    if len(dims) != 3 or dims[1] != ATOM_DIM or dims[2] != ATOM_DIM:
        raise ValueError(f"expected a (fock, 3, 3) space, got dims {dims}")

    cavity = CompositeSpace((dims[0],)).basis_state([1 - c1])
    control = CompositeSpace((ATOM_DIM,)).basis_state(
        [int(Level.i) if c2 == 0 else int(Level.g)])
    target_amps = np.zeros(ATOM_DIM, dtype=np.complex128)
    target_amps[int(Level.g)] = 1.0 / math.sqrt(2.0)
    target_amps[int(Level.e)] = (1.0 if t == 0 else -1.0) / math.sqrt(2.0)
    target = StateVector(CompositeSpace((ATOM_DIM,)), target_amps)
    return tensor_state(tensor_state(cavity, control), target)


def toffoli_map(bits: Iterable[int]) -> tuple[int, int, int]:
    """Ideal gate action: flip the target iff both controls are 1."""
    c1, c2, t = (int(b) for b in bits)
    return (c1, c2, t ^ (c1 & c2))


def segment_drift(schedule: Schedule, seg: Segment) -> Optional[OperatorMatrix]:
    """Hermitian generator of a timed segment (None for classical pulses).

    Adjoint Rabi segments return the sign-flipped generator, so that
    exp(-i H t) is the inverse pulse for any duration.
    """
    if seg.kind == "classical_pulse":
        return None
    if seg.kind == "idle":
        zero = np.zeros((schedule.space.total_dim,) * 2, dtype=np.complex128)
        return OperatorMatrix(schedule.space, zero, hermitian=True)
    if seg.kind == "resonant_rabi":
        h = jc_hamiltonian(schedule.params, seg.atom, schedule.space)
        if seg.adjoint:
            h = OperatorMatrix(schedule.space, -h.entries, hermitian=True)
        return h
    if seg.kind == "collision":
        return dispersive_hamiltonian(schedule.params, CONTROL_ATOM, TARGET_ATOM,
                                      schedule.space)
    raise ValueError(f"unknown segment kind {seg.kind!r}")


def segment_unitary(schedule: Schedule, seg: Segment, *,
                    duration: Optional[float] = None,
                    angle_scale: float = 1.0) -> OperatorMatrix:
    """Exact unitary of one segment.

    ``duration`` overrides the nominal duration of timed segments;
    ``angle_scale`` rescales the rotation angle of classical pulses.
    """
    if seg.kind == "classical_pulse":
        if seg.pulse == "rig":
            return rig_pulse(seg.atom, schedule.space, angle=math.pi * angle_scale)
        return rge_pulse(seg.atom, schedule.space, seg.theta * angle_scale, seg.phi)
    t = seg.nominal_duration if duration is None else duration
    return propagator(segment_drift(schedule, seg), t)


def run_ideal(schedule: Schedule, psi0: StateVector) -> StateVector:
    """Noiseless execution: apply each segment's exact unitary in order."""
    if psi0.space != schedule.space:
        raise ValueError("initial state does not live on the schedule's space")
    if not psi0.normalized:
        raise ValueError("initial state must be normalized")
    psi = psi0
    for seg in schedule.segments:
        psi = segment_unitary(schedule, seg).apply(psi)
    return psi


def total_unitary(schedule: Schedule) -> OperatorMatrix:
    """Product of all segment unitaries (last segment leftmost)."""
    u = np.eye(schedule.space.total_dim, dtype=np.complex128)
    for seg in schedule.segments:
        u = segment_unitary(schedule, seg).entries @ u
    return OperatorMatrix(schedule.space, u, unitary=True)


def logical_basis_matrix(space: CompositeSpace) -> np.ndarray:
    """Columns are the 8 encoded basis states, in LOGICAL_BITS order."""
    cols = [encode_logical(bits, space).amplitudes for bits in LOGICAL_BITS]
    return np.stack(cols, axis=1)


def logical_process_matrix(schedule: Schedule) -> np.ndarray:
    """M[b', b] = <encode(b')| U_total |encode(b)> on the logical subspace.

    For the ideal schedule this is the Toffoli permutation up to one
    global phase.
    """
    basis = logical_basis_matrix(schedule.space)
    return basis.conj().T @ total_unitary(schedule).entries @ basis


def truth_table_fidelities(schedule: Schedule) -> np.ndarray:
    """Per-input |<encode(Toffoli(b))| U |encode(b)>|^2, in LOGICAL_BITS order."""
    fids = np.empty(len(LOGICAL_BITS))
    for k, bits in enumerate(LOGICAL_BITS):
        out = run_ideal(schedule, encode_logical(bits, schedule.space))
        target = encode_logical(toffoli_map(bits), schedule.space)
        fids[k] = state_fidelity(target, out)
    return fids


def process_phase_spread(process: np.ndarray, modulus_floor: float = 0.5) -> float:
    """Largest phase deviation (rad) among significant process-matrix entries,
    relative to the first one.  Zero for a gate that equals its permutation
    target up to one global phase."""
    significant = process.reshape(-1)
    significant = significant[np.abs(significant) > modulus_floor]
    if significant.size == 0:
        return math.pi
    rel = significant / significant[0]
    return float(np.max(np.abs(np.angle(rel))))


def _transfer_pulse(space: CompositeSpace, adjoint: bool) -> OperatorMatrix:
    # pi-Rabi on a (fock, atom) pair space; omega drops out of the map.
    dummy = PhysicalParams(omega=1.0, delta=4.0, fock_dim=3)
    u, _ = rabi_propagator(dummy, 1, space, math.pi, adjoint=adjoint)
    return u


def prepare_cavity(psi_atom: StateVector) -> StateVector:
    """Load an ancilla atom's qubit into the cavity field.

    (alpha|g> + beta|e>) x |0>  ->  |g> x (alpha|0> + beta|1>), exactly,
    with this module's pi-Rabi convention.  The input lives on a
    (fock, atom) pair space, cavity first.
    """
    space = psi_atom.space
    dims = space.subsystem_dims
    if len(dims) != 2 or dims[1] != ATOM_DIM:
        raise ValueError(f"expected a (fock, 3) space, got dims {dims}")
    amps = psi_atom.amplitudes.reshape(dims)
    if np.max(np.abs(amps[:, int(Level.i)])) > 1e-12:
        raise ValueError("transfer undefined for population in |i>")
    if np.max(np.abs(amps[1:, :])) > 1e-12:
        raise ValueError("cavity must start in |0> before the transfer")
    return _transfer_pulse(space, adjoint=False).apply(psi_atom)


def retrieve_cavity(psi: StateVector) -> StateVector:
    """Read the cavity qubit back into a fresh atom (the inverse transfer).

    |g> x (alpha|0> + beta|1>)  ->  (alpha|g> + beta|e>) x |0>.
    """
    dims = psi.space.subsystem_dims
    if len(dims) != 2 or dims[1] != ATOM_DIM:
        raise ValueError(f"expected a (fock, 3) space, got dims {dims}")
    return _transfer_pulse(psi.space, adjoint=True).apply(psi)
