"""Protocol layer: encoding, schedule, ideal execution, truth table."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cavity_toffoli.model import Level, PhysicalParams
from cavity_toffoli.protocol import (LOGICAL_BITS, Segment, encode_logical,
                                     logical_process_matrix, prepare_cavity,
                                     process_phase_spread, retrieve_cavity,
                                     run_ideal, segment_unitary, toffoli_map,
                                     toffoli_schedule, truth_table_fidelities)
from cavity_toffoli.qmath import CompositeSpace, StateVector, state_fidelity

G, E, I = int(Level.g), int(Level.e), int(Level.i)


@pytest.fixture
def schedule(params):
    return toffoli_schedule(params)


# ---------------------------------------------------------------- encoding

def test_encode_000(schedule):
    psi = encode_logical((0, 0, 0), schedule.space)
    s = 1 / math.sqrt(2)
    expect = np.zeros(27, dtype=complex)
    expect[schedule.space.index_of([1, I, G])] = s
    expect[schedule.space.index_of([1, I, E])] = s
    np.testing.assert_allclose(psi.amplitudes, expect, atol=1e-15)


def test_encode_110(schedule):
    psi = encode_logical((1, 1, 0), schedule.space)
    s = 1 / math.sqrt(2)
    expect = np.zeros(27, dtype=complex)
    expect[schedule.space.index_of([0, G, G])] = s
    expect[schedule.space.index_of([0, G, E])] = s
    np.testing.assert_allclose(psi.amplitudes, expect, atol=1e-15)


def test_encoded_states_orthonormal(schedule):
    states = [encode_logical(b, schedule.space) for b in LOGICAL_BITS]
    gram = np.array([[a.overlap(b) for b in states] for a in states])
    np.testing.assert_allclose(gram, np.eye(8), atol=1e-12)


def test_encode_rejects_bad_bits(schedule):
    with pytest.raises(ValueError):
        encode_logical((0, 2, 0), schedule.space)
    with pytest.raises(ValueError):
        encode_logical((0, 0, 0), CompositeSpace((3, 2, 3)))


def test_toffoli_map_truth_table():
    assert toffoli_map((1, 1, 0)) == (1, 1, 1)
    assert toffoli_map((1, 1, 1)) == (1, 1, 0)
    for bits in LOGICAL_BITS:
        if bits[:2] != (1, 1):
            assert toffoli_map(bits) == bits


# ---------------------------------------------------------------- schedule

def test_schedule_has_five_segments_in_order(schedule, params):
    kinds = [seg.kind for seg in schedule.segments]
    assert kinds == ["resonant_rabi", "classical_pulse", "collision",
                     "classical_pulse", "resonant_rabi"]
    assert not schedule.segments[0].adjoint
    assert schedule.segments[4].adjoint
    assert schedule.segments[1].pulse == "rig"
    durations = [seg.nominal_duration for seg in schedule.segments]
    assert durations == pytest.approx([params.t_pi, 0.0, params.t_collision,
                                       0.0, params.t_pi])


def test_schedule_total_duration(schedule):
    assert 1.7e-4 <= schedule.total_duration <= 1.9e-4


def test_default_schedule_loss_everywhere(schedule):
    assert all(seg.loss_active for seg in schedule.segments)
    assert all(seg.jitter_applies for seg in schedule.segments)


def test_loss_and_jitter_scopes(params):
    sched = toffoli_schedule(params, loss_scope="collision_only",
                             jitter_scope="interactions_only")
    assert [seg.loss_active for seg in sched.segments] == [
        False, False, True, False, False]
    assert [seg.jitter_applies for seg in sched.segments] == [
        True, False, True, False, True]
    with pytest.raises(ValueError):
        toffoli_schedule(params, loss_scope="nowhere")
    with pytest.raises(ValueError):
        toffoli_schedule(params, jitter_scope="sometimes")


def test_schedule_json_round_trip(schedule):
    doc = json.loads(schedule.to_json())
    assert doc["subsystem_dims"] == [3, 3, 3]
    assert len(doc["segments"]) == 5
    assert doc["segments"][1]["nominal_duration"] == 0.0
    assert doc["segments"][2]["kind"] == "collision"
    assert doc["total_duration"] == pytest.approx(1.8e-4)


def test_segment_validation():
    with pytest.raises(ValueError):
        Segment("classical_pulse", 1e-5, atom=1, pulse="rig")
    with pytest.raises(ValueError):
        Segment("classical_pulse", 0.0, atom=1, pulse="rxy")
    with pytest.raises(ValueError):
        Segment("resonant_rabi", 1e-5)
    with pytest.raises(ValueError):
        Segment("warp", 1e-5)


# ---------------------------------------------------------------- ideal run

def test_gate_flips_target_iff_both_controls_set(schedule):
    out = run_ideal(schedule, encode_logical((1, 1, 0), schedule.space))
    target = encode_logical((1, 1, 1), schedule.space)
    assert state_fidelity(out, target) >= 1 - 1e-9
    # and with the exact +1 coefficient
    assert target.overlap(out).real == pytest.approx(1.0, abs=1e-9)


def test_gate_identity_on_000(schedule):
    psi0 = encode_logical((0, 0, 0), schedule.space)
    out = run_ideal(schedule, psi0)
    assert psi0.overlap(out).real == pytest.approx(1.0, abs=1e-9)


def test_branch_01_returns_with_plus_one(schedule):
    """The |1_c g_c> branch exercises the adjoint-decode choice."""
    for t in (0, 1):
        psi0 = encode_logical((0, 1, t), schedule.space)
        out = run_ideal(schedule, psi0)
        assert psi0.overlap(out).real == pytest.approx(1.0, abs=1e-9)


def test_truth_table_all_inputs(schedule):
    assert np.all(truth_table_fidelities(schedule) >= 1 - 1e-9)


def test_run_ideal_validates_input(schedule, params):
    other = CompositeSpace((4, 3, 3)).basis_state([0, 0, 0])
    with pytest.raises(ValueError):
        run_ideal(schedule, other)


# ---------------------------------------------------------------- process matrix

def test_process_matrix_is_toffoli_permutation(schedule):
    m = logical_process_matrix(schedule)
    perm = np.zeros((8, 8))
    for k, bits in enumerate(LOGICAL_BITS):
        perm[LOGICAL_BITS.index(toffoli_map(bits)), k] = 1.0
    np.testing.assert_allclose(np.abs(m), perm, atol=1e-9)


def test_process_matrix_unitary(schedule):
    m = logical_process_matrix(schedule)
    np.testing.assert_allclose(m @ m.conj().T, np.eye(8), atol=1e-9)


def test_process_phase_uniformity(schedule):
    assert process_phase_spread(logical_process_matrix(schedule)) <= 1e-9


def test_non_adjoint_decode_breaks_phase_uniformity(params):
    sched = toffoli_schedule(params, decode_adjoint=False)
    m = logical_process_matrix(sched)
    assert process_phase_spread(m) > 1.0  # -1 on the (0,1,.) branch
    for t in (0, 1):
        k = LOGICAL_BITS.index((0, 1, t))
        assert m[k, k].real == pytest.approx(-1.0, abs=1e-9)


@given(st.integers(0, 2 ** 32 - 1))
@settings(max_examples=15, deadline=None)
def test_linearity_on_superpositions(seed):
    """U (sum a_b |b>) = e^{i gamma} sum a_b |Toffoli(b)> for one gamma."""
    params = PhysicalParams.from_frequency()
    schedule = toffoli_schedule(params)
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    coeffs /= np.linalg.norm(coeffs)
    amps = sum(c * encode_logical(b, schedule.space).amplitudes
               for c, b in zip(coeffs, LOGICAL_BITS))
    out = run_ideal(schedule, StateVector(schedule.space, amps))
    expected = sum(c * encode_logical(toffoli_map(b), schedule.space).amplitudes
                   for c, b in zip(coeffs, LOGICAL_BITS))
    overlap = np.vdot(expected, out.amplitudes)
    assert abs(overlap) >= 1 - 1e-9  # equal up to one global phase


# ---------------------------------------------------------------- intermediates

def test_photon_population_never_escapes_single_excitation(schedule):
    """Population of n >= 2 stays below 1e-12 throughout, for every input."""
    ceiling = 0.0
    for bits in LOGICAL_BITS:
        psi = encode_logical(bits, schedule.space)
        for seg in schedule.segments:
            psi = segment_unitary(schedule, seg).apply(psi)
            pops = psi.subsystem_populations(0)
            ceiling = max(ceiling, float(pops[2:].sum()))
    assert ceiling <= 1e-12


def test_encoding_step_flips_1g_branch(schedule):
    """After segment 1: |1_c>|g_c> -> -|0_c>|e_c> (amplitude exactly -1)."""
    u1 = segment_unitary(schedule, schedule.segments[0])
    for t in (0, 1):
        psi = u1.apply(encode_logical((0, 1, t), schedule.space))
        sign = 1.0 if t == 0 else -1.0
        s = 1 / math.sqrt(2)
        expect = np.zeros(27, dtype=complex)
        expect[schedule.space.index_of([0, E, G])] = -s
        expect[schedule.space.index_of([0, E, E])] = -s * sign
        np.testing.assert_allclose(psi.amplitudes, expect, atol=1e-10)


def test_collision_stage_swaps_11_branch(schedule):
    """After segment 3 the (1,1,t) input carries the +/- swapped target."""
    for t in (0, 1):
        psi = encode_logical((1, 1, t), schedule.space)
        for seg in schedule.segments[:3]:
            psi = segment_unitary(schedule, seg).apply(psi)
        s = 1 / math.sqrt(2)
        sign = 1.0 if t == 0 else -1.0
        expect = np.zeros(27, dtype=complex)
        expect[schedule.space.index_of([0, I, G])] = s
        expect[schedule.space.index_of([0, I, E])] = -s * sign  # swapped
        np.testing.assert_allclose(psi.amplitudes, expect, atol=1e-9)


# ---------------------------------------------------------------- cavity transfer

@pytest.fixture
def transfer_space():
    return CompositeSpace((3, 3))


def test_prepare_moves_e_to_photon(transfer_space):
    psi = transfer_space.basis_state([0, E])
    out = prepare_cavity(psi)
    np.testing.assert_allclose(out.amplitudes,
                               transfer_space.basis_state([1, G]).amplitudes,
                               atol=1e-12)


def test_prepare_leaves_g_alone(transfer_space):
    psi = transfer_space.basis_state([0, G])
    out = prepare_cavity(psi)
    np.testing.assert_allclose(out.amplitudes, psi.amplitudes, atol=1e-12)


def test_prepare_transfers_superposition(transfer_space):
    alpha, beta = 0.6, 0.8j
    amps = (alpha * transfer_space.basis_state([0, G]).amplitudes
            + beta * transfer_space.basis_state([0, E]).amplitudes)
    out = prepare_cavity(StateVector(transfer_space, amps))
    expect = (alpha * transfer_space.basis_state([0, G]).amplitudes
              + beta * transfer_space.basis_state([1, G]).amplitudes)
    np.testing.assert_allclose(out.amplitudes, expect, atol=1e-12)
    assert abs(out.norm() - 1.0) <= 1e-12


def test_prepare_rejects_i_population(transfer_space):
    with pytest.raises(ValueError):
        prepare_cavity(transfer_space.basis_state([0, I]))


def test_prepare_rejects_occupied_cavity(transfer_space):
    with pytest.raises(ValueError):
        prepare_cavity(transfer_space.basis_state([1, G]))


def test_retrieve_reads_photon_into_atom(transfer_space):
    psi = transfer_space.basis_state([1, G])
    out = retrieve_cavity(psi)
    np.testing.assert_allclose(out.amplitudes,
                               transfer_space.basis_state([0, E]).amplitudes,
                               atol=1e-12)


def test_retrieve_inverts_prepare(transfer_space):
    rng = np.random.default_rng(5)
    alpha = rng.standard_normal() + 1j * rng.standard_normal()
    beta = rng.standard_normal() + 1j * rng.standard_normal()
    norm = math.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    amps = (alpha * transfer_space.basis_state([0, G]).amplitudes
            + beta * transfer_space.basis_state([0, E]).amplitudes) / norm
    psi = StateVector(transfer_space, amps)
    round_trip = retrieve_cavity(prepare_cavity(psi))
    assert state_fidelity(round_trip, psi) >= 1 - 1e-10


def test_retrieve_leaves_vacuum_alone(transfer_space):
    psi = transfer_space.basis_state([0, G])
    np.testing.assert_allclose(retrieve_cavity(psi).amplitudes, psi.amplitudes,
                               atol=1e-12)
