import math

import numpy as np
import pytest

from qfaas import simulator as sim
from qfaas.errors import IndexOutOfRange, MalformedGate, QubitLimitExceeded

import oracles


def test_u_matrix_matches_textbook_formula():
    for theta, phi, lam in [
        (0.3, 1.1, -0.7),
        (math.pi, 0.0, math.pi),
        (2.2, -3.0, 0.5),
        (0.0, 0.0, 0.0),
    ]:
        got = sim.single_qubit_unitary(theta, phi, lam)
        want = oracles.u_matrix(theta, phi, lam)
        assert np.allclose(got, want, atol=1e-12)


def test_fixed_gates_are_exact():
    c = 1.0 / math.sqrt(2.0)
    h = sim.single_qubit_unitary(math.pi / 2, 0.0, math.pi)
    # The named H gate uses an exact real matrix, not trig round-off.
    state = sim.apply_gate(sim.new_state(1), sim.h(0))
    assert state.amplitudes[0] == state.amplitudes[1]
    assert state.amplitudes[0].imag == 0.0
    assert abs(state.amplitudes[0] - c) < 1e-15
    assert np.allclose(h, [[c, c], [c, -c]], atol=1e-12)


def test_x_y_z_on_basis_states():
    one = sim.apply_gate(sim.new_state(1), sim.x(0))
    assert one.amplitudes[1] == 1.0 and one.amplitudes[0] == 0.0

    y = sim.apply_gate(sim.new_state(1), sim.y(0))
    assert y.amplitudes[1] == 1j

    z = sim.apply_gate(one, sim.z(0))
    assert z.amplitudes[1] == -1.0


def test_phase_gate():
    state = sim.apply_gate(sim.new_state(1), sim.h(0))
    state = sim.apply_gate(state, sim.p(math.pi / 2, 0))
    assert abs(state.amplitudes[1] - 1j / math.sqrt(2)) < 1e-12


def test_cnot_truth_table():
    # |10> (control q0 set) -> |11>
    state = sim.apply_gate(sim.new_state(2), sim.x(0))
    state = sim.apply_gate(state, sim.cx(0, 1))
    assert abs(state.amplitudes[0b11] - 1.0) < 1e-15
    # control clear: no-op
    state = sim.apply_gate(sim.new_state(2), sim.cx(0, 1))
    assert abs(state.amplitudes[0b00] - 1.0) < 1e-15


def test_bell_state_amplitudes_exact():
    state = sim.new_state(2)
    state = sim.apply_gate(state, sim.h(0))
    state = sim.apply_gate(state, sim.cx(0, 1))
    c = 1.0 / math.sqrt(2.0)
    assert state.amplitudes[0b00] == c
    assert state.amplitudes[0b11] == c
    assert state.amplitudes[0b01] == 0.0
    assert state.amplitudes[0b10] == 0.0


def test_controlled_gates_generic():
    # Controlled-H: control q1 clear leaves target alone.
    gate = sim.Gate(sim.GateKind.H, (0,), controls=(1,))
    state = sim.apply_gate(sim.new_state(2), gate)
    assert abs(state.amplitudes[0] - 1.0) < 1e-15
    # Control set: H applies.
    state = sim.apply_gate(sim.new_state(2), sim.x(1))
    state = sim.apply_gate(state, gate)
    c = 1.0 / math.sqrt(2.0)
    assert abs(state.amplitudes[0b10] - c) < 1e-12
    assert abs(state.amplitudes[0b11] - c) < 1e-12


def test_swap_and_controlled_swap():
    state = sim.apply_gate(sim.new_state(2), sim.x(0))
    state = sim.apply_gate(state, sim.swap(0, 1))
    assert abs(state.amplitudes[0b10] - 1.0) < 1e-15

    fredkin = sim.Gate(sim.GateKind.SWAP, (0, 1), controls=(2,))
    state = sim.apply_gate(sim.new_state(3), sim.x(0))
    state = sim.apply_gate(state, fredkin)  # control clear: no swap
    assert abs(state.amplitudes[0b001] - 1.0) < 1e-15


def test_permutation_gate():
    # Cyclic increment on 2 qubits: x -> x+1 mod 4.
    table = [1, 2, 3, 0]
    gate = sim.permutation((0, 1), table)
    state = sim.apply_gate(sim.new_state(2), gate)
    assert abs(state.amplitudes[1] - 1.0) < 1e-15
    state = sim.apply_gate(state, gate)
    assert abs(state.amplitudes[2] - 1.0) < 1e-15


def test_permutation_must_be_bijection():
    with pytest.raises(MalformedGate):
        sim.permutation((0, 1), [0, 0, 1, 2]).validate(2)


def test_gate_validation_errors():
    with pytest.raises(IndexOutOfRange):
        sim.h(3).validate(2)
    with pytest.raises(MalformedGate):
        sim.cx(0, 0).validate(2)  # qubit reused as target and control
    with pytest.raises(MalformedGate):
        sim.Gate(sim.GateKind.U, (0,), params=(1.0,)).validate(1)
    with pytest.raises(MalformedGate):
        sim.Gate(sim.GateKind.SWAP, (0,)).validate(2)


def test_new_state_limits():
    state = sim.new_state(3)
    assert state.amplitudes.shape == (8,)
    assert state.amplitudes[0] == 1.0
    with pytest.raises(QubitLimitExceeded):
        sim.new_state(21, max_qubits=20)
    with pytest.raises(QubitLimitExceeded):
        sim.new_state(5, max_qubits=4)


def test_probabilities_and_marginals():
    state = sim.new_state(2)
    state = sim.apply_gate(state, sim.h(0))
    state = sim.apply_gate(state, sim.cx(0, 1))
    probs = sim.probabilities(state)
    assert abs(probs.sum() - 1.0) < 1e-12
    # marginal over qubit 1 only: {0: 1/2, 1: 1/2}
    marg = sim.marginal_probabilities(state, [1])
    assert np.allclose(marg, [0.5, 0.5], atol=1e-12)


def test_counts_keys_render_most_significant_qubit_first():
    # X on qubit 1 of a 2-qubit register: basis index 2, key "10".
    state = sim.apply_gate(sim.new_state(2), sim.x(1))
    counts = sim.measure_all(state, shots=16, seed=0)
    assert dict(counts) == {"10": 16}
    assert counts.shots == 16


def test_sample_counts_deterministic_and_complete():
    state = sim.apply_gate(sim.new_state(2), sim.h(0))
    state = sim.apply_gate(state, sim.cx(0, 1))
    a = sim.sample_counts(state, [0, 1], shots=1024, seed=42)
    b = sim.sample_counts(state, [0, 1], shots=1024, seed=42)
    assert dict(a) == dict(b)
    assert sum(a.values()) == 1024
    assert set(a) <= {"00", "11"}
    c = sim.sample_counts(state, [0, 1], shots=1024, seed=43)
    assert dict(a) != dict(c)  # different seed, different draw


def test_measured_qubit_order_controls_bit_positions():
    state = sim.apply_gate(sim.new_state(2), sim.x(1))
    # Measuring [1, 0] puts qubit 1 in output bit 0 -> key "01".
    counts = sim.sample_counts(state, [1, 0], shots=8, seed=1)
    assert dict(counts) == {"01": 8}


def test_apply_gate_does_not_mutate_input():
    state = sim.new_state(1)
    sim.apply_gate(state, sim.x(0))
    assert state.amplitudes[0] == 1.0
