import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

import oracle
from xtalk.circuit import (CNOT, RX, RY, RZ, SX, Circuit, CircuitError, Gate, H, Measure, Reset, S, Sdg, T, Tdg,
                           X, Y, Z, Idle)
from xtalk.noise import BaselineNoise
from xtalk.sim import (SimulationError, basis_index, bloch_vector, simulate, statevector, success_probability,
                       validate_density_matrix, zero_state)

FIXED = [H, X, Y, Z, S, Sdg, T, Tdg, SX]
ROT = [RX, RY, RZ]


@st.composite
def unitary_circuits(draw, max_qubits=4, max_gates=25):
    n = draw(st.integers(1, max_qubits))
    gates = []
    for _ in range(draw(st.integers(0, max_gates))):
        kind = draw(st.integers(0, 2 if n > 1 else 1))
        if kind == 0:
            gates.append(draw(st.sampled_from(FIXED))(draw(st.integers(0, n - 1))))
        elif kind == 1:
            ang = draw(st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False))
            gates.append(draw(st.sampled_from(ROT))(draw(st.integers(0, n - 1)), ang))
        else:
            c, t = draw(st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
            gates.append(CNOT(c, t))
    return Circuit.from_gates(n, gates)


@settings(max_examples=80)
@given(unitary_circuits())
def test_noise_free_matches_statevector_oracle(circ):
    rho = simulate(circ).state
    want = oracle.projector(oracle.statevector(circ))
    assert np.max(np.abs(rho - want)) < 1e-10


@settings(max_examples=40)
@given(unitary_circuits(max_qubits=3))
def test_density_matrix_invariants_after_every_layer(circ):
    res = simulate(circ, check=True)
    validate_density_matrix(res.state)


def test_bell_state():
    rho = simulate(Circuit.from_gates(2, [H(0), CNOT(0, 1)])).state
    want = np.zeros((4, 4))
    want[np.ix_([0, 3], [0, 3])] = 0.5
    assert np.allclose(rho, want, atol=1e-12)


def test_bit_order_qubit_zero_is_leftmost():
    c = Circuit.from_gates(3, [X(0), Measure(0, 0), Measure(1, 1), Measure(2, 2)], num_cbits=3)
    res = simulate(c, shots=10, seed=1)
    assert res.counts == {"100": 10}
    assert basis_index("100") == 4


@pytest.mark.parametrize("gates,n", [
    ([H(0), CNOT(0, 1), RY(2, 0.7), CNOT(1, 2)], 3),
    ([H(0), H(1), T(0), CNOT(1, 0), RX(1, 1.1)], 2),
    ([RY(0, 2.0), RZ(0, 0.3), SX(0)], 1),
])
def test_sampling_converges_to_diagonal(gates, n):
    c = Circuit.from_gates(n, gates + [Measure(q, q) for q in range(n)], num_cbits=n)
    res = simulate(c, shots=10_000, seed=3)
    p = np.real(np.diag(res.state))
    keys = [format(i, f"0{n}b") for i in range(2 ** n)]
    keep = p > 1e-12
    obs = np.array([res.counts.get(k, 0) for k in keys])[keep]
    assert obs.sum() == 10_000
    assert chisquare(obs, p[keep] / p[keep].sum() * 10_000).pvalue > 0.001


def test_midcircuit_trajectories_sample_measurements():
    c = Circuit.from_gates(1, [H(0), Measure(0, 0), Reset(0), X(0), Measure(0, 1)], num_cbits=2)
    res = simulate(c, shots=4000, seed=5)
    assert res.trajectory
    assert set(res.counts) <= {"01", "11"}
    assert abs(res.counts.get("01", 0) / 4000 - 0.5) < 0.04


def test_reset_returns_zero_even_under_noise(model):
    c = Circuit(3, 0, [[H(0), CNOT(1, 2)], [Reset(0), CNOT(1, 2)]])
    res = simulate(c, model, shots=20, seed=0, qubit_map=[14, 12, 13], keep=[0], trajectories=True)
    assert np.allclose(res.state, np.diag([1, 0]), atol=1e-12)


@settings(max_examples=15)
@given(unitary_circuits(max_qubits=3, max_gates=10), st.integers(0, 2 ** 32 - 1), st.integers(1, 4))
def test_counts_deterministic_across_workers(circ, seed, workers):
    n = circ.num_qubits
    c = Circuit(n, n, [list(l) for l in circ.layers] + [[Measure(q, q) for q in range(n)]])
    noise = BaselineNoise({}, {}, {}, readout={q: 0.02 for q in range(n)})
    a = simulate(c, noise, shots=300, seed=seed, workers=1, trajectories=True)
    b = simulate(c, noise, shots=300, seed=seed, workers=workers, trajectories=True)
    assert a.counts == b.counts


def test_exact_sampling_deterministic():
    c = Circuit.from_gates(2, [H(0), CNOT(0, 1), Measure(0, 0), Measure(1, 1)], num_cbits=2)
    assert simulate(c, shots=500, seed=9).counts == simulate(c, shots=500, seed=9).counts


def test_inert_qubits_only_contribute_crosstalk(model):
    c = Circuit(4, 0, [[H(0), CNOT(2, 3)], [CNOT(0, 1), CNOT(2, 3)]])
    full = simulate(c, model, qubit_map=[11, 14, 12, 13])
    part = simulate(c, model, qubit_map=[11, 14, 12, 13], keep=[0, 1])
    red = full.state.reshape(4, 4, 4, 4).trace(axis1=1, axis2=3)
    assert np.allclose(part.state, red, atol=1e-10)


def test_keep_rejects_gate_crossing_boundary():
    c = Circuit.from_gates(2, [CNOT(0, 1)])
    with pytest.raises((CircuitError, SimulationError, ValueError)):
        simulate(c, keep=[0])


def test_bad_inputs():
    with pytest.raises(CircuitError):
        Gate("cnot", (1, 1))
    with pytest.raises(CircuitError):
        Gate("rx", (0,))
    with pytest.raises(CircuitError):
        Gate("foo", (0,))
    with pytest.raises(ValueError):
        simulate(Circuit.from_gates(1, [H(0)]), shots=-1)


def test_circuit_json_roundtrip():
    c = Circuit.from_gates(3, [H(0), RZ(1, 0.25), CNOT(0, 2), Idle(1), Measure(2, 0)], num_cbits=1)
    assert Circuit.from_json(c.to_json()).to_dict() == c.to_dict()


def test_helpers():
    rho = zero_state(2)
    assert success_probability(rho, "00") == pytest.approx(1.0)
    assert np.allclose(bloch_vector(rho, 1), [0, 0, 1])
    psi = statevector(Circuit.from_gates(2, [H(0), CNOT(0, 1)]))
    assert np.allclose(np.abs(psi) ** 2, [0.5, 0, 0, 0.5])
