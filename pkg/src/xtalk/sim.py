"""Density-matrix simulator with layer-interleaved noise.

Circuits without mid-circuit measurement or reset are evolved exactly as one
density matrix and (optionally) sampled. Otherwise each shot is a trajectory;
trajectories are batched along a leading axis and every shot draws its random
numbers from ``default_rng([seed, shot_index])``, so counts do not depend on
batching or on the number of worker processes.

Bitstrings are written with classical bit 0 (or qubit 0) as the leftmost
character.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import channels as ch
from .circuit import Circuit, CircuitError, Gate
from .noise import NoiseModelError, NoiseSpec, apply_layer_noise, as_noise_spec

MAX_SIM_QUBITS = 12
# trajectories per batch are capped so a batch holds about this many complex entries
BATCH_ENTRIES = 1 << 21


class SimulationError(RuntimeError):
    pass


class DensityMatrixError(ValueError):
    pass


_SQ2 = 1 / math.sqrt(2)
_FIXED = {
    "h": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "x": ch.PX,
    "y": ch.PY,
    "z": ch.PZ,
    "s": np.diag([1, 1j]),
    "sdg": np.diag([1, -1j]),
    "t": np.diag([1, np.exp(1j * math.pi / 4)]),
    "tdg": np.diag([1, np.exp(-1j * math.pi / 4)]),
    "sx": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]),
    "cnot": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
}


def gate_unitary(gate: Gate) -> np.ndarray:
    if not gate.is_unitary:
        raise CircuitError(f"{gate.kind} has no unitary")
    if gate.kind in _FIXED:
        return _FIXED[gate.kind]
    c, s = math.cos(gate.angle / 2), math.sin(gate.angle / 2)
    if gate.kind == "rx":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if gate.kind == "ry":
        return np.array([[c, -s], [s, c]], dtype=complex)
    return np.diag([c - 1j * s, c + 1j * s])


def apply_gate(state: np.ndarray, gate: Gate) -> np.ndarray:
    """U rho U^dagger for a unitary gate whose operands are register positions."""
    n = ch.num_qubits(state)
    if any(q >= n for q in gate.qubits):
        raise CircuitError(f"{gate.kind} operands {gate.qubits} out of range for {n} qubits")
    return ch.apply_unitary(state, gate_unitary(gate), gate.qubits)


_RESET = ch.superop_from_kraus([np.array([[1, 0], [0, 0]], dtype=complex),
                                np.array([[0, 1], [0, 0]], dtype=complex)])


def reset_channel(state: np.ndarray, q: int) -> np.ndarray:
    """Unconditional reset of ``q`` to |0>, keeping the reduced state of the rest."""
    return ch.apply_superop(state, _RESET, q)


def _measure_batch(state: np.ndarray, q: int, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    p1 = np.clip(ch.prob_one(state, q), 0.0, 1.0)
    bits = (u < p1).astype(np.int8)
    post = ch.project(state, q, bits)
    norm = np.where(bits == 1, p1, 1 - p1)
    if np.any(norm <= 1e-14):
        raise SimulationError("sampled a measurement branch of zero probability")
    return post / norm[:, None, None], bits


def measure_and_reset(state: np.ndarray, q: int, rng: np.random.Generator) -> tuple[np.ndarray, int]:
    """Sample a Z measurement of ``q``, collapse, then reset ``q`` to |0>."""
    n = ch.num_qubits(state)
    if not 0 <= q < n:
        raise CircuitError(f"qubit {q} out of range for {n} qubits")
    post, bits = _measure_batch(state[None], q, np.array([rng.random()]))
    bit = int(bits[0])
    post = post[0]
    if bit:
        post = ch.apply_unitary(post, ch.PX, [q])
    return post, bit


# --- state diagnostics ---------------------------------------------------------

def validate_density_matrix(rho: np.ndarray, tol: float = 1e-10, psd_tol: float = 1e-9) -> None:
    ch.num_qubits(rho)
    herm = np.max(np.abs(rho - np.conj(np.swapaxes(rho, -1, -2))))
    if herm > tol:
        raise DensityMatrixError(f"not Hermitian (deviation {herm:.2e})")
    tr = np.real(np.trace(rho, axis1=-2, axis2=-1))
    if np.max(np.abs(tr - 1)) > tol:
        raise DensityMatrixError(f"trace deviates from 1: {tr}")
    w = np.linalg.eigvalsh(ch.hermitize(rho))
    if w.min() < -psd_tol:
        raise DensityMatrixError(f"negative eigenvalue {w.min():.2e}")


def partial_trace(rho: np.ndarray, keep: Iterable[int]) -> np.ndarray:
    keep = sorted(set(keep))
    n = ch.num_qubits(rho)
    if not keep:
        raise ValueError("keep set is empty")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"keep {keep} out of range for {n} qubits")
    return ch.partial_trace(rho, keep)


def bloch_vector(rho: np.ndarray, q: int) -> np.ndarray:
    r = partial_trace(rho, [q])
    return np.array([np.real(np.trace(r @ P)) for P in ch.PAULIS[1:]])


def state_fidelity(ideal: np.ndarray, rho: np.ndarray) -> float:
    """<psi| rho |psi> for a normalised pure state ``ideal``."""
    psi = np.asarray(ideal, dtype=complex).ravel()
    if rho.shape != (psi.size, psi.size):
        raise ValueError(f"dimension mismatch: state {psi.size}, density matrix {rho.shape}")
    f = float(np.real(np.conj(psi) @ rho @ psi))
    return min(1.0, max(0.0, f))


def basis_index(bits: str) -> int:
    if not bits or any(c not in "01" for c in bits):
        raise ValueError(f"not a bitstring: {bits!r}")
    return int(bits, 2)


def success_probability(rho: np.ndarray, target: str) -> float:
    n = ch.num_qubits(rho)
    if len(target) != n:
        raise ValueError(f"target {target!r} has length {len(target)}, state has {n} qubits")
    i = basis_index(target)
    return min(1.0, max(0.0, float(np.real(rho[i, i]))))


def zero_state(n: int, batch: int | None = None) -> np.ndarray:
    d = 1 << n
    shape = (d, d) if batch is None else (batch, d, d)
    rho = np.zeros(shape, dtype=complex)
    rho[..., 0, 0] = 1
    return rho


def statevector(circuit: Circuit) -> np.ndarray:
    """Noise-free pure final state (measurements ignored); used for ideal references."""
    rho = simulate(circuit.without_measurements()).state
    w, v = np.linalg.eigh(rho)
    psi = v[:, -1]
    k = int(np.argmax(np.abs(psi)))
    return psi * (abs(psi[k]) / psi[k])


# --- simulation ---------------------------------------------------------------

@dataclass
class SimulationResult:
    state: np.ndarray | None
    counts: dict[str, int] | None
    memory: list[str] | None = None
    trajectory: bool = False

    def probabilities(self) -> dict[str, float]:
        if self.counts is None:
            raise ValueError("no counts were sampled")
        total = sum(self.counts.values())
        return {k: v / total for k, v in self.counts.items()}


def _prepare(circuit: Circuit, noise, qubit_map, keep):
    spec = as_noise_spec(noise)
    circuit.validate()
    if qubit_map is None:
        qubit_map = list(range(circuit.num_qubits))
    qubit_map = list(qubit_map)
    if len(qubit_map) != circuit.num_qubits or len(set(qubit_map)) != len(qubit_map):
        raise CircuitError("qubit_map must assign a distinct physical qubit to every circuit qubit")
    if keep is None:
        keep = list(range(circuit.num_qubits))
    keep = sorted(set(keep))
    if len(keep) > MAX_SIM_QUBITS:
        raise SimulationError(f"register of {len(keep)} qubits exceeds MAX_SIM_QUBITS={MAX_SIM_QUBITS}")
    positions = {q: i for i, q in enumerate(keep)}
    for g in circuit.gates:
        inside = [q in positions for q in g.qubits]
        if any(inside) and not all(inside):
            raise SimulationError(f"{g.kind} on {g.qubits} couples simulated and unsimulated qubits")
        if not any(inside) and g.kind == "measure":
            raise SimulationError(f"measurement of unsimulated qubit {g.qubits[0]}")
    if spec.crosstalk is not None and spec.crosstalk.num_qubits is not None:
        bad = [p for p in qubit_map if not 0 <= p < spec.crosstalk.num_qubits]
        if bad:
            raise NoiseModelError(f"noise model has no qubits {bad}")
    return spec, qubit_map, keep, positions


def _check(state, check, where):
    if check:
        try:
            validate_density_matrix(state)
        except DensityMatrixError as exc:
            raise SimulationError(f"{where}: {exc}") from exc


def _evolve_exact(circuit, spec, qubit_map, positions, check):
    state = zero_state(len(positions))
    for i, layer in enumerate(circuit.layers):
        for g in layer:
            if g.is_unitary and g.qubits[0] in positions:
                state = ch.apply_unitary(state, gate_unitary(g), [positions[q] for q in g.qubits])
        state = apply_layer_noise(state, layer, spec, qubit_map, positions)
        _check(state, check, f"layer {i}")
    return state


def _flip(bits: np.ndarray, u: np.ndarray, p: float) -> np.ndarray:
    return bits ^ (u < p) if p > 0 else bits


def _sample_exact(state, circuit, spec, qubit_map, positions, shots, seed, memory):
    measured = circuit.measured_qubits()
    n = len(positions)
    marg = ch.partial_trace(state, sorted({positions[q] for q in measured})) if measured else None
    order = sorted({positions[q] for q in measured})
    probs = ch.probabilities(marg)
    probs = probs / probs.sum()
    rng = np.random.default_rng(seed)
    outcomes = rng.choice(probs.size, size=shots, p=probs)
    k = len(order)
    reg_bits = (outcomes[:, None] >> (k - 1 - np.arange(k))[None, :]) & 1
    cbits = np.zeros((shots, circuit.num_cbits), dtype=np.int8)
    flips = rng.random((shots, circuit.num_cbits))
    for c, q in enumerate(measured):
        col = reg_bits[:, order.index(positions[q])].astype(np.int8)
        cbits[:, c] = _flip(col, flips[:, c], spec.readout_flip(qubit_map[q]))
    del n
    return _tally(cbits, memory)


def _tally(cbits: np.ndarray, memory: bool):
    keys = ["".join(map(str, row)) for row in cbits.tolist()]
    counts: dict[str, int] = {}
    for k in keys:
        counts[k] = counts.get(k, 0) + 1
    return dict(sorted(counts.items())), (keys if memory else None)


def _measure_events(circuit: Circuit) -> int:
    return sum(1 for g in circuit.gates if g.kind == "measure")


def _run_trajectories(args) -> tuple[np.ndarray, np.ndarray]:
    circuit, spec, qubit_map, positions, seed, shot_ids, check = args
    b = len(shot_ids)
    m = _measure_events(circuit)
    draws = np.stack([np.random.default_rng([seed, int(s)]).random((max(m, 1), 2)) for s in shot_ids])
    state = zero_state(len(positions), b)
    cbits = np.zeros((b, circuit.num_cbits), dtype=np.int8)
    ev = 0
    for i, layer in enumerate(circuit.layers):
        resets = []
        for g in layer:
            if g.qubits[0] not in positions:
                continue
            pos = [positions[q] for q in g.qubits]
            if g.is_unitary:
                state = ch.apply_unitary(state, gate_unitary(g), pos)
            elif g.kind == "measure":
                state, bits = _measure_batch(state, pos[0], draws[:, ev, 0])
                p = spec.readout_flip(qubit_map[g.qubits[0]])
                cbits[:, g.cbit] = _flip(bits, draws[:, ev, 1], p)
                ev += 1
            elif g.kind == "reset":
                resets.append(pos[0])
        state = apply_layer_noise(state, layer, spec, qubit_map, positions)
        # a reset leaves its qubit in |0> at the end of the layer, whatever hit it meanwhile
        for q in resets:
            state = reset_channel(state, q)
        _check(state, check, f"layer {i}")
    return state.mean(axis=0), cbits


def simulate(circuit: Circuit, noise=None, shots: int = 0, seed=None, *,
             qubit_map: Sequence[int] | None = None, keep: Iterable[int] | None = None,
             workers: int = 1, check: bool = False, memory: bool = False,
             trajectories: bool | None = None) -> SimulationResult:
    """Run ``circuit`` under ``noise`` (None, a NoiseSpec, CrosstalkModel or BaselineNoise).

    ``qubit_map[q]`` is the physical qubit that circuit qubit ``q`` occupies,
    used for every noise-model lookup. ``keep`` restricts the simulated
    register; qubits outside it must never share a gate with it. Their
    two-qubit gates still cause crosstalk on simulated qubits, which is exact
    because all modelled noise acts on one victim qubit at a time.

    Without mid-circuit operations the exact final density matrix over ``keep``
    is returned (terminal measurements are dropped from the evolution) and,
    when ``shots > 0``, counts are sampled from it. Otherwise ``shots``
    trajectories are run; ``state`` is then their average.
    """
    spec, qubit_map, keep, positions = _prepare(circuit, noise, qubit_map, keep)
    if shots < 0:
        raise ValueError("shots must be non-negative")
    traj = circuit.has_midcircuit_ops() if trajectories is None else trajectories
    if not traj:
        state = _evolve_exact(circuit, spec, qubit_map, positions, check)
        counts = mem = None
        if shots and circuit.num_cbits:
            counts, mem = _sample_exact(state, circuit, spec, qubit_map, positions, shots, seed, memory)
        return SimulationResult(state, counts, mem, False)

    if shots < 1:
        raise ValueError("circuits with mid-circuit measurement or reset need shots >= 1")
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % (1 << 63))
    d = 1 << len(positions)
    batch = max(1, min(shots, BATCH_ENTRIES // (d * d)))
    tasks = [(circuit, spec, qubit_map, positions, seed, list(range(lo, min(shots, lo + batch))), check)
             for lo in range(0, shots, batch)]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_trajectories, tasks))
    else:
        parts = [_run_trajectories(t) for t in tasks]
    weights = np.array([len(t[5]) for t in tasks], dtype=float)
    state = sum(w * p[0] for w, p in zip(weights, parts)) / weights.sum()
    cbits = np.concatenate([p[1] for p in parts])
    counts, mem = _tally(cbits, memory)
    return SimulationResult(state, counts, mem, True)
