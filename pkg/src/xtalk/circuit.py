"""Layered circuit representation and its JSON form.

A circuit is a list of layers; each layer is a list of gates acting on
pairwise-disjoint qubits. Layers execute synchronously, so a layer lasts as
long as its slowest gate (see ``GATE_DURATION``).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

ONE_QUBIT = frozenset({"h", "x", "y", "z", "s", "sdg", "t", "tdg", "sx", "rx", "ry", "rz"})
ROTATIONS = frozenset({"rx", "ry", "rz"})
TWO_QUBIT = frozenset({"cnot"})
NON_UNITARY = frozenset({"measure", "reset", "idle"})
KINDS = ONE_QUBIT | TWO_QUBIT | NON_UNITARY

# abstract time units; a CNOT is the unit
GATE_DURATION = {
    **{k: 0.5 for k in ONE_QUBIT},
    "cnot": 1.0,
    "measure": 2.0,
    "reset": 1.0,
    "idle": 1.0,
}


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    cbit: int | None = None

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if kind not in KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        expected = 2 if kind in TWO_QUBIT else 1
        if len(self.qubits) != expected:
            raise CircuitError(f"{kind} takes {expected} operand(s), got {len(self.qubits)}")
        if len(set(self.qubits)) != len(self.qubits):
            raise CircuitError(f"{kind} operands must be distinct: {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise CircuitError(f"negative qubit index in {self.qubits}")
        if (kind in ROTATIONS) != (self.angle is not None):
            raise CircuitError(f"angle is required for rotations and only for rotations ({kind})")
        if kind == "measure":
            if self.cbit is None or self.cbit < 0:
                raise CircuitError("measure needs a non-negative classical bit")
        elif self.cbit is not None:
            raise CircuitError(f"{kind} does not take a classical bit")

    @property
    def duration(self) -> float:
        return GATE_DURATION[self.kind]

    @property
    def is_unitary(self) -> bool:
        return self.kind not in NON_UNITARY

    def remap(self, mapping: Sequence[int] | dict[int, int]) -> "Gate":
        return Gate(self.kind, tuple(mapping[q] for q in self.qubits), self.angle, self.cbit)

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "operands": list(self.qubits)}
        if self.angle is not None:
            d["angle"] = float(self.angle)
        if self.cbit is not None:
            d["cbit"] = self.cbit
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Gate":
        unknown = set(d) - {"kind", "operands", "angle", "cbit"}
        if unknown:
            raise CircuitError(f"unknown gate fields {sorted(unknown)}")
        return cls(d["kind"], tuple(d["operands"]), d.get("angle"), d.get("cbit"))


# convenience constructors
def H(q): return Gate("h", (q,))
def X(q): return Gate("x", (q,))
def Y(q): return Gate("y", (q,))
def Z(q): return Gate("z", (q,))
def S(q): return Gate("s", (q,))
def Sdg(q): return Gate("sdg", (q,))
def T(q): return Gate("t", (q,))
def Tdg(q): return Gate("tdg", (q,))
def SX(q): return Gate("sx", (q,))
def RX(q, a): return Gate("rx", (q,), float(a))
def RY(q, a): return Gate("ry", (q,), float(a))
def RZ(q, a): return Gate("rz", (q,), float(a))
def CNOT(c, t): return Gate("cnot", (c, t))
def Measure(q, c): return Gate("measure", (q,), cbit=c)
def Reset(q): return Gate("reset", (q,))
def Idle(q): return Gate("idle", (q,))


@dataclass
class Circuit:
    num_qubits: int
    num_cbits: int = 0
    layers: list[list[Gate]] = field(default_factory=list)

    def __post_init__(self):
        self.layers = [list(layer) for layer in self.layers]
        self.validate()

    def validate(self) -> None:
        if self.num_qubits < 1:
            raise CircuitError("circuit needs at least one qubit")
        for i, layer in enumerate(self.layers):
            used: set[int] = set()
            for g in layer:
                for q in g.qubits:
                    if q >= self.num_qubits:
                        raise CircuitError(f"layer {i}: qubit {q} out of range ({self.num_qubits})")
                    if q in used:
                        raise CircuitError(f"layer {i}: qubit {q} used twice")
                    used.add(q)
                if g.cbit is not None and g.cbit >= self.num_cbits:
                    raise CircuitError(f"layer {i}: classical bit {g.cbit} out of range")

    @classmethod
    def from_gates(cls, num_qubits: int, gates: Iterable[Gate], num_cbits: int = 0) -> "Circuit":
        """Pack gates into layers as early as their operands allow (ASAP)."""
        layers: list[list[Gate]] = []
        front = [0] * num_qubits
        for g in gates:
            for q in g.qubits:
                if q >= num_qubits:
                    raise CircuitError(f"qubit {q} out of range ({num_qubits})")
            slot = max(front[q] for q in g.qubits)
            if slot == len(layers):
                layers.append([])
            layers[slot].append(g)
            for q in g.qubits:
                front[q] = slot + 1
        return cls(num_qubits, num_cbits, layers)

    @property
    def gates(self) -> list[Gate]:
        return [g for layer in self.layers for g in layer]

    @property
    def depth(self) -> int:
        return len(self.layers)

    def layer_duration(self, i: int) -> float:
        layer = self.layers[i]
        return max((g.duration for g in layer), default=0.0)

    @property
    def duration(self) -> float:
        return sum(self.layer_duration(i) for i in range(self.depth))

    def count_ops(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for g in self.gates:
            out[g.kind] = out.get(g.kind, 0) + 1
        return out

    def has_midcircuit_ops(self) -> bool:
        """True when a reset occurs or a measured qubit is touched again."""
        measured: set[int] = set()
        for layer in self.layers:
            for g in layer:
                if g.kind == "reset":
                    return True
                if any(q in measured for q in g.qubits):
                    return True
                if g.kind == "measure":
                    measured.add(g.qubits[0])
        return False

    def without_measurements(self) -> "Circuit":
        layers = [[g for g in layer if g.kind != "measure"] for layer in self.layers]
        return Circuit(self.num_qubits, 0, [layer for layer in layers if layer])

    def measured_qubits(self) -> list[int]:
        """Qubit measured into each classical bit (terminal-measurement circuits)."""
        out: list[int | None] = [None] * self.num_cbits
        for g in self.gates:
            if g.kind == "measure":
                out[g.cbit] = g.qubits[0]
        if any(q is None for q in out):
            raise CircuitError("some classical bits are never written")
        return out  # type: ignore[return-value]

    def remap(self, mapping: Sequence[int], num_qubits: int) -> "Circuit":
        return Circuit(num_qubits, self.num_cbits,
                       [[g.remap(mapping) for g in layer] for layer in self.layers])

    def copy(self) -> "Circuit":
        return Circuit(self.num_qubits, self.num_cbits, [list(layer) for layer in self.layers])

    def to_dict(self) -> dict:
        return {
            "qubits": self.num_qubits,
            "cbits": self.num_cbits,
            "layers": [[g.to_dict() for g in layer] for layer in self.layers],
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "Circuit":
        unknown = set(d) - {"qubits", "cbits", "layers"}
        if unknown:
            raise CircuitError(f"unknown circuit fields {sorted(unknown)}")
        return cls(int(d["qubits"]), int(d.get("cbits", 0)),
                   [[Gate.from_dict(g) for g in layer] for layer in d["layers"]])

    @classmethod
    def from_json(cls, text: str) -> "Circuit":
        return cls.from_dict(json.loads(text))


def interaction_edges(circuit: Circuit) -> set[tuple[int, int]]:
    """Unordered logical qubit pairs that share a two-qubit gate."""
    return {tuple(sorted(g.qubits)) for g in circuit.gates if len(g.qubits) == 2}
