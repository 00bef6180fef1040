"""Device topology, calibration data and qubit placements."""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import networkx as nx
from networkx.algorithms import isomorphism

from .circuit import Circuit, interaction_edges


class DeviceError(ValueError):
    pass


@dataclass(frozen=True)
class DeviceTopology:
    num_qubits: int
    edges: frozenset
    name: str = "device"

    def __post_init__(self):
        norm = set()
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise DeviceError(f"self-loop on qubit {a}")
            if not (0 <= a < self.num_qubits and 0 <= b < self.num_qubits):
                raise DeviceError(f"edge ({a}, {b}) outside 0..{self.num_qubits - 1}")
            norm.add((min(a, b), max(a, b)))
        object.__setattr__(self, "edges", frozenset(norm))
        if self.num_qubits > 1 and not nx.is_connected(self.graph):
            raise DeviceError(f"coupling graph of {self.name!r} is not connected")

    @classmethod
    def path(cls, n: int) -> "DeviceTopology":
        return cls(n, frozenset((i, i + 1) for i in range(n - 1)), f"path{n}")

    @cached_property
    def graph(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(self.num_qubits))
        g.add_edges_from(self.edges)
        return g

    def has_edge(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.edges

    def neighbors(self, q: int) -> list[int]:
        return sorted(self.graph.neighbors(q))

    def distances(self) -> list[list[int]]:
        return self._dist

    @cached_property
    def _dist(self) -> list[list[int]]:
        sp = dict(nx.all_pairs_shortest_path_length(self.graph))
        return [[sp[a][b] for b in range(self.num_qubits)] for a in range(self.num_qubits)]

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


@dataclass
class Calibration:
    frequency: list[float]
    t1: list[float]
    t2: list[float]
    cx_error: dict[tuple[int, int], float] = field(default_factory=dict)

    def edge_error(self, a: int, b: int) -> float:
        return self.cx_error.get((a, b), self.cx_error.get((b, a), 0.0))

    def dead_edges(self) -> set[tuple[int, int]]:
        return {(min(a, b), max(a, b)) for (a, b), e in self.cx_error.items() if e >= 1.0}

    def validate(self, topology: DeviceTopology, strict: bool = True) -> None:
        n = topology.num_qubits
        for label, vals in (("frequency", self.frequency), ("T1", self.t1), ("T2", self.t2)):
            if len(vals) != n:
                raise DeviceError(f"{label} has {len(vals)} entries, expected {n}")
        for q in range(n):
            if self.t1[q] <= 0 or self.t2[q] <= 0:
                raise DeviceError(f"qubit {q}: T1 and T2 must be positive")
            if self.t2[q] > 2 * self.t1[q]:
                msg = f"qubit {q}: T2={self.t2[q]} exceeds 2*T1={2 * self.t1[q]}"
                if strict:
                    raise DeviceError(msg)
                warnings.warn(msg + "; clamped to 2*T1", stacklevel=3)
                self.t2[q] = 2 * self.t1[q]
        for (a, b), e in self.cx_error.items():
            if not topology.has_edge(a, b):
                raise DeviceError(f"CX error given for non-edge ({a}, {b})")
            if not 0 <= e <= 1:
                raise DeviceError(f"CX error on ({a}, {b}) outside [0, 1]: {e}")


DEVICE_FIELDS = {"name", "n", "edges", "cal"}
CAL_FIELDS = {"frequency_ghz", "t1_us", "t2_us", "cx_error"}


def parse_device(data: dict, strict: bool = True) -> tuple[DeviceTopology, Calibration | None]:
    if not isinstance(data, dict):
        raise DeviceError("device file must hold a JSON object")
    unknown = set(data) - DEVICE_FIELDS
    if unknown:
        raise DeviceError(f"unknown device fields {sorted(unknown)}")
    try:
        topo = DeviceTopology(int(data["n"]), frozenset(tuple(e) for e in data["edges"]),
                              data.get("name", "device"))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, DeviceError):
            raise
        raise DeviceError(f"malformed device description: {exc!r}") from exc
    cal_d = data.get("cal")
    if cal_d is None:
        return topo, None
    unknown = set(cal_d) - CAL_FIELDS
    if unknown:
        raise DeviceError(f"unknown calibration fields {sorted(unknown)}")
    try:
        cx = {}
        for key, e in cal_d.get("cx_error", {}).items():
            a, b = (int(x) for x in key.split(","))
            cx[(a, b)] = float(e)
        cal = Calibration([float(x) for x in cal_d["frequency_ghz"]], [float(x) for x in cal_d["t1_us"]],
                          [float(x) for x in cal_d["t2_us"]], cx)
    except (KeyError, TypeError, ValueError) as exc:
        raise DeviceError(f"malformed calibration: {exc!r}") from exc
    cal.validate(topo, strict=strict)
    return topo, cal


def load_device(path, strict: bool = True) -> tuple[DeviceTopology, Calibration | None]:
    """Read a device JSON file ``{"n", "edges", "cal": {...}}``.

    With ``strict`` a qubit whose T2 exceeds 2*T1 is an error; otherwise T2 is
    clamped to 2*T1 with a warning.
    """
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DeviceError(f"{path}: not valid JSON ({exc})") from exc
    return parse_device(data, strict=strict)


def load_bundled_device() -> tuple[DeviceTopology, Calibration]:
    """The shipped 27-qubit heavy-hex device (one qubit has T2 slightly above 2*T1 and is clamped)."""
    text = resources.files("xtalk").joinpath("data/heavyhex27.json").read_text()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        topo, cal = parse_device(json.loads(text), strict=False)
    assert cal is not None
    return topo, cal


def device_to_dict(topology: DeviceTopology, cal: Calibration | None) -> dict:
    d: dict = {"name": topology.name, "n": topology.num_qubits, "edges": [list(e) for e in topology.sorted_edges()]}
    if cal is not None:
        d["cal"] = {
            "frequency_ghz": cal.frequency, "t1_us": cal.t1, "t2_us": cal.t2,
            "cx_error": {f"{a},{b}": e for (a, b), e in sorted(cal.cx_error.items())},
        }
    return d


def separation_radius(topology: DeviceTopology, A: Iterable[int], B: Iterable[int]) -> int:
    """Number of idle qubits on the shortest coupling path between two qubit sets."""
    A, B = set(A), set(B)
    if not A or not B:
        raise DeviceError("separation radius needs two nonempty sets")
    if A & B:
        raise DeviceError(f"qubit sets overlap: {sorted(A & B)}")
    dist = topology.distances()
    return max(0, min(dist[a][b] for a in A for b in B) - 1)


Placement = tuple  # Placement[logical] = physical


def _shape(shape) -> tuple[int, set[tuple[int, int]]]:
    if isinstance(shape, Circuit):
        return shape.num_qubits, interaction_edges(shape)
    n, edges = shape
    return int(n), {(min(a, b), max(a, b)) for a, b in edges}


def validate_placement(topology: DeviceTopology, shape, placement: Sequence[int],
                       dead: set[tuple[int, int]] | None = None) -> None:
    n, edges = _shape(shape)
    if len(placement) != n:
        raise DeviceError(f"placement has {len(placement)} entries for {n} logical qubits")
    if len(set(placement)) != n:
        raise DeviceError(f"placement is not injective: {tuple(placement)}")
    for p in placement:
        if not 0 <= p < topology.num_qubits:
            raise DeviceError(f"physical qubit {p} not on device")
    for a, b in edges:
        pa, pb = placement[a], placement[b]
        if not topology.has_edge(pa, pb):
            raise DeviceError(f"logical pair ({a}, {b}) maps to non-edge ({pa}, {pb})")
        if dead and (min(pa, pb), max(pa, pb)) in dead:
            raise DeviceError(f"logical pair ({a}, {b}) maps to dead edge ({pa}, {pb})")


def live_graph(topology: DeviceTopology, calibration: Calibration | None = None, exclude_dead: bool = True) -> nx.Graph:
    g = topology.graph.copy()
    if exclude_dead and calibration is not None:
        g.remove_edges_from(calibration.dead_edges())
    return g


def enumerate_placements(topology: DeviceTopology, shape, *, forbidden: Iterable[int] = (), min_radius: int = 0,
                         exclude_dead: bool = True, calibration: Calibration | None = None,
                         limit: int | None = None) -> list[Placement]:
    """All injective placements whose logical edges land on (live) device edges.

    ``shape`` is a Circuit or ``(num_logical, edge_pairs)``. Placements touching
    ``forbidden`` or lying closer than ``min_radius`` to it are dropped. Output
    is sorted by the sorted physical qubit set, then by the placement tuple.
    """
    n, edges = _shape(shape)
    forbidden = set(forbidden)
    host = live_graph(topology, calibration, exclude_dead)
    if forbidden:
        dist = topology.distances()
        allowed = [q for q in range(topology.num_qubits)
                   if q not in forbidden and min(dist[q][f] for f in forbidden) - 1 >= min_radius]
        host = host.subgraph(allowed)
    pattern = nx.Graph()
    pattern.add_nodes_from(range(n))
    pattern.add_edges_from(edges)
    matcher = isomorphism.GraphMatcher(host, pattern)
    out = []
    for m in matcher.subgraph_monomorphisms_iter():
        inv = {lq: pq for pq, lq in m.items()}
        out.append(tuple(inv[i] for i in range(n)))
        if limit is not None and len(out) > limit:
            raise DeviceError(f"more than {limit} placements; narrow the shape or raise the limit")
    out.sort(key=lambda p: (sorted(p), p))
    return out
