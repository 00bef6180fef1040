"""Noise models: reduced HSA channels, crosstalk maps and a T1/T2 baseline.

Rotation convention: Hamiltonian rates ``h`` generate ``exp(-i dt (h . sigma) / 2)``,
i.e. a right-handed rotation of the Bloch vector about ``h`` by ``dt * |h|``.
``h = (0, 0, w)`` therefore takes |+> to (cos(w dt), +sin(w dt), 0).

Stochastic rates ``s`` are Pauli error probabilities per time unit and affine
rates ``a`` displace the Bloch vector of the victim per time unit. Within one
application the order is Hamiltonian, then stochastic, then affine.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import channels as ch
from .circuit import Gate


class NoiseModelError(ValueError):
    pass


def _triple(v) -> tuple[float, float, float]:
    t = tuple(float(x) for x in v)
    if len(t) != 3:
        raise NoiseModelError(f"expected 3 components, got {len(t)}")
    return t  # type: ignore[return-value]


@dataclass(frozen=True)
class HsaRates:
    h: tuple[float, float, float] = (0.0, 0.0, 0.0)
    s: tuple[float, float, float] = (0.0, 0.0, 0.0)
    a: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        h, s, a = _triple(self.h), _triple(self.s), _triple(self.a)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "a", a)
        vals = h + s + a
        if not all(math.isfinite(x) for x in vals):
            raise NoiseModelError("HSA rates must be finite")
        if min(s) < 0 or sum(s) > 1:
            raise NoiseModelError(f"stochastic rates must be >= 0 and sum to <= 1, got {s}")
        if math.hypot(*h) > math.pi:
            raise NoiseModelError(f"Hamiltonian rate |h| exceeds pi per time unit: {h}")

    @classmethod
    def zero(cls) -> "HsaRates":
        return cls()

    @property
    def is_zero(self) -> bool:
        return not any(self.h + self.s + self.a)

    @property
    def magnitude(self) -> float:
        return math.hypot(*self.h) + sum(self.s) + math.hypot(*self.a)

    def scaled(self, k: float) -> "HsaRates":
        return HsaRates(tuple(k * x for x in self.h), tuple(k * x for x in self.s),
                        tuple(k * x for x in self.a))

    def __add__(self, other: "HsaRates") -> "HsaRates":
        return HsaRates(tuple(x + y for x, y in zip(self.h, other.h)),
                        tuple(x + y for x, y in zip(self.s, other.s)),
                        tuple(x + y for x, y in zip(self.a, other.a)))

    def to_dict(self) -> dict:
        return {"h": list(self.h), "s": list(self.s), "a": list(self.a)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "HsaRates":
        unknown = set(d) - {"h", "s", "a"}
        if unknown:
            raise NoiseModelError(f"unknown rate fields {sorted(unknown)}")
        return cls(d.get("h", (0, 0, 0)), d.get("s", (0, 0, 0)), d.get("a", (0, 0, 0)))


GateKey = tuple[str, int, int]


@dataclass
class CrosstalkModel:
    """Idle background per qubit plus per-firing crosstalk of two-qubit gates.

    ``gates[(kind, control, target)][victim]`` is applied once each time that
    gate fires, scaled by the gate duration. Indices are physical qubits.
    """

    idle: dict[int, HsaRates] = field(default_factory=dict)
    gates: dict[GateKey, dict[int, HsaRates]] = field(default_factory=dict)
    num_qubits: int | None = None
    strict: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self, num_qubits: int | None = None) -> None:
        n = num_qubits if num_qubits is not None else self.num_qubits
        refs = set(self.idle)
        for (kind, c, t), victims in self.gates.items():
            if kind != "cnot":
                raise NoiseModelError(f"unsupported gate kind {kind!r} in crosstalk model")
            if c == t:
                raise NoiseModelError(f"gate key has repeated operand: {(kind, c, t)}")
            if c in victims or t in victims:
                raise NoiseModelError(f"gate {(kind, c, t)} lists its own operand as a victim")
            refs |= {c, t} | set(victims)
        if n is not None:
            bad = sorted(q for q in refs if not 0 <= q < n)
            if bad:
                raise NoiseModelError(f"model references qubits outside 0..{n - 1}: {bad}")

    def victims(self, kind: str, c: int, t: int) -> dict[int, HsaRates] | None:
        return self.gates.get((kind, c, t))

    def scaled(self, k: float) -> "CrosstalkModel":
        return CrosstalkModel(
            {q: r.scaled(k) for q, r in self.idle.items()},
            {g: {v: r.scaled(k) for v, r in vs.items()} for g, vs in self.gates.items()},
            self.num_qubits, self.strict)

    def to_dict(self) -> dict:
        d: dict = {
            "idle": {str(q): r.to_dict() for q, r in sorted(self.idle.items())},
            "gates": {f"{k}:{c},{t}": {str(v): r.to_dict() for v, r in sorted(vs.items())}
                      for (k, c, t), vs in sorted(self.gates.items())},
        }
        if self.num_qubits is not None:
            d["num_qubits"] = self.num_qubits
        if self.strict:
            d["strict"] = True
        return d

    @classmethod
    def from_dict(cls, d: Mapping, num_qubits: int | None = None) -> "CrosstalkModel":
        unknown = set(d) - {"idle", "gates", "num_qubits", "strict"}
        if unknown:
            raise NoiseModelError(f"unknown model fields {sorted(unknown)}")
        try:
            idle = {int(q): HsaRates.from_dict(r) for q, r in d.get("idle", {}).items()}
            gates = {}
            for key, victims in d.get("gates", {}).items():
                kind, ops = key.split(":")
                c, t = (int(x) for x in ops.split(","))
                gates[(kind, c, t)] = {int(v): HsaRates.from_dict(r) for v, r in victims.items()}
        except (AttributeError, TypeError, ValueError) as exc:
            if isinstance(exc, NoiseModelError):
                raise
            raise NoiseModelError(f"malformed crosstalk model: {exc}") from exc
        n = num_qubits if num_qubits is not None else d.get("num_qubits")
        return cls(idle, gates, n, bool(d.get("strict", False)))


@dataclass
class BaselineNoise:
    """Calibration-style noise without crosstalk (times in abstract time units)."""

    t1: dict[int, float]
    t2: dict[int, float]
    cx_error: dict[tuple[int, int], float] = field(default_factory=dict)
    readout: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        for q, t1 in self.t1.items():
            t2 = self.t2.get(q)
            if t1 <= 0 or t2 is None or t2 <= 0:
                raise NoiseModelError(f"qubit {q}: T1 and T2 must be positive")
            if t2 > 2 * t1 * (1 + 1e-12):
                raise NoiseModelError(f"qubit {q}: T2={t2} exceeds 2*T1={2 * t1}")
        for p in list(self.cx_error.values()) + list(self.readout.values()):
            if not 0 <= p <= 1:
                raise NoiseModelError(f"probability {p} outside [0, 1]")

    def cx(self, a: int, b: int) -> float:
        return self.cx_error.get((a, b), self.cx_error.get((b, a), 0.0))

    @classmethod
    def from_calibration(cls, cal, unit_us: float, readout: float = 0.0) -> "BaselineNoise":
        t1 = {q: cal.t1[q] / unit_us for q in range(len(cal.t1))}
        t2 = {q: min(cal.t2[q], 2 * cal.t1[q]) / unit_us for q in range(len(cal.t2))}
        return cls(t1, t2, dict(cal.cx_error), {q: readout for q in t1} if readout else {})


@dataclass(frozen=True)
class NoiseSpec:
    crosstalk: CrosstalkModel | None = None
    baseline: BaselineNoise | None = None

    @property
    def kind(self) -> str:
        if self.crosstalk is not None and self.baseline is not None:
            return "combined"
        if self.crosstalk is not None:
            return "crosstalk"
        if self.baseline is not None:
            return "baseline"
        return "none"

    def readout_flip(self, phys: int) -> float:
        if self.baseline is None:
            return 0.0
        return self.baseline.readout.get(phys, 0.0)


def as_noise_spec(noise) -> NoiseSpec:
    if noise is None:
        return NoiseSpec()
    if isinstance(noise, NoiseSpec):
        return noise
    if isinstance(noise, CrosstalkModel):
        return NoiseSpec(crosstalk=noise)
    if isinstance(noise, BaselineNoise):
        return NoiseSpec(baseline=noise)
    raise TypeError(f"cannot interpret {type(noise).__name__} as a noise model")


# --- channel construction -------------------------------------------------

@lru_cache(maxsize=4096)
def hsa_superop(rates: HsaRates, dt: float) -> tuple[np.ndarray, bool]:
    """Superoperator for one HSA application and whether it is completely positive."""
    h = np.array(rates.h) * dt
    angle = float(np.linalg.norm(h))
    parts = []
    if angle > 0:
        n = h / angle
        u = math.cos(angle / 2) * ch.I2 - 1j * math.sin(angle / 2) * (
            n[0] * ch.PX + n[1] * ch.PY + n[2] * ch.PZ)
        parts.append(ch.superop_from_kraus([u]))
    p = [dt * x for x in rates.s]
    if sum(p) > 1 + 1e-12:
        raise NoiseModelError(f"scaled stochastic probabilities {p} sum above 1")
    if any(p):
        kraus = [math.sqrt(max(0.0, 1 - sum(p))) * ch.I2]
        kraus += [math.sqrt(pi) * P for pi, P in zip(p, ch.PAULIS[1:]) if pi > 0]
        parts.append(ch.superop_from_kraus(kraus))
    if any(rates.a):
        ptm = np.eye(4)
        ptm[1:, 0] = np.array(rates.a) * dt
        parts.append(ch.superop_from_ptm(ptm))
    lam = ch.compose(*parts) if parts else ch.superop_from_kraus([ch.I2])
    lam.setflags(write=False)
    return lam, ch.is_completely_positive(lam)


def apply_hsa(state: np.ndarray, q: int, rates: HsaRates, dt: float) -> np.ndarray:
    """Apply one reduced-HSA step of length ``dt`` to register qubit ``q``."""
    if rates.is_zero or dt == 0:
        return state
    lam, cp = hsa_superop(rates, float(dt))
    out = ch.apply_superop(state, lam, q)
    if not cp:
        out = ch.clip_to_physical(out)
    return out


@lru_cache(maxsize=4096)
def relaxation_superop(t1: float, t2: float, dt: float) -> np.ndarray:
    gamma = 1 - math.exp(-dt / t1)
    k0 = np.array([[1, 0], [0, math.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, math.sqrt(gamma)], [0, 0]], dtype=complex)
    rate_phi = max(0.0, 1 / t2 - 1 / (2 * t1))
    lam_phi = math.exp(-dt * rate_phi)
    p = (1 - lam_phi) / 2
    amp = ch.superop_from_kraus([k0, k1])
    deph = ch.superop_from_kraus([math.sqrt(1 - p) * ch.I2, math.sqrt(p) * ch.PZ])
    lam = ch.compose(amp, deph)
    lam.setflags(write=False)
    return lam


def apply_relaxation(state: np.ndarray, q: int, t1: float, t2: float, dt: float) -> np.ndarray:
    if dt == 0:
        return state
    return ch.apply_superop(state, relaxation_superop(t1, t2, float(dt)), q)


def apply_layer_noise(state: np.ndarray, layer: Sequence[Gate], spec, qubit_map: Sequence[int] | None = None,
                      positions: Mapping[int, int] | None = None) -> np.ndarray:
    """Apply the noise belonging to one executed layer.

    ``qubit_map`` sends circuit qubits to physical qubits (noise-model indices);
    ``positions`` sends circuit qubits to register positions in ``state``.
    Circuit qubits missing from ``positions`` are not simulated; the gates on
    them still cause crosstalk on simulated victims.
    """
    spec = as_noise_spec(spec)
    if spec.kind == "none" or not layer:
        return state
    n_reg = ch.num_qubits(state)
    if positions is None:
        positions = {q: q for q in range(n_reg)}
    phys = (lambda q: q) if qubit_map is None else (lambda q: qubit_map[q])
    duration = max(g.duration for g in layer)
    busy = {q for g in layer if g.kind != "idle" for q in g.qubits}

    xt = spec.crosstalk
    if xt is not None:
        for local, pos in positions.items():
            if local in busy:
                continue
            rates = xt.idle.get(phys(local))
            if rates is not None:
                state = apply_hsa(state, pos, rates, duration)
        phys_to_pos = {phys(local): pos for local, pos in positions.items()}
        for g in layer:
            if len(g.qubits) != 2:
                continue
            c, t = phys(g.qubits[0]), phys(g.qubits[1])
            victims = xt.victims(g.kind, c, t)
            if victims is None:
                if xt.strict:
                    raise NoiseModelError(f"no crosstalk entry for {g.kind} on ({c}, {t})")
                continue
            for v, rates in victims.items():
                pos = phys_to_pos.get(v)
                if pos is not None:
                    state = apply_hsa(state, pos, rates, g.duration)

    base = spec.baseline
    if base is not None:
        for local, pos in positions.items():
            p = phys(local)
            if p in base.t1:
                state = apply_relaxation(state, pos, base.t1[p], base.t2[p], duration)
        for g in layer:
            if len(g.qubits) != 2:
                continue
            if all(q in positions for q in g.qubits):
                err = base.cx(phys(g.qubits[0]), phys(g.qubits[1]))
                state = ch.trace_out_and_replace(state, [positions[q] for q in g.qubits], err)
    return state


# --- synthetic model --------------------------------------------------------

# Shipped defaults; alpha came out of calibrate_alpha() in xtalk.experiments
# against the adjacent-attack row of the placement table (target 0.49).
DEFAULT_SYNTH = dict(
    alpha=0.0144043,
    beta=0.68,
    cutoff=4,
    coherent_fraction=0.95,
    tilt=0.9,
    unit_us=0.15,
    edge_exponent=2.0,
    victim_exponent=0.25,
    weight_cap=16.0,
)


def default_model() -> CrosstalkModel:
    """The shipped model: DEFAULT_SYNTH on the bundled device with its calibration."""
    from .device import load_bundled_device

    topo, cal = load_bundled_device()
    return synth_default_model(topo, calibration=cal, **DEFAULT_SYNTH)


def _clip(x: float, lo: float, hi: float) -> float:
    return min(hi, max(lo, x))


def synth_default_model(topology, alpha: float = DEFAULT_SYNTH["alpha"], beta: float = DEFAULT_SYNTH["beta"],
                        cutoff: int = DEFAULT_SYNTH["cutoff"], calibration=None, *,
                        coherent_fraction: float = DEFAULT_SYNTH["coherent_fraction"],
                        tilt: float = DEFAULT_SYNTH["tilt"],
                        unit_us: float = DEFAULT_SYNTH["unit_us"],
                        edge_exponent: float = DEFAULT_SYNTH["edge_exponent"],
                        victim_exponent: float = DEFAULT_SYNTH["victim_exponent"],
                        weight_cap: float = DEFAULT_SYNTH["weight_cap"],
                        idle_dephasing: float = 1e-4) -> CrosstalkModel:
    """Distance-decay crosstalk model on ``topology``.

    A CNOT on edge (a, b) hits every victim at graph distance
    ``d = min(dist(v, a), dist(v, b)) <= cutoff`` with magnitude
    ``alpha * beta**(d - 1)``. The magnitude is split into a coherent part
    (fraction ``coherent_fraction``) on an axis tilted by ``tilt`` from Z towards
    X, and a stochastic Z (dephasing) part carrying the rest.

    With ``calibration`` the magnitude is further weighted by the edge CX error
    relative to the device median and by the victim's T2 relative to the median
    (both raised to the given exponents, clipped to [1/weight_cap, weight_cap];
    dead edges get weight 1), and the idle
    background comes from T1/T2 for a time unit of ``unit_us`` microseconds.
    Without it every qubit gets a pure dephasing background of
    ``idle_dephasing`` per unit.
    """
    if alpha < 0:
        raise NoiseModelError("alpha must be non-negative")
    if not 0 < beta < 1:
        raise NoiseModelError("beta must lie in (0, 1)")
    if cutoff < 1:
        raise NoiseModelError("cutoff must be at least 1")
    if weight_cap < 1:
        raise NoiseModelError("weight_cap must be at least 1")
    dist = topology.distances()
    n = topology.num_qubits
    axis = (math.sin(tilt), 0.0, math.cos(tilt))

    edge_w: dict[tuple[int, int], float] = {}
    victim_w = [1.0] * n
    if calibration is not None:
        live = [e for e in calibration.cx_error.values() if e < 1.0]
        med_cx = float(np.median(live))
        med_t2 = float(np.median(calibration.t2))
        for a, b in topology.edges:
            err = calibration.edge_error(a, b)
            # a dead edge has no usable error figure; it couples like a typical edge
            edge_w[(a, b)] = 1.0 if err >= 1.0 else _clip((err / med_cx) ** edge_exponent, 1 / weight_cap, weight_cap)
        victim_w = [_clip((med_t2 / calibration.t2[q]) ** victim_exponent, 1 / weight_cap, weight_cap) for q in range(n)]

    gates: dict[GateKey, dict[int, HsaRates]] = {}
    for a, b in topology.edges:
        w_edge = edge_w.get((a, b), 1.0)
        victims = {}
        for v in range(n):
            if v in (a, b):
                continue
            d = min(dist[v][a], dist[v][b])
            if d > cutoff:
                continue
            m = alpha * beta ** (d - 1) * w_edge * victim_w[v]
            if m == 0 and alpha == 0:
                victims[v] = HsaRates()
                continue
            hc = coherent_fraction * m
            victims[v] = HsaRates(h=tuple(hc * x for x in axis), s=(0.0, 0.0, (1 - coherent_fraction) * m))
        gates[("cnot", a, b)] = victims
        gates[("cnot", b, a)] = dict(victims)

    idle: dict[int, HsaRates] = {}
    for q in range(n):
        if alpha == 0:
            idle[q] = HsaRates()
        elif calibration is None:
            idle[q] = HsaRates(s=(0.0, 0.0, idle_dephasing))
        else:
            idle[q] = idle_rates_from_times(calibration.t1[q], calibration.t2[q], unit_us)
    return CrosstalkModel(idle, gates, n)


def idle_rates_from_times(t1_us: float, t2_us: float, unit_us: float) -> HsaRates:
    """Per-unit HSA rates reproducing T1 relaxation and T2 dephasing.

    Amplitude damping with ``gamma = 1 - exp(-unit/T1)`` is a Pauli channel with
    p_X = p_Y = gamma/4 followed by a +gamma displacement along Z; the extra
    Z probability covers pure dephasing and the second-order remainder.
    """
    t2_us = min(t2_us, 2 * t1_us)
    gamma = 1 - math.exp(-unit_us / t1_us)
    lam_xy = math.exp(-unit_us / t2_us)
    pz = max(0.0, (1 - gamma / 2 - lam_xy) / 2)
    return HsaRates(s=(gamma / 4, gamma / 4, pz), a=(0.0, 0.0, gamma))


def boost_qubits(model: CrosstalkModel, qubits, factor: float) -> CrosstalkModel:
    """Copy of ``model`` with every rate touching ``qubits`` multiplied by ``factor``."""
    qs = set(qubits)
    idle = {q: (r.scaled(factor) if q in qs else r) for q, r in model.idle.items()}
    gates = {}
    for key, victims in model.gates.items():
        on_edge = key[1] in qs or key[2] in qs
        gates[key] = {v: (r.scaled(factor) if on_edge or v in qs else r) for v, r in victims.items()}
    return CrosstalkModel(idle, gates, model.num_qubits, model.strict)


# --- persistence -------------------------------------------------------------

def save_model(model: CrosstalkModel, path) -> None:
    Path(path).write_text(json.dumps(model.to_dict(), indent=1, sort_keys=True))


def load_model(path, topology=None) -> CrosstalkModel:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise NoiseModelError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(data, dict):
        raise NoiseModelError(f"{path}: expected a JSON object")
    n = topology.num_qubits if topology is not None else None
    model = CrosstalkModel.from_dict(data, n)
    if topology is not None:
        model.validate(topology.num_qubits)
    return model
