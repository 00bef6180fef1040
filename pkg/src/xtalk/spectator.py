"""Spectator-qubit detection of crosstalk attacks.

Time base: one unit is one attack CNOT. A detection cycle is ``tau`` waiting
units followed by a spectator measurement (2 units) and a reset (1 unit);
the attack keeps firing one CNOT per layer throughout. ``duration`` counts
waiting units only, so a shot holds ``duration // tau`` cycles.

Measurement flips are applied here to the spectator's classical record with
the configured probability, from a per-shot stream derived from the seed.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Sequence

import numpy as np

from .circuit import CNOT, Circuit, H, Idle, Measure, Reset
from .noise import apply_layer_noise
from .sim import bloch_vector, simulate


def derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence([int(p) for p in parts]).generate_state(1, np.uint64)[0] >> 1)


@dataclass(frozen=True)
class SpectatorConfig:
    spectator: int = 14
    data: tuple = (11,)
    attack: tuple = (12, 13)
    tau: int = 7
    f0: int | None = None
    shots: int = 1000
    flip: float = 0.01
    attack_fraction: float = 1.0
    duration: int = 80
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "data", tuple(self.data))
        object.__setattr__(self, "attack", tuple(self.attack))
        if self.tau < 1:
            raise ValueError("tau must be at least 1")
        if self.f0 is not None and self.f0 < 0:
            raise ValueError("f0 must be non-negative")
        if self.shots < 1:
            raise ValueError("shots must be at least 1")
        for name in ("flip", "attack_fraction"):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in [0, 1]")
        if len(self.attack) != 2 or len(set(self.attack)) != 2:
            raise ValueError("attack must be a pair of distinct qubits")
        if self.spectator in self.data or self.spectator in self.attack:
            raise ValueError("spectator must differ from data and attack qubits")
        if self.tau > self.duration:
            raise ValueError("tau exceeds the shot duration")

    @property
    def cycles(self) -> int:
        return self.duration // self.tau

    @property
    def threshold(self) -> int:
        if self.f0 is not None:
            return self.f0
        return max(1, math.ceil(0.01 * self.cycles * 3))

    def to_dict(self) -> dict:
        return asdict(self)


# --- correlated dynamics --------------------------------------------------------


def bloch_trajectory(config: SpectatorConfig, noise, times: Sequence[int]) -> list[tuple[np.ndarray, np.ndarray]]:
    """Bloch vectors of the first data qubit (from |+>) and the spectator (from |0>) under attack."""
    times = list(times)
    if times != sorted(times):
        raise ValueError("sample times must be sorted")
    if times and times[-1] > config.duration:
        raise ValueError(f"time {times[-1]} beyond duration {config.duration}")
    plus = np.full((2, 2), 0.5, dtype=complex)
    zero = np.diag([1, 0]).astype(complex)
    state = np.kron(plus, zero)
    qmap = [config.data[0], config.spectator, *config.attack]
    layer = [CNOT(2, 3)]
    out, t = [], 0
    for target in times:
        while t < target:
            state = apply_layer_noise(state, layer, noise, qmap, {0: 0, 1: 1})
            t += 1
        out.append((bloch_vector(state, 0), bloch_vector(state, 1)))
    return out


def azimuth(v: np.ndarray) -> float:
    return math.atan2(v[1], v[0])


# --- detection ------------------------------------------------------------------


def detection_circuit(config: SpectatorConfig, attacked: bool, data_prep: bool = False) -> tuple[Circuit, list[int]]:
    """Circuit over (data..., spectator, attack pair) and its physical qubit map.

    With ``data_prep`` two data qubits are entangled (H + CNOT) before the
    cycles and disentangled and measured after them; their bits come first.
    """
    nd = len(config.data)
    sq, a, b = nd, nd + 1, nd + 2
    nbits = (nd if data_prep else 0) + config.cycles
    off = nd if data_prep else 0

    def atk(layer):
        return layer + [CNOT(a, b)] if attacked else layer

    layers: list[list] = []
    if data_prep:
        layers += [[H(0)], [CNOT(0, 1)]]
    for k in range(config.cycles):
        layers += [atk([Idle(sq)]) for _ in range(config.tau)]
        layers += [atk([Measure(sq, off + k)]), atk([Reset(sq)])]
    if data_prep:
        layers += [[CNOT(0, 1)], [H(0)], [Measure(q, q) for q in range(nd)]]
    return Circuit(nd + 3, nbits, layers), [*config.data, config.spectator, *config.attack]


def _apply_flips(bits: np.ndarray, p: float, seed: int, shot_ids) -> np.ndarray:
    if p == 0:
        return bits
    u = np.stack([np.random.default_rng([seed, 7, int(s)]).random(bits.shape[1]) for s in shot_ids])
    return bits ^ (u < p)


def _flag_counts(config: SpectatorConfig, attacked: bool, noise, shots: int, seed: int, workers: int = 1) -> np.ndarray:
    circ, qmap = detection_circuit(config, attacked)
    nd = len(config.data)
    res = simulate(circ, noise, shots=shots, seed=seed, qubit_map=qmap, keep=[nd], memory=True, workers=workers,
                   trajectories=True)
    bits = np.array([[int(c) for c in m] for m in res.memory], dtype=np.int8).reshape(shots, -1)
    bits = _apply_flips(bits, config.flip, seed, range(shots))
    return bits.sum(axis=1)


def run_detection_shot(config: SpectatorConfig, attacked: bool, noise, rng: np.random.Generator) -> int:
    """Flag count of one shot."""
    return int(_flag_counts(config, attacked, noise, 1, int(rng.integers(1 << 62)))[0])


@dataclass
class DetectionOutcome:
    flags: np.ndarray
    attacked: np.ndarray
    threshold: int
    cycles: int
    flip: float

    @property
    def detected(self) -> np.ndarray:
        return self.flags > self.threshold

    @property
    def n_attacked(self) -> int:
        return int(self.attacked.sum())

    @property
    def n_detected(self) -> int:
        return int((self.detected & self.attacked).sum())

    @property
    def eta(self) -> float:
        return self.n_detected / self.n_attacked if self.n_attacked else 0.0

    @property
    def false_positive_rate(self) -> float:
        clean = ~self.attacked
        return float(self.detected[clean].mean()) if clean.any() else 0.0

    def aggregate(self) -> dict:
        """Total flags over all shots against the count expected from measurement flips alone."""
        n = self.flags.size
        expected = n * self.cycles * self.flip
        sd = math.sqrt(n * self.cycles * self.flip * (1 - self.flip))
        total = int(self.flags.sum())
        return {"total_flags": total, "expected_clean": expected, "margin": 3 * sd,
                "attack_indicated": total > expected + 3 * sd}

    def summary(self) -> dict:
        return {"eta": self.eta, "false_positive_rate": self.false_positive_rate, "threshold": self.threshold,
                "cycles": self.cycles, "n_attacked": self.n_attacked, "n_detected": self.n_detected,
                "mean_flags_attacked": float(self.flags[self.attacked].mean()) if self.n_attacked else None,
                "mean_flags_clean": float(self.flags[~self.attacked].mean()) if (~self.attacked).any() else None,
                "aggregate": self.aggregate()}


def attack_labels(config: SpectatorConfig) -> np.ndarray:
    n_att = int(round(config.attack_fraction * config.shots))
    labels = np.zeros(config.shots, dtype=bool)
    labels[:n_att] = True
    return np.random.default_rng(derive_seed(config.seed, 1)).permutation(labels)


def detection_rate(config: SpectatorConfig, noise, workers: int = 1) -> DetectionOutcome:
    labels = attack_labels(config)
    flags = np.zeros(config.shots, dtype=int)
    for attacked in (True, False):
        idx = np.flatnonzero(labels == attacked)
        if idx.size:
            flags[idx] = _flag_counts(config, attacked, noise, idx.size, derive_seed(config.seed, 2, attacked), workers)
    return DetectionOutcome(flags, labels, config.threshold, config.cycles, config.flip)


@dataclass
class WaitingSweep:
    taus: list[int]
    eta: list[float]
    false_positive: list[float] = field(default_factory=list)

    @property
    def tau_star(self) -> int:
        return self.taus[int(np.argmax(self.eta))]

    @property
    def eta_star(self) -> float:
        return max(self.eta)

    def at(self, tau: int) -> float:
        return self.eta[self.taus.index(tau)]

    def to_csv(self) -> str:
        rows = ["tau,eta,false_positive"]
        fp = self.false_positive or [float("nan")] * len(self.taus)
        rows += [f"{t},{e:.6f},{f:.6f}" for t, e, f in zip(self.taus, self.eta, fp)]
        return "\n".join(rows) + "\n"


def sweep_waiting_time(config: SpectatorConfig, noise, taus: Sequence[int], workers: int = 1,
                       clean_shots: int = 0) -> WaitingSweep:
    """Detection rate with every shot attacked, per waiting time.

    With ``clean_shots`` > 0 the false-positive rate is measured on that many
    unattacked shots per point as well.
    """
    taus = list(taus)
    if not taus:
        raise ValueError("empty tau range")
    etas, fps = [], []
    for tau in taus:
        cfg = replace(config, tau=tau, attack_fraction=1.0)
        etas.append(detection_rate(cfg, noise, workers).eta)
        if clean_shots:
            cl = replace(cfg, attack_fraction=0.0, shots=clean_shots)
            fps.append(detection_rate(cl, noise, workers).false_positive_rate)
    return WaitingSweep(taus, etas, fps)


# --- post-selection -------------------------------------------------------------


@dataclass
class PostSelection:
    all_counts: dict[str, int]
    retained_counts: dict[str, int]
    n_shots: int
    n_retained: int
    n_attacked: int
    clean_retained: int
    attacked_retained: int

    def p(self, key: str = "00", retained: bool = True) -> float:
        c = self.retained_counts if retained else self.all_counts
        total = sum(c.values())
        return c.get(key, 0) / total if total else float("nan")

    @property
    def clean_retained_fraction(self) -> float:
        clean = self.n_shots - self.n_attacked
        return self.clean_retained / clean if clean else float("nan")

    def to_dict(self) -> dict:
        def norm(c):
            t = sum(c.values())
            return {k: v / t for k, v in sorted(c.items())} if t else {}

        return {"all": norm(self.all_counts), "retained": norm(self.retained_counts),
                "all_counts": self.all_counts, "retained_counts": self.retained_counts,
                "shots": self.n_shots, "retained_shots": self.n_retained, "attacked_shots": self.n_attacked,
                "clean_retained": self.clean_retained, "attacked_retained": self.attacked_retained}


def post_select(config: SpectatorConfig, noise, workers: int = 1) -> PostSelection:
    """Bell pair on two data qubits, idle under a possible attack, undone and measured.

    Shots whose spectator flag count exceeds the threshold are discarded.
    """
    if len(config.data) != 2:
        raise ValueError("post-selection needs exactly two data qubits")
    labels = attack_labels(config)
    outcome = np.empty(config.shots, dtype=object)
    flags = np.zeros(config.shots, dtype=int)
    for attacked in (True, False):
        idx = np.flatnonzero(labels == attacked)
        if not idx.size:
            continue
        circ, qmap = detection_circuit(config, attacked, data_prep=True)
        seed = derive_seed(config.seed, 3, attacked)
        res = simulate(circ, noise, shots=idx.size, seed=seed, qubit_map=qmap, keep=[0, 1, 2], memory=True,
                       workers=workers, trajectories=True)
        bits = np.array([[int(c) for c in m] for m in res.memory], dtype=np.int8).reshape(idx.size, -1)
        sq_bits = _apply_flips(bits[:, 2:], config.flip, seed, range(idx.size))
        flags[idx] = sq_bits.sum(axis=1)
        outcome[idx] = ["".join(map(str, row[:2])) for row in bits.tolist()]
    keep = flags <= config.threshold

    def tally(mask):
        c: dict[str, int] = {}
        for k in outcome[mask]:
            c[k] = c.get(k, 0) + 1
        return dict(sorted(c.items()))

    return PostSelection(tally(np.ones(config.shots, dtype=bool)), tally(keep), config.shots, int(keep.sum()),
                         int(labels.sum()), int((keep & ~labels).sum()), int((keep & labels).sum()))


__all__ = ["SpectatorConfig", "DetectionOutcome", "PostSelection", "WaitingSweep", "attack_labels", "azimuth",
           "bloch_trajectory", "derive_seed", "detection_circuit", "detection_rate", "post_select",
           "run_detection_shot", "sweep_waiting_time"]
