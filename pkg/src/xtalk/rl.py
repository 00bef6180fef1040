"""Policy-gradient qubit mapper.

The policy sees a fixed-length summary of a circuit and picks one of K
candidate placements. For the index to carry the same meaning across
circuits, candidates are built around anchors: action 0 is the linear
mapping (logical i on physical i) when it is valid, and action k is the most
compact placement around the k-th anchor qubit. Anchors are a seeded
permutation of the device qubits, fixed for a given seed. Circuits with at
most K placements get all of them instead.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .circuit import CNOT, RZ, SX, Circuit, Gate, X, interaction_edges
from .device import DeviceError, DeviceTopology, enumerate_placements
from .sim import simulate, state_fidelity, statevector

MAX_Q = 5
GATE_SET = ("cnot", "rz", "sx", "x")
BASELINES = ("none", "running", "batch")
N_FEATURES = 2 + len(GATE_SET) + MAX_Q + MAX_Q * (MAX_Q - 1) // 2


# --- circuits and features -------------------------------------------------------


def gen_training_circuits(count: int, max_qubits: int = MAX_Q, max_gates: int = 20,
                          gate_set: Sequence[str] = GATE_SET, seed: int = 0,
                          topology: DeviceTopology | None = None) -> list[Circuit]:
    """Random circuits with uniform qubit count, gate count, gate kind and operands.

    CNOT operands are drawn from the device edges among physical qubits
    0..n-1 (both directions), so the linear mapping is always a valid
    placement. A kind without valid operands (CNOT on one qubit) is redrawn.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    gate_set = tuple(gate_set)
    if not gate_set:
        raise ValueError("empty gate set")
    bad = set(gate_set) - set(GATE_SET)
    if bad:
        raise ValueError(f"unsupported gate kinds {sorted(bad)}")
    if topology is None:
        topology = DeviceTopology.path(max_qubits)
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(1, max_qubits + 1))
        pairs = [(a, b) for a, b in topology.sorted_edges() if b < n]
        pairs = pairs + [(b, a) for a, b in pairs]
        kinds = [k for k in gate_set if k != "cnot" or pairs]
        if not kinds:
            raise ValueError("no gate in the set can act on a single qubit")
        gates: list[Gate] = []
        for _ in range(int(rng.integers(1, max_gates + 1))):
            kind = kinds[int(rng.integers(len(kinds)))]
            if kind == "cnot":
                gates.append(CNOT(*pairs[int(rng.integers(len(pairs)))]))
                continue
            q = int(rng.integers(n))
            if kind == "rz":
                gates.append(RZ(q, rng.uniform(0, 2 * math.pi)))
            elif kind == "sx":
                gates.append(SX(q))
            else:
                gates.append(X(q))
        out.append(Circuit.from_gates(n, gates))
    return out


def features(circuit: Circuit) -> np.ndarray:
    """Qubit count, gate count, kind histogram, per-qubit gate counts and the
    upper triangle of the interaction matrix, scaled to order one."""
    n = circuit.num_qubits
    if n > MAX_Q:
        raise ValueError(f"feature encoding supports at most {MAX_Q} qubits")
    gates = [g for g in circuit.gates if g.kind != "measure"]
    hist = np.zeros(len(GATE_SET))
    per_q = np.zeros(MAX_Q)
    inter = np.zeros((MAX_Q, MAX_Q))
    for g in gates:
        if g.kind in GATE_SET:
            hist[GATE_SET.index(g.kind)] += 1
        elif g.kind != "idle":
            hist[GATE_SET.index("cnot" if len(g.qubits) == 2 else "rz")] += 1
        for q in g.qubits:
            per_q[q] += 1
        if len(g.qubits) == 2:
            a, b = sorted(g.qubits)
            inter[a, b] += 1
    iu = np.triu_indices(MAX_Q, 1)
    return np.concatenate([[n / MAX_Q, len(gates) / 20], hist / 20, per_q / 10, inter[iu] / 5])


# --- action sets -----------------------------------------------------------------


@dataclass(frozen=True)
class ActionSet:
    placements: tuple
    mode: str
    anchors: tuple = ()

    def __len__(self) -> int:
        return len(self.placements)


def _shape_key(circuit: Circuit) -> tuple[int, frozenset]:
    return circuit.num_qubits, frozenset(interaction_edges(circuit))


@lru_cache(maxsize=512)
def _actions_cached(topology: DeviceTopology, n: int, edges: frozenset, K: int, seed: int,
                    forbidden: frozenset, dead: frozenset) -> ActionSet:
    shape = (n, set(edges))
    host_ok = [q for q in range(topology.num_qubits) if q not in forbidden]
    dist = topology.distances()

    def valid(p):
        if any(q in forbidden for q in p):
            return False
        return all(topology.has_edge(p[a], p[b]) and (min(p[a], p[b]), max(p[a], p[b])) not in dead
                   for a, b in edges)

    # small shapes: count placements exactly before deciding the mode
    count = _count_placements(topology, shape, forbidden, dead, K)
    if count is not None and count <= K:
        allp = _placements(topology, shape, forbidden, dead, None)
        if not allp:
            raise DeviceError("circuit has no valid placement on this device")
        return ActionSet(tuple(allp), "all")
    order = [host_ok[i] for i in np.random.default_rng([seed, 17]).permutation(len(host_ok))]
    chosen: list[tuple] = []
    used_anchors: list[int] = []
    linear = tuple(range(n))
    if n <= topology.num_qubits and valid(linear):
        chosen.append(linear)
        used_anchors.append(-1)
    for a in order:
        if len(chosen) >= K:
            break
        p = _compact_near(topology, shape, a, forbidden, dead, dist)
        if p is not None and p not in chosen:
            chosen.append(p)
            used_anchors.append(a)
    if not chosen:
        raise DeviceError("circuit has no valid placement on this device")
    return ActionSet(tuple(chosen), "anchored", tuple(used_anchors))


def _placements(topology, shape, forbidden, dead, limit):
    from .device import Calibration

    cal = None
    if dead:
        cal = Calibration([], [], [], {e: 1.0 for e in dead})
    out = enumerate_placements(topology, shape, exclude_dead=bool(dead), calibration=cal, limit=limit)
    return [p for p in out if not set(p) & forbidden]


def _count_placements(topology, shape, forbidden, dead, K):
    try:
        return len(_placements(topology, shape, forbidden, dead, 4 * K + 4 * topology.num_qubits))
    except DeviceError:
        return None


def _compact_near(topology, shape, anchor, forbidden, dead, dist):
    """Placement using ``anchor`` whose qubits sit closest to it, ties to the smaller tuple."""
    n, edges = shape
    for radius in range(0, topology.num_qubits):
        ball = [q for q in range(topology.num_qubits) if dist[anchor][q] <= radius and q not in forbidden]
        if len(ball) < n:
            continue
        cands = _ball_placements(topology, shape, ball, dead)
        cands = [p for p in cands if anchor in p]
        if cands:
            return min(cands, key=lambda p: (sum(dist[anchor][q] for q in p), p))
    return None


def _ball_placements(topology, shape, ball, dead):
    import networkx as nx
    from networkx.algorithms import isomorphism

    n, edges = shape
    host = topology.graph.subgraph(ball).copy()
    host.remove_edges_from(dead)
    pattern = nx.Graph()
    pattern.add_nodes_from(range(n))
    pattern.add_edges_from(edges)
    out = []
    for m in isomorphism.GraphMatcher(host, pattern).subgraph_monomorphisms_iter():
        inv = {lq: pq for pq, lq in m.items()}
        out.append(tuple(inv[i] for i in range(n)))
    return out


def candidate_actions(topology: DeviceTopology, circuit: Circuit, K: int = 16, seed: int = 0,
                      forbidden: Sequence[int] = (), dead: Sequence[tuple[int, int]] = ()) -> ActionSet:
    """Deterministic candidate placements for ``circuit`` (see module docstring)."""
    if K < 1:
        raise ValueError("K must be at least 1")
    n, edges = _shape_key(circuit)
    dead_n = frozenset((min(a, b), max(a, b)) for a, b in dead)
    return _actions_cached(topology, n, edges, K, seed, frozenset(forbidden), dead_n)


# --- reward --------------------------------------------------------------------


def reward(circuit: Circuit, placement: Sequence[int], noise, attack: Sequence[int] | None = None) -> float:
    """State fidelity of the placed circuit's noisy output to its noise-free output.

    With ``attack`` a CNOT runs on that pair in every layer, as in the
    placement-table experiments.
    """
    from .experiments import victim_fidelity

    body = circuit.without_measurements() if circuit.num_cbits else circuit
    if attack is not None:
        return float(victim_fidelity(body, placement, attack, noise))
    rho = simulate(body, noise, qubit_map=list(placement)).state
    return float(state_fidelity(statevector(body), rho))


# --- policy ----------------------------------------------------------------------


@dataclass
class PolicyNetwork:
    """Two-layer softmax policy: logits = W2^T tanh(W1^T x + b1) + b2."""

    W1: np.ndarray
    b1: np.ndarray
    W2: np.ndarray
    b2: np.ndarray
    nonlinearity: str = "tanh"
    config: dict = field(default_factory=dict)

    @classmethod
    def init(cls, F: int, H: int, K: int, seed: int = 0, scale: float = 0.1) -> "PolicyNetwork":
        rng = np.random.default_rng([seed, 23])
        return cls(rng.normal(0, scale, (F, H)), np.zeros(H), rng.normal(0, scale, (H, K)), np.zeros(K))

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.W1.shape[0], self.W1.shape[1], self.W2.shape[1]

    @property
    def n_params(self) -> int:
        return sum(p.size for p in self.params())

    def params(self) -> list[np.ndarray]:
        return [self.W1, self.b1, self.W2, self.b2]

    def copy(self) -> "PolicyNetwork":
        return PolicyNetwork(*(p.copy() for p in self.params()), self.nonlinearity, dict(self.config))

    def logits(self, x: np.ndarray) -> np.ndarray:
        return np.tanh(x @ self.W1 + self.b1) @ self.W2 + self.b2

    def probs(self, x: np.ndarray, n_actions: int | None = None) -> np.ndarray:
        z = self.logits(x)
        return _masked_softmax(z, n_actions)

    def log_prob_grad(self, x: np.ndarray, a: int, n_actions: int | None = None) -> list[np.ndarray]:
        """Gradient of log pi(a | x) with respect to (W1, b1, W2, b2)."""
        hid = np.tanh(x @ self.W1 + self.b1)
        p = _masked_softmax(hid @ self.W2 + self.b2, n_actions)
        dz = -p
        dz[a] += 1.0
        dW2 = np.outer(hid, dz)
        dh = (self.W2 @ dz) * (1 - hid * hid)
        return [np.outer(x, dh), dh, dW2, dz]

    def to_dict(self) -> dict:
        F, H, K = self.shape
        return {"shape": [F, H, K], "nonlinearity": self.nonlinearity, "config": self.config,
                "W1": self.W1.ravel().tolist(), "b1": self.b1.tolist(),
                "W2": self.W2.ravel().tolist(), "b2": self.b2.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "PolicyNetwork":
        F, H, K = d["shape"]
        net = cls(np.array(d["W1"], float).reshape(F, H), np.array(d["b1"], float),
                  np.array(d["W2"], float).reshape(H, K), np.array(d["b2"], float),
                  d.get("nonlinearity", "tanh"), dict(d.get("config", {})))
        if not all(np.all(np.isfinite(p)) for p in net.params()):
            raise ValueError("policy checkpoint holds non-finite parameters")
        return net

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "PolicyNetwork":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _masked_softmax(z: np.ndarray, n: int | None) -> np.ndarray:
    z = np.array(z, dtype=float)
    if n is not None and n < z.size:
        z[n:] = -np.inf
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


Episode = tuple  # (features, action index, reward, number of valid actions)


def reinforce_update(policy: PolicyNetwork, episodes: Sequence[Episode], lr: float,
                     baseline: float | Sequence[float] = 0.0) -> PolicyNetwork:
    """One gradient-ascent step on the mean of log pi(a|s) * (R - b), in place."""
    if not episodes:
        return policy
    bs = np.broadcast_to(np.asarray(baseline, dtype=float), (len(episodes),))
    grads = [np.zeros_like(p) for p in policy.params()]
    for i, ep in enumerate(episodes):
        x, a, r = ep[0], ep[1], ep[2]
        n_act = ep[3] if len(ep) > 3 else None
        if not math.isfinite(r):
            raise ValueError(f"non-finite reward in episode {i}")
        adv = r - bs[i]
        if adv == 0:
            continue
        for g, d in zip(grads, policy.log_prob_grad(np.asarray(x, float), int(a), n_act)):
            g += adv * d
    for i, g in enumerate(grads):
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient in parameter block {i}")
    for p, g in zip(policy.params(), grads):
        p += lr * g / len(episodes)
    return policy


# --- training ----------------------------------------------------------------------


@dataclass
class TrainingConfig:
    lr: float = 0.05
    episodes: int = 1
    K: int = 16
    hidden: int = 64
    baseline: str = "batch"
    samples: int = 4
    seed: int = 0
    finetune_fraction: float = 0.2
    decay_interval: int = 10
    decay_factor: float = 0.5

    def __post_init__(self):
        if self.lr <= 0:
            raise ValueError("learning rate must be positive")
        if not 0 < self.finetune_fraction <= 1:
            raise ValueError("fine-tune fraction must lie in (0, 1]")
        if self.baseline not in BASELINES:
            raise ValueError(f"baseline must be one of {BASELINES}")
        if self.K < 1 or self.hidden < 1 or self.samples < 0 or self.episodes < 1:
            raise ValueError("K, hidden and episodes must be positive and samples non-negative")
        if self.decay_interval < 1 or not 0 < self.decay_factor <= 1:
            raise ValueError("decay interval must be >= 1 and factor in (0, 1]")

    def lr_at(self, episode: int) -> float:
        return self.lr * self.decay_factor ** (episode // self.decay_interval)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Environment:
    """What a placement is scored against: a noise model, optionally beside an attack pair."""

    noise: object
    topology: DeviceTopology
    attack: tuple | None = None
    dead: tuple = ()
    fixed_actions: tuple | None = None

    def actions(self, circuit: Circuit, K: int, seed: int) -> ActionSet:
        if self.fixed_actions is not None:
            return ActionSet(tuple(tuple(p) for p in self.fixed_actions), "fixed")
        return candidate_actions(self.topology, circuit, K, seed, self.attack or (), self.dead)

    def reward(self, circuit: Circuit, placement) -> float:
        return reward(circuit, placement, self.noise, self.attack)


@dataclass
class TrainingLog:
    curve: list[tuple[int, float]] = field(default_factory=list)

    def window_means(self, frac: float = 0.1) -> tuple[float, float]:
        r = np.array([m for _, m in self.curve])
        k = max(1, int(len(r) * frac))
        return float(r[:k].mean()), float(r[-k:].mean())

    def to_csv(self) -> str:
        return "step,mean_reward\n" + "".join(f"{s},{m:.9f}\n" for s, m in self.curve)


class _RewardCache:
    def __init__(self, env: Environment, workers: int = 1):
        self.env = env
        self.workers = workers
        self.store: dict[tuple, float] = {}

    def get(self, ci: int, circuit: Circuit, placements: Sequence[tuple]) -> list[float]:
        missing = [p for p in placements if (ci, p) not in self.store]
        if missing:
            vals = _map_rewards(self.env, circuit, missing, self.workers)
            self.store.update({(ci, p): v for p, v in zip(missing, vals)})
        return [self.store[(ci, p)] for p in placements]


def _reward_task(args):
    env, circuit, p = args
    return env.reward(circuit, p)


def _map_rewards(env, circuit, placements, workers):
    if workers > 1 and len(placements) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_reward_task, [(env, circuit, p) for p in placements]))
    return [env.reward(circuit, p) for p in placements]


def _run(policy: PolicyNetwork, config: TrainingConfig, circuits: Sequence[Circuit], env: Environment,
         decay: bool, workers: int = 1, log: TrainingLog | None = None, rng_tag: int = 0,
         on_step: Callable | None = None) -> PolicyNetwork:
    if not circuits:
        raise ValueError("no training circuits")
    rng = np.random.default_rng([config.seed, 29, rng_tag])
    cache = _RewardCache(env, workers)
    seen_sum, seen_n = 0.0, 0
    step = 0
    feats = [features(c) for c in circuits]
    actsets = [env.actions(c, config.K, config.seed) for c in circuits]
    for ep in range(config.episodes):
        lr = config.lr_at(ep) if decay else config.lr
        for ci in rng.permutation(len(circuits)):
            acts = actsets[ci]
            n_act = min(len(acts), policy.shape[2])
            p = policy.probs(feats[ci], n_act)
            if config.samples == 0:
                picks = np.arange(n_act)
            else:
                picks = rng.choice(policy.shape[2], size=config.samples, p=p)
            rs = cache.get(int(ci), circuits[ci], [acts.placements[a] for a in picks])
            seen_sum += sum(rs)
            seen_n += len(rs)
            if config.baseline == "none":
                b = 0.0
            elif config.baseline == "running":
                b = seen_sum / seen_n
            else:
                b = float(np.mean(rs))
            eps = [(feats[ci], int(a), r, n_act) for a, r in zip(picks, rs)]
            reinforce_update(policy, eps, lr, b)
            if log is not None:
                log.curve.append((step, float(np.mean(rs))))
            if on_step is not None:
                on_step(step)
            step += 1
    return policy


def train(config: TrainingConfig, circuits: Sequence[Circuit], env: Environment, workers: int = 1,
          log: TrainingLog | None = None, policy: PolicyNetwork | None = None) -> PolicyNetwork:
    """REINFORCE over ``circuits``: per circuit, sample ``config.samples`` actions, score, update.

    With ``samples = 0`` every action is scored once per update instead of
    sampled; with the batch baseline this moves the logits along the reward
    ranking, which separates near-tied arms of small fixed action sets.

    One episode is one pass over the circuits in a seeded order. Rewards
    are cached per (circuit, placement), so repeated episodes cost no extra
    simulation.
    """
    if policy is None:
        policy = PolicyNetwork.init(N_FEATURES, config.hidden, config.K, config.seed)
        policy.config = config.to_dict()
    return _run(policy, config, circuits, env, decay=False, workers=workers, log=log)


def fine_tune(policy: PolicyNetwork, env: Environment, circuits: Sequence[Circuit], config: TrainingConfig,
              workers: int = 1, log: TrainingLog | None = None) -> PolicyNetwork:
    """Continue training a copy of ``policy`` on the first ``finetune_fraction`` of ``circuits``
    with a step-decayed learning rate (per episode)."""
    k = max(1, int(round(config.finetune_fraction * len(circuits))))
    out = policy.copy()
    return _run(out, config, list(circuits)[:k], env, decay=True, workers=workers, log=log, rng_tag=1)


def predict(policy: PolicyNetwork, circuit: Circuit, env: Environment, K: int | None = None,
            seed: int | None = None) -> tuple:
    """Greedy placement: the highest-probability action in the circuit's action set."""
    K = policy.shape[2] if K is None else K
    seed = int(policy.config.get("seed", 0)) if seed is None else seed
    acts = env.actions(circuit, K, seed)
    if len(acts) == 1:
        return acts.placements[0]
    n_act = min(len(acts), policy.shape[2])
    z = policy.logits(features(circuit))[:n_act]
    return acts.placements[int(np.argmax(z))]


def evaluate(policy: PolicyNetwork, circuits: Sequence[Circuit], env: Environment, K: int | None = None,
             seed: int | None = None) -> dict:
    """Mean reward of predicted placements against the linear mapping."""
    pred, lin = [], []
    for c in circuits:
        pred.append(env.reward(c, predict(policy, c, env, K, seed)))
        lin.append(env.reward(c, tuple(range(c.num_qubits))))
    return {"predicted": float(np.mean(pred)), "linear": float(np.mean(lin)),
            "improvement": float(np.mean(pred) - np.mean(lin)), "n": len(circuits)}


def touches(placement: Sequence[int], qubits: Sequence[int]) -> bool:
    return bool(set(placement) & set(qubits))


__all__ = ["ActionSet", "Environment", "GATE_SET", "N_FEATURES", "PolicyNetwork", "TrainingConfig", "TrainingLog",
           "candidate_actions", "evaluate", "features", "fine_tune", "gen_training_circuits", "predict",
           "reinforce_update", "reward", "touches", "train"]
