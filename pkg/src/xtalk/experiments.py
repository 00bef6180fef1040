"""Composite experiments: separation sweeps, placement tables and the attack demo.

The victim register is simulated on its own. Attack qubits never share a gate
with the victim, so they are left out of the register; their CNOTs still
fire crosstalk onto the victim through the noise model (see ``simulate``).
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import stats

from .bench import grover3, tvd, uniform, with_attack
from .circuit import Circuit
from .device import DeviceError, DeviceTopology, enumerate_placements, separation_radius, validate_placement
from .sim import simulate, state_fidelity, statevector, success_probability

# Victim triples are listed so the middle entry is the middle of the line.
TABLE_I_ATTACK = (4, 7)
TABLE_I_ROWS = [(0, 1, 2), (3, 5, 8), (11, 14, 16), (21, 23, 24), (19, 22, 25)]
TABLE_II_ATTACK = (13, 14)
TABLE_II_ROWS = [(7, 10, 12), (5, 8, 11), (16, 19, 22)]
ATTACK_DEMO_VICTIM = (11, 14, 16)
ATTACK_DEMO_ATTACK = (12, 13)
SWEEP_VICTIM = (12, 13, 14)


def _body(c: Circuit) -> Circuit:
    return c.without_measurements() if c.num_cbits else c


def victim_state(victim: Circuit, placement: Sequence[int], attack: Sequence[int] | None, noise,
                 attack_cnots: int | None = None) -> np.ndarray:
    """Reduced final state of the victim, placed at ``placement``, beside an optional attack pair."""
    body = _body(victim)
    n = body.num_qubits
    if attack is None:
        return simulate(body, noise, qubit_map=list(placement)).state
    if set(attack) & set(placement):
        raise DeviceError(f"attack {tuple(attack)} overlaps victim placement {tuple(placement)}")
    c = with_attack(body, (n, n + 1), attack_cnots)
    return simulate(c, noise, qubit_map=list(placement) + list(attack), keep=range(n)).state


def victim_fidelity(victim: Circuit, placement, attack, noise, attack_cnots=None, target: str | None = None):
    """State fidelity to the noise-free victim output, and success probability when ``target`` is given."""
    body = _body(victim)
    rho = victim_state(body, placement, attack, noise, attack_cnots)
    f = state_fidelity(statevector(body), rho)
    if target is None:
        return f
    return f, success_probability(rho, target)


def _pool_map(fn, tasks, workers):
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def _fid_task(args):
    victim, placement, attack, noise = args
    return victim_fidelity(victim, placement, attack, noise)


# --- separation sweep -----------------------------------------------------------


def summarize(values: Sequence[float]) -> dict[str, float]:
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return {"count": 0}
    q1, med, q3 = np.percentile(v, [25, 50, 75])
    return {"count": int(v.size), "mean": float(v.mean()), "min": float(v.min()), "max": float(v.max()),
            "q1": float(q1), "median": float(med), "q3": float(q3), "spread": float(v.max() - v.min())}


@dataclass
class SweepResult:
    victim_placement: tuple
    buckets: dict[int, list[tuple[tuple, float]]] = field(default_factory=dict)

    def fidelities(self, r: int) -> list[float]:
        return [f for _, f in self.buckets.get(r, [])]

    def summary(self, r: int) -> dict[str, float]:
        return summarize(self.fidelities(r))

    def means(self) -> dict[int, float]:
        return {r: self.summary(r)["mean"] for r in sorted(self.buckets) if self.buckets[r]}

    def spearman(self) -> float:
        m = self.means()
        return float(stats.spearmanr(list(m), list(m.values())).statistic)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["radius", "placement", "fidelity"])
        for r in sorted(self.buckets):
            for p, f in self.buckets[r]:
                w.writerow([r, "-".join(map(str, p)), f"{f:.12f}"])
        return buf.getvalue()


def run_separation_sweep(victim: Circuit, victim_placement: Sequence[int], radii: Iterable[int], noise,
                         topology: DeviceTopology, calibration=None, attack_shape=(2, {(0, 1)}),
                         exclude_dead: bool = True, workers: int = 1) -> SweepResult:
    """Fidelity of the victim for every attack placement, bucketed by exact separation radius."""
    radii = list(radii)
    if radii != sorted(radii):
        raise ValueError("radii must be sorted ascending")
    validate_placement(topology, _body(victim), victim_placement)
    cands = enumerate_placements(topology, attack_shape, forbidden=victim_placement, min_radius=min(radii),
                                 exclude_dead=exclude_dead, calibration=calibration)
    wanted = set(radii)
    keyed = [(separation_radius(topology, victim_placement, p), p) for p in cands]
    keyed = [(r, p) for r, p in keyed if r in wanted]
    fids = _pool_map(_fid_task, [(victim, tuple(victim_placement), p, noise) for _, p in keyed], workers)
    result = SweepResult(tuple(victim_placement), {r: [] for r in radii})
    for (r, p), f in zip(keyed, fids):
        result.buckets[r].append((p, f))
    return result


# --- placement tables -----------------------------------------------------------


@dataclass
class PlacementRow:
    placement: tuple
    radius: int
    fidelity: float
    success: float | None = None


@dataclass
class PlacementComparison:
    rows: list[PlacementRow]
    attack: tuple

    @property
    def best(self) -> int:
        return int(np.argmax([r.fidelity for r in self.rows]))

    def to_dict(self) -> dict:
        return {"attack": list(self.attack), "best": self.best,
                "rows": [{"placement": list(r.placement), "radius": r.radius, "fidelity": r.fidelity,
                          "success": r.success} for r in self.rows]}


def run_placement_table(victim: Circuit, candidates: Sequence[Sequence[int]], attack: Sequence[int], noise,
                        topology: DeviceTopology, target: str | None = None) -> PlacementComparison:
    body = _body(victim)
    rows = []
    for cand in candidates:
        if set(cand) & set(attack):
            raise DeviceError(f"candidate {tuple(cand)} overlaps attack qubits {tuple(attack)}")
        validate_placement(topology, body, cand)
        r = separation_radius(topology, cand, attack)
        out = victim_fidelity(body, cand, attack, noise, target=target)
        f, s = out if target is not None else (out, None)
        rows.append(PlacementRow(tuple(cand), r, f, s))
    return PlacementComparison(rows, tuple(attack))


def table_i(noise, topology, target: str = "110") -> PlacementComparison:
    return run_placement_table(grover3(target), TABLE_I_ROWS, TABLE_I_ATTACK, noise, topology, target)


def table_ii(noise, topology, target: str = "110") -> PlacementComparison:
    return run_placement_table(grover3(target), TABLE_II_ROWS, TABLE_II_ATTACK, noise, topology, target)


# --- attack demonstration -------------------------------------------------------


def attack_demo(noise, shots: int = 8192, seed: int = 0, target: str = "110",
                victim=ATTACK_DEMO_VICTIM, attack=ATTACK_DEMO_ATTACK) -> dict:
    """Counts of grover3 with and without a neighbouring repeated-CNOT attack."""
    g = grover3(target)
    clean = simulate(g, noise, shots=shots, seed=seed, qubit_map=list(victim))
    ideal = simulate(g, None, shots=shots, seed=seed)
    atk = with_attack(g, (3, 4))
    attacked = simulate(atk, noise, shots=shots, seed=seed, qubit_map=list(victim) + list(attack), keep=range(3))
    u = uniform(3)
    return {
        "victim": list(victim), "attack": list(attack), "target": target, "shots": shots, "seed": seed,
        "counts": {"no_noise": ideal.counts, "no_attack": clean.counts, "attack": attacked.counts},
        "success": {"no_noise": success_probability(ideal.state, target),
                    "no_attack": success_probability(clean.state, target),
                    "attack": success_probability(attacked.state, target)},
        "tvd_uniform": {"no_noise": tvd(ideal.counts, u), "no_attack": tvd(clean.counts, u),
                        "attack": tvd(attacked.counts, u)},
    }


# --- calibration ---------------------------------------------------------------


def calibrate_alpha(topology, calibration, target: float = 0.49, lo: float = 0.0, hi: float = 0.1,
                    tol: float = 1e-4, **synth_kw) -> float:
    """Bisection on alpha so the adjacent row of the first placement table hits ``target``."""
    from .noise import synth_default_model

    g = grover3("110")

    def adjacent(alpha):
        m = synth_default_model(topology, alpha=alpha, calibration=calibration, **synth_kw)
        return victim_fidelity(g, TABLE_I_ROWS[0], TABLE_I_ATTACK, m)

    f_lo, f_hi = adjacent(lo), adjacent(hi)
    if not f_hi <= target <= f_lo:
        raise ValueError(f"target {target} not bracketed: f({lo})={f_lo:.3f}, f({hi})={f_hi:.3f}")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if adjacent(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
