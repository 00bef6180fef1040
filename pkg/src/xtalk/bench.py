"""Benchmark circuits, distribution distances and the scenario comparison harness."""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .circuit import CNOT, Circuit, Gate, H, Measure, T, Tdg, X
from .sim import simulate

# --- circuits -----------------------------------------------------------------


def bridged_cnot(c: int, t: int, mid: int) -> list[Gate]:
    """CNOT(c, t) for non-adjacent c, t that are both coupled to ``mid``."""
    return [CNOT(c, mid), CNOT(mid, t), CNOT(c, mid), CNOT(mid, t)]


def _cx(c: int, t: int, line: Sequence[int]) -> list[Gate]:
    i, j = line.index(c), line.index(t)
    if abs(i - j) == 1:
        return [CNOT(c, t)]
    return bridged_cnot(c, t, line[(i + j) // 2])


def toffoli_gates(a: int, b: int, c: int, line: Sequence[int] = (0, 1, 2)) -> list[Gate]:
    """Six-CNOT Toffoli (controls a, b; target c) for three qubits on a line.

    CNOTs between the two ends of ``line`` are bridged through its middle.
    """
    g = [H(c)]
    g += _cx(b, c, line) + [Tdg(c)]
    g += _cx(a, c, line) + [T(c)]
    g += _cx(b, c, line) + [Tdg(c)]
    g += _cx(a, c, line) + [T(b), T(c), H(c)]
    g += _cx(a, b, line) + [T(a), Tdg(b)]
    g += _cx(a, b, line)
    return g


def ccz_gates(line: Sequence[int] = (0, 1, 2)) -> list[Gate]:
    """CCZ on three line qubits, with the middle qubit as the Toffoli target so only
    the control-control CNOTs need bridging."""
    a, m, b = line
    g = toffoli_gates(a, b, m, line)
    return _strip_target_h(g, m)


def _strip_target_h(gates: list[Gate], target: int) -> list[Gate]:
    # toffoli_gates opens with H(target) and has exactly one more H(target)
    out = list(gates[1:])
    k = next(i for i, x in enumerate(out) if x.kind == "h" and x.qubits == (target,))
    return out[:k] + out[k + 1:]


def grover3_gates(target: str) -> list[Gate]:
    if len(target) != 3 or any(ch not in "01" for ch in target):
        raise ValueError(f"grover3 target must be a 3-bit string, got {target!r}")
    qs = (0, 1, 2)
    zeros = [q for q, bit in zip(qs, target) if bit == "0"]
    oracle = [X(q) for q in zeros] + ccz_gates() + [X(q) for q in zeros]
    diffusion = [H(q) for q in qs] + [X(q) for q in qs] + ccz_gates() + [X(q) for q in qs] + [H(q) for q in qs]
    return [H(q) for q in qs] + 2 * (oracle + diffusion)


def grover3(target: str = "110", measure: bool = True) -> Circuit:
    """Two-iteration Grover search on three qubits coupled as a line 0-1-2.

    Character i of ``target`` is the value of qubit i.
    """
    gates = grover3_gates(target)
    c = Circuit.from_gates(3, gates, 3 if measure else 0)
    if measure:
        c.layers.append([Measure(q, q) for q in range(3)])
    return c


def syn(n: int) -> Circuit:
    """Two idle qubits (0 and 3) in H...H beside ``n`` CNOTs on the pair (1, 2)."""
    if n < 1:
        raise ValueError("syn needs n >= 1")
    layers = [[H(0), H(3)]] + [[CNOT(1, 2)] for _ in range(n)] + [[H(0), H(3)], [Measure(0, 0), Measure(3, 1)]]
    return Circuit(4, 2, layers)


def toffoli_bench(n: int) -> Circuit:
    if n < 1:
        raise ValueError("toffoli benchmark needs n >= 1")
    gates = [X(0), X(1), H(0), H(1), H(2)]
    for _ in range(n):
        gates += toffoli_gates(0, 1, 2)
    gates += [H(0), H(1), H(2)]
    c = Circuit.from_gates(3, gates, 3)
    c.layers.append([Measure(q, q) for q in range(3)])
    return c


def with_attack(victim: Circuit, attack: tuple[int, int] | None = None, cnots: int | None = None) -> Circuit:
    """Add a repeated-CNOT attack on two extra qubits, one CNOT per victim gate layer.

    Terminal measurement layers are kept at the end without an attack CNOT.
    With ``cnots`` larger than the number of gate layers the victim is padded
    with idle layers.
    """
    n = victim.num_qubits
    a, b = attack if attack is not None else (n, n + 1)
    body = [layer for layer in victim.layers if not all(g.kind == "measure" for g in layer)]
    tail = victim.layers[len(body):]
    count = len(body) if cnots is None else cnots
    layers = []
    for i in range(max(count, len(body))):
        layer = list(body[i]) if i < len(body) else []
        if i < count:
            layer.append(CNOT(a, b))
        layers.append(layer)
    return Circuit(max(n, a + 1, b + 1), victim.num_cbits, layers + [list(x) for x in tail])


def attack_bench(target: str = "110", cnots: int | None = None) -> Circuit:
    """grover3 on qubits 0-2 with an attack CNOT on (3, 4) in every layer."""
    return with_attack(grover3(target), (3, 4), cnots)


_SYN = re.compile(r"syn_?(\d+)$")


def build_benchmark(name: str, **kw) -> Circuit:
    """Build ``syn_n`` / ``synN``, ``toffoli``, ``grover3`` or ``attack`` by name."""
    m = _SYN.match(name)
    if m:
        return syn(int(m.group(1)))
    if name == "toffoli":
        return toffoli_bench(kw.get("n", 10))
    if name == "grover3":
        return grover3(kw.get("target", "110"))
    if name == "attack":
        return attack_bench(kw.get("target", "110"), kw.get("cnots"))
    raise ValueError(f"unknown benchmark {name!r}")


# --- distances ----------------------------------------------------------------


def normalize(dist: Mapping[str, float]) -> dict[str, float]:
    if not dist:
        raise ValueError("empty distribution")
    vals = np.array(list(dist.values()), dtype=float)
    if np.any(vals < 0):
        raise ValueError("negative probability or count")
    total = float(vals.sum())
    if total <= 0:
        raise ValueError("distribution has zero total weight")
    lengths = {len(k) for k in dist}
    if len(lengths) > 1:
        raise ValueError(f"bitstrings of mixed lengths {sorted(lengths)}")
    return {k: float(v) / total for k, v in dist.items()}


def tvd(P: Mapping[str, float], Q: Mapping[str, float]) -> float:
    """Total variation distance, as half the L1 distance over the joint support."""
    p, q = normalize(P), normalize(Q)
    if len(next(iter(p))) != len(next(iter(q))):
        raise ValueError("distributions are over bitstrings of different lengths")
    keys = set(p) | set(q)
    if not any(p.get(k, 0.0) > 0 and q.get(k, 0.0) > 0 for k in keys):
        return 1.0
    return min(1.0, 0.5 * sum(abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys))


def uniform(nbits: int) -> dict[str, float]:
    return {"".join(b): 1 / 2 ** nbits for b in itertools.product("01", repeat=nbits)}


def _psd_sqrt(rho: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (rho + rho.conj().T))
    # eigenvalues at rounding level would otherwise turn into ~1e-8 square roots
    w = np.where(w > 1e-13 * max(w.max(), 0.0), w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    d = rho - sigma
    return 0.5 * float(np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T))).sum())


def uhlmann_fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2, as the squared nuclear norm of sqrt(rho) sqrt(sigma)."""
    sv = np.linalg.svd(_psd_sqrt(rho) @ _psd_sqrt(sigma), compute_uv=False)
    return float(min(1.0, sv.sum() ** 2))


def fvg_check(rho: np.ndarray, sigma: np.ndarray, tol: float = 1e-9) -> tuple[float, float, bool]:
    """Trace distance, fidelity, and whether 1 - sqrt(F) <= D <= sqrt(1 - F) holds."""
    if rho.shape != sigma.shape:
        raise ValueError(f"dimension mismatch {rho.shape} vs {sigma.shape}")
    D = trace_distance(rho, sigma)
    F = uhlmann_fidelity(rho, sigma)
    ok = (1 - np.sqrt(F) <= D + tol) and (D <= np.sqrt(max(0.0, 1 - F)) + tol)
    return D, F, bool(ok)


# --- scenario comparison ------------------------------------------------------


@dataclass
class ScenarioReport:
    tvd: dict[str, float]
    counts: dict[str, dict[str, int]]
    reference: dict[str, float]

    def to_dict(self) -> dict:
        return {"tvd": self.tvd, "counts": self.counts, "reference": self.reference}


def compare_scenarios(circuit: Circuit, reference: Mapping[str, float], specs: Mapping[str, object],
                      shots: int, seed: int, **sim_kw) -> ScenarioReport:
    """TVD of each named noise scenario's counts to ``reference``.

    Every scenario is sampled with the same seed.
    """
    ref = normalize(reference)
    nbits = len(next(iter(ref)))
    if nbits != circuit.num_cbits:
        raise ValueError(f"reference bitstrings have length {nbits}, circuit has {circuit.num_cbits} bits")
    out_tvd, out_counts = {}, {}
    for name, spec in specs.items():
        res = simulate(circuit, spec, shots=shots, seed=seed, **sim_kw)
        out_counts[name] = res.counts
        out_tvd[name] = tvd(res.counts, ref)
    return ScenarioReport(out_tvd, out_counts, ref)


__all__ = [
    "attack_bench", "bridged_cnot", "build_benchmark", "ccz_gates", "compare_scenarios", "fvg_check",
    "grover3", "normalize", "syn", "toffoli_bench", "toffoli_gates", "trace_distance", "tvd", "uhlmann_fidelity",
    "uniform", "with_attack",
]
