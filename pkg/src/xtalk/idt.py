"""Idle tomography: circuit families and HSA rate estimation.

Every tomography qubit in one experiment gets the same preparation and
measurement axis, so a suite's size does not grow with the number of qubits.
Because all modelled noise acts on one victim at a time, each tomography qubit
is simulated on its own and the joint counts are sampled as a product.

Estimation works per qubit. For each length L the affine Bloch map of L
repetitions is rebuilt from the expectation values: column i of ``R_L`` is
half the difference between the +i and -i preparations, and the offset
``t_L`` is their mean. The generator ``G`` is the slope of ``logm(R_L)``
against L, which removes the curvature of a plain linear fit. Rates follow
to first order:

    h_x = (G_zy - G_yz) / 2   (cyclic for y, z)
    p_y + p_z = -G_xx / 2     (cyclic), solved for p_x, p_y, p_z
    t_L = c + sum_{k<L} M^k a  with M = expm(G), fitted for a
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import linalg

from .circuit import CNOT, Circuit, Gate, H, Idle, Measure, S, Sdg, X
from .noise import CrosstalkModel, HsaRates, as_noise_spec
from .sim import simulate

AXES = "XYZ"
DEFAULT_LENGTHS = (1, 2, 4, 8, 16)
SMALL_DRIFT = 0.3


class IdtError(ValueError):
    pass


@dataclass(frozen=True)
class IdtExperiment:
    prep: str
    meas: str
    length: int
    driven: tuple | None = None
    signs: str = ""

    def __post_init__(self):
        signs = self.signs or "+" * len(self.prep)
        object.__setattr__(self, "signs", signs)
        if self.driven is not None:
            object.__setattr__(self, "driven", tuple(self.driven))
        if len(self.prep) != len(self.meas) or len(signs) != len(self.prep):
            raise IdtError("prep, meas and signs must have the same length")
        if set(self.prep + self.meas) - set(AXES) or set(signs) - set("+-"):
            raise IdtError(f"bad basis labels {self.prep!r}/{self.meas!r}/{signs!r}")
        if self.length < 0:
            raise IdtError("idle length must be non-negative")

    def circuit(self) -> Circuit:
        """Tomography qubits are circuit qubits 0..k-1, the driven pair (if any) k and k+1."""
        k = len(self.prep)
        n = k + (2 if self.driven else 0)
        layers: list[list[Gate]] = []
        flips = [X(q) for q in range(k) if self.signs[q] == "-"]
        if flips:
            layers.append(flips)
        for gates in zip(*(_prep_gates(p, q) for q, p in enumerate(self.prep))):
            layers.append([g for g in gates if g is not None])
        for _ in range(self.length):
            if self.driven:
                layers.append([CNOT(k, k + 1)])
            else:
                layers.append([Idle(q) for q in range(k)])
        for gates in zip(*(_meas_gates(m, q) for q, m in enumerate(self.meas))):
            layers.append([g for g in gates if g is not None])
        layers.append([Measure(q, q) for q in range(k)])
        return Circuit(n, k, [x for x in layers if x])

    def to_dict(self) -> dict:
        return {"prep": self.prep, "signs": self.signs, "meas": self.meas, "length": self.length,
                "driven": list(self.driven) if self.driven else None}

    @classmethod
    def from_dict(cls, d: Mapping) -> "IdtExperiment":
        return cls(d["prep"], d["meas"], int(d["length"]), d.get("driven"), d.get("signs", ""))


def _prep_gates(axis: str, q: int) -> tuple:
    # padded to two slots so all qubits line up layer by layer
    return {"Z": (None, None), "X": (H(q), None), "Y": (H(q), S(q))}[axis]


def _meas_gates(axis: str, q: int) -> tuple:
    return {"Z": (None, None), "X": (None, H(q)), "Y": (Sdg(q), H(q))}[axis]


@dataclass
class IdtSuite:
    experiments: list[IdtExperiment]
    tomography: tuple
    driven: tuple = ()
    lengths: tuple = DEFAULT_LENGTHS
    signed: bool = True

    def __post_init__(self):
        self.tomography, self.driven = tuple(self.tomography), tuple(self.driven)
        if set(self.tomography) & set(self.driven):
            raise IdtError("driven and tomography qubits overlap")

    def __len__(self) -> int:
        return len(self.experiments)

    def qubit_map(self) -> list[int]:
        return list(self.tomography) + list(self.driven)

    def to_dict(self) -> dict:
        return {"tomography": list(self.tomography), "driven": list(self.driven), "lengths": list(self.lengths),
                "signed": self.signed, "experiments": [e.to_dict() for e in self.experiments]}

    @classmethod
    def from_dict(cls, d: Mapping) -> "IdtSuite":
        return cls([IdtExperiment.from_dict(e) for e in d["experiments"]], tuple(d["tomography"]),
                   tuple(d.get("driven") or ()), tuple(d["lengths"]), bool(d.get("signed", True)))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1))

    @classmethod
    def load(cls, path) -> "IdtSuite":
        return cls.from_dict(json.loads(Path(path).read_text()))


def generate_idt_suite(topology, driven: tuple[int, int] | None, lengths: Sequence[int] = DEFAULT_LENGTHS,
                       bases: Sequence[tuple[str, str]] | None = None, tomography: Sequence[int] | None = None,
                       signed: bool = True) -> IdtSuite:
    """All (prep, meas, L) experiments for the given tomography qubits.

    ``bases`` defaults to the nine single-axis pairs. With ``signed`` every
    preparation axis appears with both eigenstates, which the affine estimate
    needs. ``tomography`` defaults to every qubit outside the driven pair.
    """
    lengths = tuple(int(x) for x in lengths)
    if not lengths:
        raise IdtError("need at least one idle length")
    if any(x < 0 for x in lengths):
        raise IdtError("idle lengths must be non-negative")
    if driven is not None:
        driven = tuple(driven)
        if len(driven) != 2 or not topology.has_edge(*driven):
            raise IdtError(f"driven pair {driven} is not a device edge")
    drv = tuple(driven or ())
    if tomography is None:
        tomography = [q for q in range(topology.num_qubits) if q not in drv]
    tomography = tuple(tomography)
    if not tomography:
        raise IdtError("no tomography qubits")
    if any(not 0 <= q < topology.num_qubits for q in tomography):
        raise IdtError("tomography qubit outside the device")
    bases = list(bases) if bases is not None else list(itertools.product(AXES, AXES))
    k = len(tomography)
    exps = []
    for p, m in bases:
        for sign in ("+-" if signed else "+"):
            for L in lengths:
                exps.append(IdtExperiment(p * k, m * k, L, driven, sign * k))
    return IdtSuite(exps, tomography, drv, lengths, signed)


# --- running ----------------------------------------------------------------------


def _single_p1(exp: IdtExperiment, phys: int, suite: IdtSuite, spec) -> float:
    single = IdtExperiment(exp.prep[0], exp.meas[0], exp.length, exp.driven, exp.signs[0])
    qmap = [phys] + list(suite.driven)
    rho = simulate(single.circuit(), spec, qubit_map=qmap, keep=[0]).state
    p1 = float(np.clip(rho[1, 1].real, 0.0, 1.0))
    f = spec.readout_flip(phys)
    return p1 * (1 - f) + (1 - p1) * f


def run_suite(suite: IdtSuite, noise, shots: int, seed: int) -> list[dict[str, int]]:
    """Counts for every experiment; experiment i samples from ``default_rng([seed, i])``."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    spec = as_noise_spec(noise)
    cache: dict[tuple, float] = {}
    out = []
    for i, exp in enumerate(suite.experiments):
        if len(set(exp.prep)) > 1 or len(set(exp.meas)) > 1 or len(set(exp.signs)) > 1:
            raise IdtError("run_suite expects the same basis on every tomography qubit")
        p1 = []
        for phys in suite.tomography:
            key = (exp.prep[0], exp.signs[0], exp.meas[0], exp.length, phys)
            if key not in cache:
                cache[key] = _single_p1(exp, phys, suite, spec)
            p1.append(cache[key])
        rng = np.random.default_rng([seed, i])
        bits = (rng.random((shots, len(p1))) < np.array(p1)[None, :]).astype(np.uint8)
        rows, num = np.unique(bits, axis=0, return_counts=True)
        out.append({"".join(map(str, r)): int(c) for r, c in zip(rows.tolist(), num)})
    return out


# --- estimation -------------------------------------------------------------------


@dataclass
class RateEstimate:
    """Signed point estimates and standard errors; ``rates`` gives a valid HsaRates."""

    h: np.ndarray
    s: np.ndarray
    a: np.ndarray
    h_se: np.ndarray
    s_se: np.ndarray
    a_se: np.ndarray
    residual: float = 0.0
    lengths_used: tuple = field(default_factory=tuple)

    @property
    def rates(self) -> HsaRates:
        s = np.clip(self.s, 0, None)
        if s.sum() > 1:
            s = s / s.sum()
        h = self.h
        norm = float(np.linalg.norm(h))
        if norm > math.pi:
            h = h * (math.pi / norm)
        return HsaRates(tuple(h), tuple(s), tuple(self.a))

    def values(self) -> np.ndarray:
        return np.concatenate([self.h, self.s, self.a])

    def errors(self) -> np.ndarray:
        return np.concatenate([self.h_se, self.s_se, self.a_se])

    def to_dict(self) -> dict:
        return {"h": self.h.tolist(), "s": self.s.tolist(), "a": self.a.tolist(), "h_se": self.h_se.tolist(),
                "s_se": self.s_se.tolist(), "a_se": self.a_se.tolist(), "residual": self.residual,
                "lengths_used": list(self.lengths_used)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "RateEstimate":
        arr = lambda k: np.array(d[k], dtype=float)  # noqa: E731
        return cls(arr("h"), arr("s"), arr("a"), arr("h_se"), arr("s_se"), arr("a_se"),
                   float(d.get("residual", 0.0)), tuple(d.get("lengths_used", ())))


def _expectation(counts: Mapping[str, int], pos: int) -> tuple[float, float, int]:
    n = sum(counts.values())
    if n == 0:
        raise IdtError("empty counts")
    ones = sum(c for k, c in counts.items() if k[pos] == "1")
    e = 1 - 2 * ones / n
    # binomial variance, kept away from zero at the edges
    return e, (1 - e * e + 1 / n) / n, n


def _wls(x: np.ndarray, y: np.ndarray, var: np.ndarray) -> tuple[float, float, float]:
    """Weighted straight-line fit; returns slope, its standard error and chi^2 per dof."""
    w = 1 / var
    A = np.stack([np.ones_like(x), x], axis=1)
    cov = np.linalg.inv(A.T @ (A * w[:, None]))
    beta = cov @ (A.T @ (w * y))
    r = y - A @ beta
    dof = max(1, x.size - 2)
    return float(beta[1]), float(math.sqrt(cov[1, 1])), float((w * r * r).sum() / dof)


def _bloch_maps(suite: IdtSuite, results, pos: int):
    """Per length: R_L, var(R_L), t_L and var(t_L) for tomography position ``pos``."""
    E: dict[tuple, list] = {}
    for exp, counts in zip(suite.experiments, results):
        e, v, _ = _expectation(counts, pos)
        E.setdefault((exp.length, exp.prep[pos], exp.signs[pos], exp.meas[pos]), []).append((e, v))
    out = {}
    for L in sorted({x.length for x in suite.experiments}):
        R = np.full((3, 3), np.nan)
        Rv = np.full((3, 3), np.nan)
        t = np.zeros(3)
        tv = np.zeros(3)
        tn = np.zeros(3)
        for i, p in enumerate(AXES):
            for j, m in enumerate(AXES):
                plus = E.get((L, p, "+", m))
                minus = E.get((L, p, "-", m))
                if plus is None:
                    continue
                ep, vp = np.mean([x[0] for x in plus]), np.mean([x[1] for x in plus]) / len(plus)
                if minus is None:
                    R[j, i], Rv[j, i] = ep, vp
                    continue
                em, vm = np.mean([x[0] for x in minus]), np.mean([x[1] for x in minus]) / len(minus)
                R[j, i], Rv[j, i] = (ep - em) / 2, (vp + vm) / 4
                t[j] += (ep + em) / 2
                tv[j] += (vp + vm) / 4
                tn[j] += 1
        if np.isnan(R).any():
            raise IdtError(f"length {L}: suite lacks some prep/meas axis pairs")
        has_t = bool(tn.all())
        out[L] = (R, Rv, t / np.maximum(tn, 1) if has_t else None, tv / np.maximum(tn, 1) ** 2 if has_t else None)
    return out


def _estimate_one(maps) -> RateEstimate:
    lengths = sorted(maps)
    if len(lengths) < 2:
        raise IdtError("need at least two distinct idle lengths")
    drift = {L: float(np.abs(maps[L][0] - np.eye(3)).max()) for L in lengths}
    used = [L for L in lengths if drift[L] < SMALL_DRIFT]
    if len(used) < 2:
        used = lengths[:2]
    x = np.array(used, dtype=float)
    logs, lvars = [], []
    for L in used:
        R, Rv = maps[L][0], maps[L][1]
        lg = linalg.logm(R)
        if not np.all(np.isfinite(lg)) or np.abs(np.imag(lg)).max() > 1e-6:
            raise IdtError(f"degenerate fit: Bloch map at L={L} has no real logarithm")
        logs.append(np.real(lg))
        d = np.abs(np.diag(R))
        lvars.append(Rv / np.maximum(np.outer(d, d), 1e-6))
    logs, lvars = np.array(logs), np.array(lvars)
    G = np.zeros((3, 3))
    Gv = np.zeros((3, 3))
    chi = []
    for j in range(3):
        for i in range(3):
            G[j, i], se, c = _wls(x, logs[:, j, i], lvars[:, j, i])
            Gv[j, i] = se * se
            chi.append(c)
    h = np.array([(G[2, 1] - G[1, 2]) / 2, (G[0, 2] - G[2, 0]) / 2, (G[1, 0] - G[0, 1]) / 2])
    h_se = np.sqrt([(Gv[2, 1] + Gv[1, 2]) / 4, (Gv[0, 2] + Gv[2, 0]) / 4, (Gv[1, 0] + Gv[0, 1]) / 4])
    d = -np.diag(G) / 2
    dv = np.diag(Gv) / 4
    s = np.array([(d[1] + d[2] - d[0]) / 2, (d[0] + d[2] - d[1]) / 2, (d[0] + d[1] - d[2]) / 2])
    s_se = np.full(3, math.sqrt(dv.sum()) / 2)

    if maps[used[0]][2] is None:
        a, a_se = np.zeros(3), np.full(3, np.nan)
    else:
        M = linalg.expm(G)
        rows, ys, ws = [], [], []
        for L in used:
            K = sum(np.linalg.matrix_power(M, k) for k in range(L)) if L else np.zeros((3, 3))
            t, tv = maps[L][2], maps[L][3]
            for j in range(3):
                row = np.zeros(6)
                row[j] = 1.0
                row[3:] = K[j]
                rows.append(row)
                ys.append(t[j])
                ws.append(1 / tv[j])
        A, y, w = np.array(rows), np.array(ys), np.array(ws)
        cov = np.linalg.pinv(A.T @ (A * w[:, None]))
        beta = cov @ (A.T @ (w * y))
        a = beta[3:]
        a_se = np.sqrt(np.clip(np.diag(cov)[3:], 0, None))
        r = y - A @ beta
        chi.append(float((w * r * r).sum() / max(1, y.size - 6)))
    return RateEstimate(h, s, a, h_se, s_se, a_se, float(np.mean(chi)), tuple(used))


def estimate_hsa(suite: IdtSuite, results: Sequence[Mapping[str, int]]) -> dict[int, RateEstimate]:
    """Rates per tomography qubit (physical index) from suite counts."""
    if len(results) != len(suite.experiments):
        raise IdtError(f"{len(results)} results for {len(suite.experiments)} experiments")
    if len({e.length for e in suite.experiments}) < 2:
        raise IdtError("need at least two distinct idle lengths")
    k = len(suite.tomography)
    for r in results:
        if any(len(key) != k for key in r):
            raise IdtError(f"result bitstrings must have {k} bits")
    return {q: _estimate_one(_bloch_maps(suite, results, pos)) for pos, q in enumerate(suite.tomography)}


def build_crosstalk_entry(baseline: Mapping[int, RateEstimate], driven: Mapping[int, RateEstimate]) -> dict[int, HsaRates]:
    """Gate-induced rates per victim: driven minus idle baseline, stochastic part clipped at 0."""
    if set(baseline) != set(driven):
        raise IdtError("baseline and driven estimates cover different qubits")
    out = {}
    for q in sorted(driven):
        b, d = baseline[q], driven[q]
        s = np.clip(d.s - b.s, 0, None)
        if s.sum() > 1:
            s = s / s.sum()
        out[q] = HsaRates(tuple(d.h - b.h), tuple(s), tuple(d.a - b.a))
    return out


def model_from_idt(baseline: Mapping[int, RateEstimate], driven: Mapping[tuple, Mapping[int, RateEstimate]],
                   num_qubits: int | None = None) -> CrosstalkModel:
    """Assemble a CrosstalkModel from an idle suite and one driven suite per CNOT (control, target)."""
    idle = {q: est.rates for q, est in baseline.items()}
    gates = {("cnot", c, t): build_crosstalk_entry(
        {q: baseline[q] for q in est if q in baseline}, est) for (c, t), est in driven.items()}
    return CrosstalkModel(idle, gates, num_qubits)


def save_estimates(est: Mapping[int, RateEstimate], path) -> None:
    Path(path).write_text(json.dumps({str(q): e.to_dict() for q, e in sorted(est.items())}, indent=1))


def load_estimates(path) -> dict[int, RateEstimate]:
    return {int(q): RateEstimate.from_dict(d) for q, d in json.loads(Path(path).read_text()).items()}


__all__ = ["IdtError", "IdtExperiment", "IdtSuite", "RateEstimate", "build_crosstalk_entry", "estimate_hsa",
           "generate_idt_suite", "load_estimates", "model_from_idt", "run_suite", "save_estimates"]
