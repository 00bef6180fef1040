import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xtalk.bench import (attack_bench, build_benchmark, compare_scenarios, fvg_check, grover3, normalize,
                         toffoli_bench, tvd, uniform)
from xtalk.sim import simulate, success_probability

KEYS3 = ["".join(b) for b in itertools.product("01", repeat=3)]


def dists(k=3):
    return st.lists(st.floats(0, 1), min_size=2 ** k, max_size=2 ** k).filter(lambda v: sum(v) > 1e-3).map(
        lambda v: dict(zip(["".join(b) for b in itertools.product("01", repeat=k)], v)))


def event_oracle(P, Q):
    # max over all 2^8 events of |P(E) - Q(E)|
    p, q = normalize(P), normalize(Q)
    best = 0.0
    for mask in range(1 << len(KEYS3)):
        ev = [k for i, k in enumerate(KEYS3) if mask >> i & 1]
        best = max(best, abs(sum(p.get(k, 0) for k in ev) - sum(q.get(k, 0) for k in ev)))
    return best


def test_tvd_examples():
    assert tvd({"0": 1}, {"0": 0.5, "1": 0.5}) == pytest.approx(0.5)
    assert tvd({"00": 3, "11": 1}, {"00": 0.75, "11": 0.25}) == pytest.approx(0.0)
    assert tvd({"0": 1}, {"1": 1}) == 1.0


@settings(max_examples=60)
@given(dists(), dists())
def test_tvd_equals_event_oracle(P, Q):
    assert tvd(P, Q) == pytest.approx(event_oracle(P, Q), abs=1e-12)


@settings(max_examples=300)
@given(dists(), dists(), dists())
def test_tvd_metric_axioms(P, Q, R):
    assert 0 <= tvd(P, Q) <= 1
    assert tvd(P, Q) == pytest.approx(tvd(Q, P), abs=1e-15)
    assert tvd(P, P) < 1e-12
    assert tvd(P, R) <= tvd(P, Q) + tvd(Q, R) + 1e-12


@given(dists(), dists())
def test_tvd_one_iff_disjoint(P, Q):
    p = {k: v for k, v in P.items() if k < "100" and v > 0}
    q = {k: v for k, v in Q.items() if k >= "100" and v > 0}
    if p and q:
        assert tvd(p, q) == 1.0
    if tvd(P, Q) == 1.0:
        assert not ({k for k, v in P.items() if v > 0} & {k for k, v in Q.items() if v > 0})


def test_tvd_rejects_bad_input():
    with pytest.raises(ValueError):
        tvd({"0": -1}, {"0": 1})
    with pytest.raises(ValueError):
        tvd({"0": 1}, {"00": 1})
    with pytest.raises(ValueError):
        tvd({}, {"0": 1})


def _rand_state(rng, d=4):
    rank = rng.integers(1, d + 1)
    m = rng.normal(size=(d, rank)) + 1j * rng.normal(size=(d, rank))
    rho = m @ m.conj().T
    return rho / np.trace(rho).real


def test_fvg_edge_cases():
    rho = np.diag([1, 0, 0, 0]).astype(complex)
    D, F, ok = fvg_check(rho, rho)
    assert (D, ok) == (pytest.approx(0, abs=1e-12), True) and F == pytest.approx(1)
    D, F, ok = fvg_check(rho, np.diag([0, 1, 0, 0]).astype(complex))
    assert D == pytest.approx(1) and F == pytest.approx(0, abs=1e-12) and ok
    with pytest.raises(ValueError):
        fvg_check(rho, np.eye(2) / 2)


def test_fvg_bounds_random_pairs():
    rng = np.random.default_rng(11)
    for _ in range(2000):
        assert fvg_check(_rand_state(rng), _rand_state(rng))[2]


def test_grover_closed_form():
    theta = math.asin(1 / math.sqrt(8))
    for t in ("110", "011", "000"):
        rho = simulate(grover3(t)).state
        assert success_probability(rho, t) == pytest.approx(math.sin(5 * theta) ** 2, abs=1e-12)
    res = simulate(grover3("110"), shots=4096, seed=1)
    assert max(res.counts, key=res.counts.get) == "110"


def test_benchmarks_shapes():
    assert build_benchmark("syn_10").count_ops()["cnot"] == 10
    assert build_benchmark("syn30").count_ops()["cnot"] == 30
    with pytest.raises(ValueError):
        build_benchmark("nope")


@pytest.mark.parametrize("n", [2, 4])
def test_toffoli_even_is_identity(n):
    # the benchmark prepares |110> itself
    res = simulate(toffoli_bench(n), shots=200, seed=0)
    assert res.counts == {"110": 200}


def test_benchmark_json_deterministic():
    for name in ("syn_10", "toffoli", "grover3", "attack"):
        assert build_benchmark(name).to_json() == build_benchmark(name).to_json()


def test_compare_scenarios_self_reference(model):
    c = grover3()
    qmap = [11, 14, 16]
    ref = simulate(c, model, shots=2048, seed=4, qubit_map=qmap).counts
    rep = compare_scenarios(c, ref, {"crosstalk": model}, 2048, 4, qubit_map=qmap)
    assert rep.tvd["crosstalk"] == 0.0


def test_pseudo_device_ordering(model):
    c = attack_bench()
    qmap = [11, 14, 16, 12, 13]
    ref = simulate(c, model, shots=8192, seed=101, qubit_map=qmap, keep=range(3)).counts
    rep = compare_scenarios(c, ref, {"none": None, "crosstalk": model}, 8192, 202, qubit_map=qmap, keep=range(3))
    assert rep.tvd["none"] > rep.tvd["crosstalk"]


def test_attack_bench_near_uniform(model):
    c = attack_bench()
    res = simulate(c, model, shots=8192, seed=0, qubit_map=[11, 14, 16, 12, 13], keep=range(3))
    assert tvd(res.counts, uniform(3)) < 0.15
