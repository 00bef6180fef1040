import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.stats import binom

from xtalk.noise import DEFAULT_SYNTH, synth_default_model
from xtalk.spectator import (SpectatorConfig, azimuth, bloch_trajectory, detection_rate, post_select,
                             run_detection_shot, sweep_waiting_time)


def exact_eta(config, model):
    """Independent oracle: cycles are i.i.d., each exposes a fresh |0> spectator for tau units."""
    (_, sq), = bloch_trajectory(replace(config, duration=max(config.duration, config.tau)), model, [config.tau])
    p = (1 - sq[2]) / 2
    pe = p * (1 - config.flip) + (1 - p) * config.flip
    return float(binom.sf(config.threshold, config.cycles, pe))


def tail_sigma(p, n):
    return math.sqrt(p * (1 - p) / n)


@pytest.fixture(scope="module")
def sweep(model):
    return sweep_waiting_time(SpectatorConfig(), model, range(1, 21))


def test_initial_bloch_vectors(model):
    (dq, sq), = bloch_trajectory(SpectatorConfig(), model, [0])
    assert np.allclose(dq, [1, 0, 0]) and np.allclose(sq, [0, 0, 1])


def test_zero_model_trajectory_constant(device):
    topo, cal = device
    m0 = synth_default_model(topo, alpha=0.0, calibration=cal)
    for dq, sq in bloch_trajectory(SpectatorConfig(), m0, [0, 5, 40]):
        assert np.allclose(dq, [1, 0, 0], atol=1e-12) and np.allclose(sq, [0, 0, 1], atol=1e-12)


def test_correlated_rotation(model):
    tr = bloch_trajectory(SpectatorConfig(), model, [1, 2, 3])
    dq = [azimuth(d) for d, _ in tr]
    sq = [azimuth(s) for _, s in tr]
    for i in range(2):
        assert np.sign(dq[i + 1] - dq[i]) == np.sign(sq[i + 1] - sq[i]) != 0


def test_trajectory_time_errors(model):
    with pytest.raises(ValueError):
        bloch_trajectory(SpectatorConfig(), model, [5, 2])
    with pytest.raises(ValueError):
        bloch_trajectory(SpectatorConfig(duration=10), model, [11])


def test_no_attack_no_noise_no_flags():
    cfg = SpectatorConfig(flip=0.0)
    rng = np.random.default_rng(0)
    assert all(run_detection_shot(cfg, False, None, rng) == 0 for _ in range(20))


def test_flip_only_flag_mean():
    cfg = SpectatorConfig(tau=1, duration=100, attack_fraction=0.0)
    out = detection_rate(cfg, None)
    assert out.cycles == 100
    assert out.flags.mean() == pytest.approx(1.0, abs=0.3)


def test_attacked_flags_separate_from_clean(model):
    out = detection_rate(SpectatorConfig(tau=7, attack_fraction=0.5), model)
    att, clean = out.flags[out.attacked], out.flags[~out.attacked]
    assert att.mean() - clean.mean() >= 5 * clean.std()


def test_zero_model_nothing_to_detect(device):
    topo, cal = device
    m0 = synth_default_model(topo, alpha=0.0, calibration=cal)
    assert detection_rate(SpectatorConfig(flip=0.0), m0).eta == 0.0
    # with readout flips the only detections are the binomial tail
    cfg = SpectatorConfig()
    eta = detection_rate(cfg, m0).eta
    p = binom.sf(cfg.threshold, cfg.cycles, cfg.flip)
    assert abs(eta - p) <= 3 * tail_sigma(p, cfg.shots)


def test_false_positive_rate_matches_binomial_tail(model):
    cfg = SpectatorConfig(attack_fraction=0.0)
    fp = detection_rate(cfg, model).false_positive_rate
    p = binom.sf(cfg.threshold, cfg.cycles, cfg.flip)
    assert fp < 0.02
    assert abs(fp - p) <= 3 * tail_sigma(p, cfg.shots)


def test_eta_at_tau_7(model):
    assert 0.8 <= detection_rate(SpectatorConfig(tau=7), model).eta <= 1.0


@pytest.mark.parametrize("tau", [1, 4, 8, 12, 20, 32])
def test_eta_matches_exact_oracle(model, tau):
    cfg = SpectatorConfig(tau=tau)
    want = exact_eta(cfg, model)
    got = detection_rate(cfg, model).eta
    assert abs(got - want) <= 3 * max(tail_sigma(want, cfg.shots), 1 / cfg.shots)


def test_sweep_interior_maximum(sweep, model):
    assert sweep.eta_star > sweep.eta[0] and sweep.eta_star > sweep.eta[-1]
    assert sweep.taus[0] < sweep.tau_star < sweep.taus[-1]
    late = detection_rate(SpectatorConfig(tau=4 * sweep.tau_star), model).eta
    assert late < sweep.eta_star


def test_sweep_csv(sweep):
    lines = sweep.to_csv().splitlines()
    assert lines[0] == "tau,eta,false_positive" and len(lines) == 21


def test_eta_monotone_in_alpha(device):
    topo, cal = device
    etas = []
    for k in (0.5, 0.75, 1.0):
        kw = {**DEFAULT_SYNTH, "alpha": DEFAULT_SYNTH["alpha"] * k}
        etas.append(detection_rate(SpectatorConfig(tau=7), synth_default_model(topo, calibration=cal, **kw)).eta)
    assert etas[0] <= etas[1] <= etas[2]


def test_post_selection_clean_run_is_all_zero():
    ps = post_select(SpectatorConfig(data=(11, 10), attack_fraction=0.0, flip=0.0, shots=200), None)
    assert ps.all_counts == ps.retained_counts == {"00": 200}


@pytest.mark.parametrize("seed", range(5))
def test_post_selection_improves(model, seed):
    cfg = SpectatorConfig(data=(11, 10), tau=8, attack_fraction=0.2, seed=seed)
    ps = post_select(cfg, model)
    assert ps.p("00") > ps.p("00", retained=False)
    assert ps.n_retained / ps.n_shots >= 0.75
    assert ps.clean_retained_fraction >= 0.75


def test_post_select_needs_two_data_qubits(model):
    with pytest.raises(ValueError):
        post_select(SpectatorConfig(), model)


def test_detection_deterministic(model):
    cfg = SpectatorConfig(attack_fraction=0.3, shots=300, seed=5)
    a, b = detection_rate(cfg, model), detection_rate(cfg, model, workers=2)
    assert np.array_equal(a.flags, b.flags) and np.array_equal(a.attacked, b.attacked)


def test_aggregate_mode_reported(model):
    agg = detection_rate(SpectatorConfig(shots=200), model).summary()["aggregate"]
    assert agg["attack_indicated"] and agg["total_flags"] > agg["expected_clean"]


def test_outcome_invariants(model):
    out = detection_rate(SpectatorConfig(attack_fraction=0.5, shots=300), model)
    assert 0 <= out.eta <= 1
    assert np.all(out.flags[out.detected] > out.threshold)


@pytest.mark.parametrize("kw", [dict(tau=0), dict(f0=-1), dict(shots=0), dict(flip=1.5), dict(attack_fraction=-0.1),
                                dict(spectator=11), dict(spectator=12), dict(attack=(12, 12)),
                                dict(tau=100, duration=80)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SpectatorConfig(**kw)


def test_default_threshold():
    assert SpectatorConfig(tau=1, duration=100).threshold == 3
    assert SpectatorConfig(tau=7).threshold == 1
    assert SpectatorConfig(f0=11).threshold == 11
