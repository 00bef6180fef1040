import numpy as np
import pytest

from xtalk.bench import grover3
from xtalk.device import DeviceError
from xtalk.experiments import (SWEEP_VICTIM, TABLE_I_ATTACK, TABLE_I_ROWS, calibrate_alpha, run_placement_table,
                               run_separation_sweep, summarize, table_i, table_ii, victim_fidelity)
from xtalk.noise import DEFAULT_SYNTH, synth_default_model


@pytest.fixture(scope="module")
def sweep(model, device):
    topo, cal = device
    return run_separation_sweep(grover3(), SWEEP_VICTIM, range(5), model, topo, cal, workers=2)


def test_sweep_trend_and_spread(sweep):
    m = sweep.means()
    assert m[0] < m[1] < m[2]
    assert sweep.summary(2)["spread"] < sweep.summary(0)["spread"]


def test_sweep_spearman(sweep):
    assert sweep.spearman() >= 0.9


def test_sweep_independent_of_workers(sweep, model, device):
    topo, cal = device
    again = run_separation_sweep(grover3(), SWEEP_VICTIM, range(5), model, topo, cal, workers=1)
    assert again.to_csv() == sweep.to_csv()


def test_zero_strength_sweep_flat(device):
    topo, cal = device
    m0 = synth_default_model(topo, alpha=0.0, calibration=cal)
    sw = run_separation_sweep(grover3(), SWEEP_VICTIM, [0, 1, 2], m0, topo, cal)
    vals = [f for r in (0, 1, 2) for f in sw.fidelities(r)]
    assert vals and np.allclose(vals, 1.0, atol=1e-12)


def test_summary_single_value():
    s = summarize([0.7])
    assert s["mean"] == s["min"] == s["max"] == s["median"] == 0.7 and s["spread"] == 0


def test_table_i_calibrated(model, device):
    topo, _ = device
    t = table_i(model, topo)
    f = [r.fidelity for r in t.rows]
    assert 0.40 <= f[0] <= 0.60
    assert max(f) >= 0.85
    assert all(b > a for a, b in zip(f, f[1:]))
    assert [r.radius for r in t.rows] == [0, 2, 3, 4, 5]


def test_table_ii_spread(model, device):
    topo, _ = device
    f = [r.fidelity for r in table_ii(model, topo).rows]
    assert max(f) - min(f) >= 0.05


def test_zero_strength_table_flat(device):
    topo, cal = device
    m0 = synth_default_model(topo, alpha=0.0, calibration=cal)
    f = [r.fidelity for r in table_i(m0, topo).rows]
    assert np.allclose(f, f[0], atol=1e-12)


def test_overlap_rejected(model, device):
    topo, _ = device
    with pytest.raises(DeviceError):
        run_placement_table(grover3(), [(3, 4, 5)], TABLE_I_ATTACK, model, topo)


def test_shipped_alpha_matches_calibration(device):
    topo, cal = device
    kw = {k: v for k, v in DEFAULT_SYNTH.items() if k != "alpha"}
    a = calibrate_alpha(topo, cal, 0.49, **kw)
    assert a == pytest.approx(DEFAULT_SYNTH["alpha"], rel=0.01)
    m = synth_default_model(topo, alpha=a, calibration=cal, **kw)
    assert victim_fidelity(grover3(), TABLE_I_ROWS[0], TABLE_I_ATTACK, m) == pytest.approx(0.49, abs=0.005)
