import hashlib
import json
import subprocess
import sys

import pytest

from xtalk.cli import EXIT_INPUT, EXIT_USAGE, main


def run(*argv):
    return main([str(a) for a in argv])


def digest(path):
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_unknown_subcommand_is_usage_error(capsys):
    assert run("frobnicate") == EXIT_USAGE
    assert "usage" in capsys.readouterr().err


def test_unknown_flag_is_usage_error():
    assert run("bench", "run", "--bogus") == EXIT_USAGE


def test_missing_file_is_input_error(tmp_path, capsys):
    assert run("idt", "run", "--suite", tmp_path / "absent.json") == EXIT_INPUT
    assert "input error" in capsys.readouterr().err


def test_malformed_device_is_input_error(tmp_path):
    bad = tmp_path / "dev.json"
    bad.write_text(json.dumps({"n": 2, "edges": [[0, 7]]}))
    assert run("device", "show", "--device", bad) == EXIT_INPUT


def test_bench_grover_noise_free(tmp_path):
    out = tmp_path / "g.json"
    assert run("bench", "run", "--circuit", "grover3", "--noise", "none", "--shots", 4096, "--seed", 1,
               "--out", out) == 0
    counts = json.loads(out.read_text())["counts"]
    assert max(counts, key=counts.get) == "110" and counts["110"] / 4096 > 0.9
    assert (tmp_path / "g.json.manifest.json").exists()


def test_zero_alpha_sweep_flat(tmp_path):
    model = tmp_path / "m0.json"
    sweep = tmp_path / "s.csv"
    assert run("model", "synth", "--alpha", 0, "--out", model) == 0
    assert run("separation", "sweep", "--model", model, "--radii", "0..2", "--out", sweep, "--workers", 1) == 0
    lines = sweep.read_text().splitlines()
    assert lines[0] == "radius,placement,fidelity"
    fids = {float(r.rsplit(",", 1)[1]) for r in lines[1:]}
    assert fids == {1.0}


@pytest.mark.parametrize("argv", [
    ["spectator", "sweep", "--tau", "3,8", "--shots", 200],
    ["bench", "run", "--circuit", "attack", "--placement", "11,14,16,12,13", "--shots", 2048],
    ["separation", "sweep", "--radii", "0,2"],
])
def test_replay_byte_identical_any_workers(tmp_path, argv):
    out = tmp_path / "o.txt"
    assert run(*argv, "--seed", 7, "--workers", 1, "--out", out) == 0
    manifest = tmp_path / "o.txt.manifest.json"
    again = tmp_path / "again.txt"
    assert run("replay", manifest, "--out", again, "--workers", 3) == 0
    assert digest(again) == digest(out)


def test_manifest_fields(tmp_path):
    out = tmp_path / "t.json"
    assert run("separation", "table", "--which", 2, "--out", out) == 0
    man = json.loads((tmp_path / "t.json.manifest.json").read_text())
    assert {"command", "config", "seed", "artifacts", "wall_time_s", "version"} <= set(man)
    assert man["command"] == "separation table" and man["config"]["which"] == "2"


def test_inputs_not_mutated(tmp_path):
    suite = tmp_path / "suite.json"
    assert run("idt", "gen", "--driven", "1,2", "--tomography", "0", "--lengths", "1,2", "--device", _path3(tmp_path),
               "--out", suite) == 0
    before = digest(suite)
    res = tmp_path / "res.json"
    assert run("idt", "run", "--suite", suite, "--shots", 100, "--noise", "none", "--device", _path3(tmp_path),
               "--out", res) == 0
    res_before = digest(res)
    assert run("idt", "fit", "--suite", suite, "--results", res, "--out", tmp_path / "fit.json") == 0
    assert digest(suite) == before and digest(res) == res_before


def _path3(tmp_path):
    p = tmp_path / "path3.json"
    if not p.exists():
        p.write_text(json.dumps({"n": 3, "edges": [[0, 1], [1, 2]]}))
    return p


def test_config_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"shots": 64, "noise": "none", "seed": 3}))
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("bench", "run", "--config", cfg, "--out", a) == 0
    got = json.loads(a.read_text())
    assert got["shots"] == 64 and got["seed"] == 3
    assert run("bench", "run", "--config", cfg, "--shots", 32, "--out", b) == 0
    assert json.loads(b.read_text())["shots"] == 32


def test_unknown_config_key_rejected(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"nonsense": 1}))
    assert run("bench", "run", "--config", cfg) == EXIT_INPUT


def test_postselect_output(tmp_path):
    out = tmp_path / "h.json"
    assert run("spectator", "postselect", "--shots", 300, "--out", out) == 0
    d = json.loads(out.read_text())
    assert d["retained"]["00"] > d["all"]["00"]


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "xtalk.cli", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "xtalk" in res.stdout
