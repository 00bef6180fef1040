"""Command-line entry point: ``xtalk <group> <command> [options]``.

Every command that writes ``--out`` also writes ``<out>.manifest.json`` with
the resolved configuration, and ``xtalk replay <manifest>`` re-runs it.
Option values come from flags, then the ``--config`` JSON file (a flat
object keyed by option name, dashes or underscores), then defaults.

Seeds: one ``--seed`` drives everything. Sampling commands pass it straight
to the simulator; ``rl train`` draws its training circuits from
``derive_seed(seed, 1)`` and its held-out circuits from ``derive_seed(seed, 2)``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time
from pathlib import Path

from . import __version__

EXIT_USAGE, EXIT_INPUT, EXIT_RUNTIME = 1, 2, 3
DEVICE_ENV = "XTALK_DEVICE"


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


# --- helpers ----------------------------------------------------------------------


def _ints(text: str) -> list[int]:
    """``"1,2,5"`` or ``"1..4"`` (inclusive) or a mix."""
    out: list[int] = []
    for part in str(text).split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..")
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def _pair(text) -> tuple[int, int] | None:
    if text is None or str(text).lower() == "none":
        return None
    v = _ints(text)
    if len(v) != 2:
        raise InputError(f"expected a qubit pair like 12,13, got {text!r}")
    return v[0], v[1]


def _atomic_write(path: Path, data: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dumps(obj) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


def _device(args):
    from .device import load_bundled_device, load_device

    path = args.device or os.environ.get(DEVICE_ENV)
    if path:
        return load_device(path, strict=not args.lenient)
    return load_bundled_device()


def _model(args, topo, cal):
    from .noise import DEFAULT_SYNTH, load_model, synth_default_model

    if getattr(args, "model", None):
        return load_model(args.model, topo)
    return synth_default_model(topo, calibration=cal, **DEFAULT_SYNTH)


def _noise(args, topo, cal):
    from .noise import BaselineNoise, NoiseSpec

    kind = args.noise
    if kind == "none":
        return None
    if cal is None and kind in ("baseline", "combined"):
        raise InputError("baseline noise needs a device file with calibration data")
    if kind == "crosstalk":
        return _model(args, topo, cal)
    if kind == "baseline":
        from .noise import DEFAULT_SYNTH

        return BaselineNoise.from_calibration(cal, DEFAULT_SYNTH["unit_us"], args.readout)
    if kind == "combined":
        gates = BaselineNoise({}, {}, dict(cal.cx_error), {q: args.readout for q in range(topo.num_qubits)}
                              if args.readout else {})
        return NoiseSpec(crosstalk=_model(args, topo, cal), baseline=gates)
    raise InputError(f"unknown noise kind {kind!r}")


def _circuit(spec: str, **kw):
    from .bench import build_benchmark
    from .circuit import Circuit

    p = Path(spec)
    if p.suffix == ".json" or p.exists():
        return Circuit.from_json(p.read_text())
    return build_benchmark(spec, **kw)


# --- command handlers: each returns the output text -------------------------------


def cmd_device_show(args):
    from .device import device_to_dict

    topo, cal = _device(args)
    if args.json:
        return _dumps(device_to_dict(topo, cal))
    lines = [f"{topo.name}: {topo.num_qubits} qubits, {len(topo.edges)} edges"]
    for q in range(topo.num_qubits):
        nb = ",".join(map(str, topo.neighbors(q)))
        extra = f"  T1={cal.t1[q]:.1f}us T2={cal.t2[q]:.1f}us" if cal else ""
        lines.append(f"  q{q:<3d} -> {nb}{extra}")
    if cal:
        dead = sorted(cal.dead_edges())
        lines.append(f"  dead edges: {', '.join(f'{a}-{b}' for a, b in dead) or 'none'}")
    return "\n".join(lines) + "\n"


def cmd_model_synth(args):
    from .noise import DEFAULT_SYNTH, synth_default_model

    topo, cal = _device(args)
    kw = {k: getattr(args, k) for k in ("coherent_fraction", "tilt", "unit_us", "edge_exponent", "victim_exponent")}
    kw = {k: (DEFAULT_SYNTH[k] if v is None else v) for k, v in kw.items()}
    alpha = DEFAULT_SYNTH["alpha"] if args.alpha is None else args.alpha
    beta = DEFAULT_SYNTH["beta"] if args.beta is None else args.beta
    cutoff = DEFAULT_SYNTH["cutoff"] if args.cutoff is None else args.cutoff
    m = synth_default_model(topo, alpha, beta, cutoff, None if args.uncalibrated else cal, **kw)
    return json.dumps(m.to_dict(), indent=1, sort_keys=True) + "\n"


def cmd_idt_gen(args):
    from .idt import generate_idt_suite

    topo, _ = _device(args)
    tomo = _ints(args.tomography) if args.tomography else None
    suite = generate_idt_suite(topo, _pair(args.driven), _ints(args.lengths), tomography=tomo,
                               signed=not args.unsigned)
    return _dumps(suite.to_dict())


def cmd_idt_run(args):
    from .idt import IdtSuite, run_suite

    topo, cal = _device(args)
    suite = IdtSuite.from_dict(json.loads(Path(args.suite).read_text()))
    results = run_suite(suite, _noise(args, topo, cal), args.shots, args.seed)
    return _dumps({"shots": args.shots, "seed": args.seed, "counts": results})


def cmd_idt_fit(args):
    from .idt import IdtSuite, RateEstimate, build_crosstalk_entry, estimate_hsa

    suite = IdtSuite.from_dict(json.loads(Path(args.suite).read_text()))
    results = json.loads(Path(args.results).read_text())["counts"]
    est = estimate_hsa(suite, results)
    out = {"estimates": {str(q): e.to_dict() for q, e in sorted(est.items())}}
    if args.baseline:
        base = {int(q): RateEstimate.from_dict(d)
                for q, d in json.loads(Path(args.baseline).read_text())["estimates"].items()}
        base = {q: base[q] for q in est if q in base}
        entry = build_crosstalk_entry(base, est)
        if len(suite.driven) == 2:
            c, t = suite.driven
            out["crosstalk"] = {f"cnot:{c},{t}": {str(v): r.to_dict() for v, r in entry.items()}}
    return _dumps(out)


def cmd_bench_run(args):
    from .bench import compare_scenarios
    from .sim import simulate

    topo, cal = _device(args)
    circ = _circuit(args.circuit, target=args.target, n=args.n)
    placement = _ints(args.placement) if args.placement else list(range(circ.num_qubits))
    noise = _noise(args, topo, cal)
    res = simulate(circ, noise, shots=args.shots, seed=args.seed, qubit_map=placement, workers=args.workers)
    out = {"circuit": args.circuit, "noise": args.noise, "shots": args.shots, "seed": args.seed,
           "placement": placement, "counts": res.counts}
    if args.reference:
        ref = json.loads(Path(args.reference).read_text())
        ref = ref.get("counts", ref)
        rep = compare_scenarios(circ, ref, {args.noise: noise}, args.shots, args.seed, qubit_map=placement,
                                workers=args.workers)
        out["tvd_to_reference"] = rep.tvd[args.noise]
    return _dumps(out)


def cmd_separation_sweep(args):
    from .bench import grover3
    from .experiments import run_separation_sweep

    topo, cal = _device(args)
    victim = _circuit(args.circuit, target=args.target) if args.circuit != "grover3" else grover3(args.target)
    sw = run_separation_sweep(victim, _ints(args.victim_placement), _ints(args.radii), _model(args, topo, cal),
                              topo, cal, workers=args.workers)
    return sw.to_csv()


def cmd_separation_table(args):
    from .experiments import TABLE_I_ATTACK, TABLE_I_ROWS, TABLE_II_ATTACK, TABLE_II_ROWS, run_placement_table
    from .bench import grover3

    topo, cal = _device(args)
    rows, attack = (TABLE_I_ROWS, TABLE_I_ATTACK) if args.which == "1" else (TABLE_II_ROWS, TABLE_II_ATTACK)
    if args.attack:
        attack = _pair(args.attack)
    if args.rows:
        rows = [tuple(_ints(r)) for r in args.rows.split(";")]
    comp = run_placement_table(grover3(args.target), rows, attack, _model(args, topo, cal), topo, args.target)
    return _dumps(comp.to_dict())


def cmd_attack_demo(args):
    from .experiments import ATTACK_DEMO_ATTACK, ATTACK_DEMO_VICTIM, attack_demo

    topo, cal = _device(args)
    victim = tuple(_ints(args.victim)) if args.victim else ATTACK_DEMO_VICTIM
    attack = _pair(args.attack) if args.attack else ATTACK_DEMO_ATTACK
    return _dumps(attack_demo(_model(args, topo, cal), args.shots, args.seed, args.target, victim, attack))


def _rl_env(args, topo, cal, model=None):
    from .rl import Environment

    dead = tuple(sorted(cal.dead_edges())) if cal else ()
    return Environment(model if model is not None else _model(args, topo, cal), topo, dead=dead)


def _rl_config(args, **over):
    from .rl import TrainingConfig

    kw = dict(lr=args.lr, episodes=args.episodes, K=args.K, hidden=args.hidden, baseline=args.baseline,
              samples=args.samples, seed=args.seed, finetune_fraction=args.finetune_fraction,
              decay_interval=args.decay_interval, decay_factor=args.decay_factor)
    kw.update(over)
    return TrainingConfig(**kw)


def cmd_rl_train(args):
    from .rl import TrainingLog, gen_training_circuits, train
    from .spectator import derive_seed

    topo, cal = _device(args)
    env = _rl_env(args, topo, cal)
    circuits = gen_training_circuits(args.circuits, seed=derive_seed(args.seed, 1), topology=topo)
    log = TrainingLog()
    pol = train(_rl_config(args), circuits, env, workers=args.workers, log=log)
    if args.curve:
        _atomic_write(Path(args.curve), log.to_csv())
    return json.dumps(pol.to_dict()) + "\n"


def cmd_rl_finetune(args):
    from .noise import boost_qubits
    from .rl import PolicyNetwork, fine_tune, gen_training_circuits
    from .spectator import derive_seed

    topo, cal = _device(args)
    pol = PolicyNetwork.load(args.policy)
    model = _model(args, topo, cal)
    if args.boost:
        model = boost_qubits(model, _ints(args.boost), args.factor)
    env = _rl_env(args, topo, cal, model)
    circuits = gen_training_circuits(args.circuits, seed=derive_seed(args.seed, 1), topology=topo)
    cfg = _rl_config(args, K=pol.shape[2], hidden=pol.shape[1], seed=int(pol.config.get("seed", args.seed)))
    out = fine_tune(pol, env, circuits, cfg, workers=args.workers)
    return json.dumps(out.to_dict()) + "\n"


def cmd_rl_map(args):
    from .rl import PolicyNetwork, predict

    topo, cal = _device(args)
    pol = PolicyNetwork.load(args.policy)
    circ = _circuit(args.circuit, target=args.target)
    env = _rl_env(args, topo, cal)
    if args.attack:
        env.attack = _pair(args.attack)
    placement = predict(pol, circ, env)
    return _dumps({"circuit": args.circuit, "placement": list(placement)})


def _spectator_config(args, **over):
    from .spectator import SpectatorConfig

    kw = dict(spectator=args.spectator, data=tuple(_ints(args.data)), attack=_pair(args.attack),
              tau=getattr(args, "tau", 1), f0=args.f0, shots=args.shots, flip=args.flip, attack_fraction=args.attack_frac,
              duration=args.duration, seed=args.seed)
    kw.update(over)
    return SpectatorConfig(**kw)


def cmd_spectator_sweep(args):
    from .spectator import sweep_waiting_time

    topo, cal = _device(args)
    taus = _ints(args.taus)
    cfg = _spectator_config(args, tau=min(taus), attack_fraction=1.0)
    sw = sweep_waiting_time(cfg, _model(args, topo, cal), taus, workers=args.workers, clean_shots=args.clean_shots)
    return sw.to_csv()


def cmd_spectator_postselect(args):
    from .spectator import post_select

    topo, cal = _device(args)
    ps = post_select(_spectator_config(args), _model(args, topo, cal), workers=args.workers)
    return _dumps(ps.to_dict())


# --- parser -----------------------------------------------------------------------


def _common(p):
    g = p.add_argument_group("common")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    g.add_argument("--config", default=None, help="JSON file of option defaults")
    g.add_argument("--device", default=None, help=f"device JSON (default: ${DEVICE_ENV} or the bundled device)")
    g.add_argument("--lenient", action="store_true", help="clamp T2 > 2*T1 instead of failing")
    g.add_argument("--out", default=None, help="output file (default: standard output)")


def _model_opt(p):
    p.add_argument("--model", default=None, help="crosstalk model JSON (default: shipped model)")


def _noise_opt(p, default="crosstalk"):
    _model_opt(p)
    p.add_argument("--noise", choices=["none", "baseline", "crosstalk", "combined"], default=default)
    p.add_argument("--readout", type=float, default=0.0, help="readout flip probability for baseline noise")


def build_parser() -> argparse.ArgumentParser:
    root = _Parser(prog="xtalk", description="Crosstalk simulation, placement and detection experiments.")
    root.add_argument("--version", action="version", version=f"xtalk {__version__}")
    groups = root.add_subparsers(dest="group", metavar="{device,model,idt,bench,separation,attack,rl,spectator,replay}",
                                 parser_class=_Parser)
    groups.required = True

    def group(name, help):
        g = groups.add_parser(name, help=help)
        sub = g.add_subparsers(dest="command", parser_class=_Parser)
        sub.required = True
        return sub

    def cmd(sub, name, fn, help):
        p = sub.add_parser(name, help=help)
        _common(p)
        p.set_defaults(func=fn)
        return p

    sub = group("device", "inspect device descriptions")
    p = cmd(sub, "show", cmd_device_show, "print adjacency and calibration summary")
    p.add_argument("--json", action="store_true")

    sub = group("model", "build crosstalk models")
    p = cmd(sub, "synth", cmd_model_synth, "distance-decay model for the device")
    for name in ("alpha", "beta", "coherent_fraction", "tilt", "unit_us", "edge_exponent", "victim_exponent"):
        p.add_argument("--" + name.replace("_", "-"), dest=name, type=float, default=None)
    p.add_argument("--cutoff", type=int, default=None)
    p.add_argument("--uncalibrated", action="store_true", help="ignore calibration weights")

    sub = group("idt", "idle tomography")
    p = cmd(sub, "gen", cmd_idt_gen, "generate a suite")
    p.add_argument("--driven", default="none", help="driven CNOT pair, e.g. 12,13, or none")
    p.add_argument("--lengths", default="1,2,4,8,16")
    p.add_argument("--tomography", default=None, help="tomography qubits (default: all others)")
    p.add_argument("--unsigned", action="store_true", help="only + eigenstate preparations")
    p = cmd(sub, "run", cmd_idt_run, "simulate a suite")
    p.add_argument("--suite", required=True)
    p.add_argument("--shots", type=int, default=10000)
    _noise_opt(p)
    p = cmd(sub, "fit", cmd_idt_fit, "estimate HSA rates")
    p.add_argument("--suite", required=True)
    p.add_argument("--results", required=True)
    p.add_argument("--baseline", default=None, help="estimates JSON of an undriven suite")

    sub = group("bench", "benchmark circuits")
    p = cmd(sub, "run", cmd_bench_run, "sample a benchmark circuit")
    p.add_argument("--circuit", default="grover3", help="grover3, toffoli, syn10, attack or a circuit JSON")
    p.add_argument("--target", default="110")
    p.add_argument("--n", type=int, default=10, help="Toffoli repetitions")
    p.add_argument("--placement", default=None, help="physical qubits for circuit qubits 0..n-1")
    p.add_argument("--shots", type=int, default=8192)
    p.add_argument("--reference", default=None, help="counts JSON to compute TVD against")
    _noise_opt(p)

    sub = group("separation", "separation-radius experiments")
    p = cmd(sub, "sweep", cmd_separation_sweep, "fidelity versus separation radius")
    p.add_argument("--circuit", default="grover3")
    p.add_argument("--target", default="110")
    p.add_argument("--victim-placement", dest="victim_placement", default="12,13,14")
    p.add_argument("--radii", default="0..4")
    _model_opt(p)
    p = cmd(sub, "table", cmd_separation_table, "placement table beside a fixed attack")
    p.add_argument("--which", choices=["1", "2"], default="1")
    p.add_argument("--attack", default=None)
    p.add_argument("--rows", default=None, help="placements separated by ';', e.g. '0,1,2;3,5,8'")
    p.add_argument("--target", default="110")
    _model_opt(p)

    sub = group("attack", "crosstalk attack")
    p = cmd(sub, "demo", cmd_attack_demo, "grover3 beside a repeated-CNOT attack")
    p.add_argument("--shots", type=int, default=8192)
    p.add_argument("--target", default="110")
    p.add_argument("--victim", default=None)
    p.add_argument("--attack", default=None)
    _model_opt(p)

    sub = group("rl", "policy-gradient mapper")
    for name, fn, help in (("train", cmd_rl_train, "train a policy"),
                           ("finetune", cmd_rl_finetune, "fine-tune on a changed noise landscape")):
        p = cmd(sub, name, fn, help)
        p.add_argument("--circuits", type=int, default=5000)
        p.add_argument("--lr", type=float, default=0.05)
        p.add_argument("--episodes", type=int, default=1 if name == "train" else 20)
        p.add_argument("--K", type=int, default=16)
        p.add_argument("--hidden", type=int, default=64)
        p.add_argument("--baseline", choices=["none", "running", "batch"], default="batch")
        p.add_argument("--samples", type=int, default=4)
        p.add_argument("--finetune-fraction", dest="finetune_fraction", type=float, default=0.2)
        p.add_argument("--decay-interval", dest="decay_interval", type=int, default=10)
        p.add_argument("--decay-factor", dest="decay_factor", type=float, default=0.5)
        _model_opt(p)
        if name == "train":
            p.add_argument("--curve", default=None, help="training curve CSV")
        else:
            p.add_argument("--policy", required=True)
            p.add_argument("--boost", default=None, help="qubits whose noise is scaled, e.g. 1,4")
            p.add_argument("--factor", type=float, default=10.0)
    p = cmd(sub, "map", cmd_rl_map, "predict a placement")
    p.add_argument("--circuit", required=True)
    p.add_argument("--policy", required=True)
    p.add_argument("--target", default="110")
    p.add_argument("--attack", default=None)
    _model_opt(p)

    sub = group("spectator", "spectator-qubit detection")
    for name, fn, help in (("sweep", cmd_spectator_sweep, "detection rate versus waiting time"),
                           ("postselect", cmd_spectator_postselect, "discard flagged shots")):
        p = cmd(sub, name, fn, help)
        p.add_argument("--spectator", type=int, default=14)
        p.add_argument("--data", default="11" if name == "sweep" else "11,8")
        p.add_argument("--attack", default="12,13")
        if name == "postselect":
            p.add_argument("--tau", type=int, default=8, help="waiting time (default: the shipped model's optimum)")
        p.add_argument("--f0", type=int, default=None)
        p.add_argument("--shots", type=int, default=1000)
        p.add_argument("--flip", type=float, default=0.01)
        p.add_argument("--attack-frac", dest="attack_frac", type=float, default=1.0 if name == "sweep" else 0.2)
        p.add_argument("--duration", type=int, default=80)
        _model_opt(p)
        if name == "sweep":
            p.add_argument("--tau", "--taus", dest="taus", default="1..20", help='waiting times, e.g. "1..20" or "3,7,9"')
            p.add_argument("--clean-shots", dest="clean_shots", type=int, default=0)

    p = groups.add_parser("replay", help="re-run a command from its manifest")
    p.add_argument("manifest")
    p.add_argument("--out", default=None, help="write here instead of the recorded path")
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=None)
    return root


def _leaf_parser(root, args):
    sub = next(a for a in root._actions if isinstance(a, argparse._SubParsersAction))
    g = sub.choices[args.group]
    if args.group == "replay":
        return g
    sub2 = next(a for a in g._actions if isinstance(a, argparse._SubParsersAction))
    return sub2.choices[args.command]


def _resolve(root, argv) -> argparse.Namespace:
    """Parse ``argv`` and fold in ``--config`` with precedence flags > config > defaults."""
    args = root.parse_args(argv)
    if args.group == "replay" or not args.config:
        return args
    leaf = _leaf_parser(root, args)
    opts = {s: a.dest for a in leaf._actions for s in a.option_strings}
    explicit = {opts[tok.split("=")[0]] for tok in argv if tok.split("=")[0] in opts}
    try:
        cfg = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read config {args.config}: {exc}") from exc
    if not isinstance(cfg, dict):
        raise InputError("config file must hold a JSON object")
    dests = set(opts.values())
    for key, val in cfg.items():
        dest = key.replace("-", "_")
        if dest not in dests:
            raise InputError(f"unknown config key {key!r} for {args.group} {args.command}")
        if dest not in explicit:
            setattr(args, dest, val)
    return args


_SKIP = {"func", "group", "command", "config"}


def _run(args, argv_echo) -> int:
    t0 = time.time()
    text = args.func(args)
    if args.out is None:
        sys.stdout.write(text)
        return 0
    out = Path(args.out)
    _atomic_write(out, text)
    config = {k: v for k, v in sorted(vars(args).items()) if k not in _SKIP}
    manifest = {"command": f"{args.group} {args.command}", "config": config, "seed": args.seed,
                "artifacts": [str(out)] + ([str(args.curve)] if getattr(args, "curve", None) else []),
                "wall_time_s": round(time.time() - t0, 3), "version": __version__, "argv": argv_echo}
    _atomic_write(out.with_name(out.name + ".manifest.json"), _dumps(manifest))
    return 0


def _replay(root, args) -> int:
    try:
        man = json.loads(Path(args.manifest).read_text())
        group, command = man["command"].split()
        config = dict(man["config"])
    except (OSError, ValueError, KeyError) as exc:
        raise InputError(f"cannot read manifest {args.manifest}: {exc}") from exc
    if args.out is not None:
        config["out"] = args.out
    if args.workers is not None:
        config["workers"] = args.workers
    ns = root.parse_args([group, command] + _required_flags(root, group, command, config))
    for k, v in config.items():
        setattr(ns, k, v)
    ns.config = None
    return _run(ns, man.get("argv", []))


def _required_flags(root, group, command, config) -> list[str]:
    ns = argparse.Namespace(group=group, command=command)
    leaf = _leaf_parser(root, ns)
    flags = []
    for a in leaf._actions:
        if a.required and a.option_strings:
            flags += [a.option_strings[0], str(config[a.dest])]
    return flags


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    root = build_parser()
    from .circuit import CircuitError
    from .device import DeviceError
    from .idt import IdtError
    from .noise import NoiseModelError
    from .sim import SimulationError

    try:
        args = _resolve(root, argv)
        if args.group == "replay":
            return _replay(root, args)
        return _run(args, argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:
        # --help and --version
        return int(exc.code or 0)
    except (InputError, DeviceError, NoiseModelError, CircuitError, IdtError, FileNotFoundError,
            json.JSONDecodeError, KeyError) as exc:
        print(f"xtalk: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SimulationError, FloatingPointError, RuntimeError, MemoryError) as exc:
        print(f"xtalk: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except ValueError as exc:
        print(f"xtalk: invalid value: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
