"""Grover beside a repeated-CNOT attack, then how much distance buys back."""
import numpy as np

from xtalk.bench import grover3, tvd, uniform
from xtalk.device import load_bundled_device
from xtalk.experiments import SWEEP_VICTIM, attack_demo, run_separation_sweep, table_i, table_ii
from xtalk.noise import default_model
from xtalk.sim import simulate

topo, cal = load_bundled_device()
model = default_model()

# noise-free grover3 puts ~94.5% of the weight on the target
res = simulate(grover3("110"), shots=4096, seed=1)
print("noise-free top outcomes:", sorted(res.counts.items(), key=lambda kv: -kv[1])[:3])

# victim on 11,14,16 with an attack CNOT firing on 12,13 every layer
demo = attack_demo(model, shots=8192, seed=0)
for k in ("no_noise", "no_attack", "attack"):
    print(f"{k:>10}: success {demo['success'][k]:.3f}  TVD to uniform {demo['tvd_uniform'][k]:.3f}")

# fidelity of the victim at {12,13,14} versus the attack's separation radius
sw = run_separation_sweep(grover3(), SWEEP_VICTIM, range(5), model, topo, cal)
for r in range(5):
    f = sw.fidelities(r)
    if f:
        print(f"r={r}: n={len(f):3d} mean {np.mean(f):.3f} spread {np.ptp(f):.3f}")
print("spearman(radius, fidelity) =", round(sw.spearman(), 3))

# the two placement tables
for name, t in (("Table I", table_i(model, topo)), ("Table II", table_ii(model, topo))):
    print(name)
    for row in t.rows:
        print(f"  {row.placement}  r={row.radius}  F={row.fidelity:.3f}")
