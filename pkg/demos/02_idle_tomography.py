"""Inject known crosstalk rates, measure them back with idle tomography."""
import numpy as np

from xtalk.device import DeviceTopology
from xtalk.idt import build_crosstalk_entry, estimate_hsa, generate_idt_suite, run_suite
from xtalk.noise import CrosstalkModel, HsaRates

topo = DeviceTopology.path(3)
truth = HsaRates(h=(0, 0, 0.010), s=(0.004, 0, 0))
# CNOT on (1,2) disturbs qubit 0
model = CrosstalkModel({}, {("cnot", 1, 2): {0: truth}}, 3)

base_suite = generate_idt_suite(topo, None, tomography=[0])
drv_suite = generate_idt_suite(topo, (1, 2), tomography=[0])
print(len(drv_suite), "circuits per suite, lengths", drv_suite.lengths)

base = estimate_hsa(base_suite, run_suite(base_suite, model, 10_000, 0))
drv = estimate_hsa(drv_suite, run_suite(drv_suite, model, 10_000, 0))
est = drv[0]
names = ["hX", "hY", "hZ", "sX", "sY", "sZ", "aX", "aY", "aZ"]
want = np.r_[truth.h, truth.s, truth.a]
for n, w, v, e in zip(names, want, est.values(), est.errors()):
    print(f"{n}: true {w:+.4f}  est {v:+.5f} +- {e:.5f}")

# the gate-induced part is driven minus idle background
entry = build_crosstalk_entry(base, drv)
print("crosstalk entry for qubit 0:", entry[0].to_dict())
