"""Spectator qubit 14 watches for an attack on 12,13 next to data qubit 11."""
import numpy as np

from xtalk.noise import default_model
from xtalk.spectator import SpectatorConfig, azimuth, bloch_trajectory, post_select, sweep_waiting_time

model = default_model()

# data from |+>, spectator from |0>: both turn the same way under the attack
for t, (dq, sq) in zip([0, 4, 8, 16], bloch_trajectory(SpectatorConfig(), model, [0, 4, 8, 16])):
    print(f"t={t:2d}  DQ {np.round(dq, 3)} phi={azimuth(dq):+.3f}   SQ {np.round(sq, 3)}")

# waiting time between spectator measurements
sw = sweep_waiting_time(SpectatorConfig(), model, range(1, 21), clean_shots=500)
print(sw.to_csv())
print("tau* =", sw.tau_star, "eta* =", round(sw.eta_star, 3))

# 20% of shots attacked; drop the ones the spectator flags
ps = post_select(SpectatorConfig(data=(11, 8), tau=sw.tau_star, attack_fraction=0.2), model)
print(f"P(00) all {ps.p('00', retained=False):.3f} -> retained {ps.p('00'):.3f}, "
      f"kept {ps.n_retained}/{ps.n_shots}, clean kept {ps.clean_retained_fraction:.3f}")
