"""Train the placement policy a little, then ask it about the two tables."""
import time

from xtalk.bench import grover3
from xtalk.device import load_bundled_device
from xtalk.experiments import TABLE_I_ATTACK, TABLE_I_ROWS, TABLE_II_ATTACK, TABLE_II_ROWS
from xtalk.noise import boost_qubits, default_model
from xtalk.rl import Environment, TrainingConfig, TrainingLog, evaluate, fine_tune, gen_training_circuits, predict, train

topo, cal = load_bundled_device()
model = default_model()
dead = tuple(sorted(cal.dead_edges()))

# table scenarios: fixed candidate rows, every arm scored each update
g = grover3().without_measurements()
for rows, atk in ((TABLE_I_ROWS, TABLE_I_ATTACK), (TABLE_II_ROWS, TABLE_II_ATTACK)):
    env = Environment(model, topo, attack=atk, fixed_actions=tuple(rows))
    pol = train(TrainingConfig(episodes=50, samples=0), [g], env)
    print("attack", atk, "->", predict(pol, g, env), [round(env.reward(g, r), 3) for r in rows])

# random circuits; 1000 here, the acceptance run uses 5000
env = Environment(model, topo, dead=dead)
circuits = gen_training_circuits(1000, seed=1, topology=topo)
held_out = gen_training_circuits(100, seed=99, topology=topo)
t = time.time()
log = TrainingLog()
pol = train(TrainingConfig(), circuits, env, log=log)
print(f"trained in {time.time() - t:.0f}s, curve first/last 10%:", [round(x, 4) for x in log.window_means()])
print("held out:", evaluate(pol, held_out, env))

# qubits 1 and 4 get 10x noisier; fine-tune on 20% of the circuits
hot = Environment(boost_qubits(model, (1, 4), 10), topo, dead=dead)
print("boosted, before:", evaluate(pol, held_out, hot))
ft = fine_tune(pol, hot, circuits, TrainingConfig(episodes=20))
print("boosted, after: ", evaluate(ft, held_out, hot))
