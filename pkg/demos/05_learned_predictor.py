"""A learned predictor driving the online controller.

A small MLP regresses system time onto the flattened problem data and its
snapshots replace the noisy-copy predictions.  This demo trains for 2000
steps (the benchmark uses 50000) to stay quick; the qualitative story is
already visible: a few dozen gradient steps stop the controller from
diverging, and further training walks the regret down toward the floor set
by the unpredictable disturbance.
"""

from ltvmpc import (
    MpcConfig,
    SystemSpec,
    TrainConfig,
    dynamic_regret,
    predict_problem_data,
    run_online,
    seed_mix,
    solve_offline,
    train,
)
from ltvmpc.harness import nn_ground_truth

truth = nn_ground_truth(base_seed=0, T=100)
cfg = TrainConfig(total_steps=2000,
                  checkpoint_steps=(10, 20, 50, 100, 500, 2000),
                  init_seed=seed_mix(0, "nn", "init", 0))
print("training 1 -> 256 -> 256 -> 20 on the episode's problem data...")
checkpoints = train(truth, cfg)

_, opt = solve_offline(truth)
spec = SystemSpec(T=truth.T, dt=truth.dt, x0=truth.x0)

print(f"\n{'step':>6} {'mean pred error':>16} {'regret (k=50)':>14} {'diverged':>9}")
for ck in checkpoints:
    pred = predict_problem_data(ck.model, spec)
    rec = run_online(truth, pred, MpcConfig(k=50))
    regret = dynamic_regret(rec.cost_alg, opt.total_cost)
    print(f"{ck.step:>6} {ck.mean_error:>16.4f} {regret:>14.4g} "
          f"{str(rec.diverged):>9}")
