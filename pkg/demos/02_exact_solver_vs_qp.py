"""Two independent routes to the optimal trajectory.

The affine Riccati recursion solves the tracking LQR in one backward pass;
the dense-KKT route stacks the whole window into a single equality-
constrained quadratic program.  They must agree to solver precision.
"""

import numpy as np

from ltvmpc import (
    SystemSpec,
    build_ground_truth,
    riccati_backward,
    rollout,
    solve_kkt_dense,
)

truth = build_ground_truth(SystemSpec(T=20, base_seed=42))

policy = riccati_backward(truth.stages, truth.P_terminal, truth.xbar_terminal)
traj = rollout(policy, truth.stages, truth.x0)

kkt = solve_kkt_dense(truth.stages, truth.P_terminal, truth.xbar_terminal,
                      truth.x0)

print("Riccati rollout cost:", traj.total_cost)
print("dense KKT cost      :", kkt.total_cost)
print("max state deviation :", np.abs(traj.states - kkt.states).max())
print("max control deviation:", np.abs(traj.controls - kkt.controls).max())

# The value function predicts the realized cost from the initial state.
print("\nV_0(x0) =", policy.value(truth.x0))

# Feedback gains shrink the effect of where you start.
print("\nfirst three gains K_t:")
for t in range(3):
    print(policy.K[t])
