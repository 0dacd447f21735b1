"""Tour of the ground-truth system: closed-form problem data over an episode.

The plant is a rotation with a slowly reweighted tracking cost; the reference
walks the unit circle.  Everything except the disturbance is a deterministic
function of the system time t*dt.
"""

import numpy as np

from ltvmpc import SystemSpec, build_ground_truth, ground_truth_to_json

spec = SystemSpec(T=50, dt=0.1, base_seed=0)
truth = build_ground_truth(spec)

print(f"episode: T={truth.T}, dt={truth.dt}, x0={truth.x0}")

for t in (0, 10, 49):
    s = truth.stages[t]
    print(f"\n--- stage t={t} (t_tilde={t * truth.dt:.1f}) ---")
    print("Q:\n", s.Q)
    print("R:\n", s.R)
    print("A (rotation):\n", s.A)
    print("B:\n", s.B)
    print("reference:", s.xbar, " disturbance:", s.w)

# The transition matrix is an exact rotation at every step.
worst = max(np.abs(s.A.T @ s.A - np.eye(2)).max() for s in truth.stages)
print("\nmax |A'A - I| over episode:", worst)

# The reference never leaves the unit circle.
radii = [np.linalg.norm(s.xbar) for s in truth.stages]
print("reference radius range:", min(radii), "to", max(radii))

print("\nterminal weight:\n", truth.P_terminal)
print("terminal reference:", truth.xbar_terminal)

print("\nJSON serialization (first 300 chars):")
print(ground_truth_to_json(truth)[:300], "...")
