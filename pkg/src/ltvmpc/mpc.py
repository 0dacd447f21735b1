"""Receding-horizon online controller and its regret/per-step-error metrics.

At each step the controller solves the k-step subproblem built from the
*predicted* problem data, commits the first control, and the *true* system
advances the state.  The clairvoyant optimum (full true horizon) is solved
once per episode; its action at the online state defines the per-step error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .noise import PredictedData
from .riccati import (
    AffinePolicy,
    Trajectory,
    evaluate_cost,
    NotPositiveDefinite,
    optimal_action,
    riccati_backward,
    rollout,
)
from .system import GroundTruth


@dataclass(frozen=True)
class MpcConfig:
    """Prediction horizon (steps) and blow-up detection thresholds."""

    k: int
    state_blowup_threshold: float = 1e6
    control_blowup_threshold: float = 1e6

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"prediction horizon k must be >= 1, got {self.k}")
        if not self.state_blowup_threshold > 0:
            raise ValueError("state_blowup_threshold must be > 0")
        if not self.control_blowup_threshold > 0:
            raise ValueError("control_blowup_threshold must be > 0")


@dataclass(frozen=True)
class RunRecord:
    """One online episode: trajectory, realized cost, errors, divergence."""

    states: np.ndarray
    controls: np.ndarray
    cost_alg: float
    per_step_errors: np.ndarray
    diverged: bool
    divergence_step: int | None
    config: dict = field(default_factory=dict)


def solve_offline(truth: GroundTruth, x0=None) -> tuple[AffinePolicy, Trajectory]:
    """Clairvoyant optimum over the full episode (policy and its rollout).

    The trajectory's total cost is re-evaluated through evaluate_cost, the
    same accounting path used for online runs, so a perfect-prediction online
    run compares against it with zero rounding skew.
    """
    x0 = truth.x0 if x0 is None else np.asarray(x0, dtype=float)
    policy = riccati_backward(truth.stages, truth.P_terminal,
                              truth.xbar_terminal, t_start=0)
    traj = rollout(policy, truth.stages, x0)
    total = evaluate_cost(traj.states, traj.controls, truth.stages,
                          truth.P_terminal, truth.xbar_terminal)
    return policy, Trajectory(states=traj.states, controls=traj.controls,
                              stage_costs=traj.stage_costs, total_cost=total)


def mpc_step(t: int, x: np.ndarray, pred: PredictedData, k: int, T: int) -> np.ndarray:
    """First control of the k-step predicted subproblem starting at (t, x).

    The window is [t, min(t+k, T)].  If it reaches T the predicted terminal
    cost pair is used; otherwise the window ends myopically on the predicted
    stage cost at the window end (its Q as terminal weight, its xbar as
    terminal reference).
    """
    if not 0 <= t < T:
        raise ValueError(f"t must be in [0, {T}), got {t}")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    t_end = min(t + k, T)
    window = pred.stages[t:t_end]
    if t_end == T:
        term_P, term_xbar = pred.P_terminal, pred.xbar_terminal
    else:
        term_P, term_xbar = pred.stages[t_end].Q, pred.stages[t_end].xbar
    policy = riccati_backward(window, term_P, term_xbar, t_start=t)
    return policy.K[0] @ np.asarray(x, dtype=float) + policy.kff[0]


def run_online(
    truth: GroundTruth,
    pred: PredictedData,
    cfg: MpcConfig,
    x0=None,
) -> RunRecord:
    """Run the online MPC loop against the true system.

    Divergence (solver failure, non-finite values, or a state/control
    infinity-norm above its threshold) stops the run; the record then carries
    the truncated trajectory, the offending step index, and cost +inf.
    """
    T = truth.T
    if pred.T != T:
        raise ValueError(f"prediction length {pred.T} != episode length {T}")
    x0 = truth.x0 if x0 is None else np.asarray(x0, dtype=float)

    clairvoyant, _ = solve_offline(truth, x0)

    states = [x0]
    controls = []
    errors = []
    diverged = False
    divergence_step = None

    for t in range(T):
        x = states[-1]
        try:
            u = mpc_step(t, x, pred, cfg.k, T)
        except NotPositiveDefinite:
            diverged, divergence_step = True, t
            break
        controls.append(u)
        errors.append(float(np.linalg.norm(u - optimal_action(clairvoyant, t, x))))
        if not np.all(np.isfinite(u)) or \
                np.max(np.abs(u)) > cfg.control_blowup_threshold:
            diverged, divergence_step = True, t
            break
        s = truth.stages[t]
        x_next = s.A @ x + s.B @ u + s.w
        states.append(x_next)
        if not np.all(np.isfinite(x_next)) or \
                np.max(np.abs(x_next)) > cfg.state_blowup_threshold:
            diverged, divergence_step = True, t
            break

    states = np.array(states)
    controls = np.array(controls) if controls else np.zeros((0, 2))
    errors = np.array(errors)

    if diverged:
        cost_alg = math.inf
    else:
        cost_alg = evaluate_cost(states, controls, truth.stages,
                                 truth.P_terminal, truth.xbar_terminal)

    echo = {
        "T": T,
        "k": cfg.k,
        "epsilon": pred.epsilon,
        "setting": pred.setting,
        "noise_seed": pred.noise_seed,
        "state_blowup_threshold": cfg.state_blowup_threshold,
        "control_blowup_threshold": cfg.control_blowup_threshold,
    }
    return RunRecord(states=states, controls=controls, cost_alg=cost_alg,
                     per_step_errors=errors, diverged=diverged,
                     divergence_step=divergence_step, config=echo)


def dynamic_regret(cost_alg: float, cost_opt: float) -> float:
    """cost(ALG) - cost(OPT); an infinite cost_alg propagates as +inf."""
    if not math.isfinite(cost_opt):
        raise ValueError(f"cost_opt must be finite, got {cost_opt}")
    return cost_alg - cost_opt


def run_record_to_dict(rec: RunRecord) -> dict:
    return {
        "states": rec.states.tolist(),
        "controls": rec.controls.tolist(),
        "cost_alg": "inf" if math.isinf(rec.cost_alg) else rec.cost_alg,
        "per_step_errors": rec.per_step_errors.tolist(),
        "diverged": rec.diverged,
        "divergence_step": rec.divergence_step,
        "config": {
            key: (None if isinstance(val, float) and math.isnan(val) else val)
            for key, val in rec.config.items()
        },
    }
