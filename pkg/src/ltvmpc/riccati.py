"""Exact solvers for unconstrained affine time-varying LQR subproblems.

Two independent routes to the same optimum:

* ``riccati_backward`` runs the affine Riccati recursion and returns the
  optimal feedback law ``u_t = K_t x + kff_t`` together with the value
  function ``V_t(x) = x' P_t x + 2 p_t' x + c_t``.
* ``solve_kkt_dense`` assembles the full equality-constrained quadratic
  program over all states and controls and solves its dense KKT system in
  one linear solve.  It exists as a verification oracle for short windows.

Cost convention (tracking form):

    sum_t (x_t - xbar_t)' Q_t (x_t - xbar_t) + u_t' R_t u_t
        + (x_end - xbar_end)' P_end (x_end - xbar_end)

under dynamics ``x_{t+1} = A_t x_t + B_t u_t + w_t``.  Cost matrices are
symmetrized as ``(M + M') / 2`` on entry and never projected to the PSD cone,
so ill-conditioned perturbed subproblems fail loudly instead of being
silently repaired.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .system import StageData

# Minimum eigenvalue of the symmetrized control Hessian R + B'P B below which
# the subproblem is rejected as indefinite/ill-conditioned.
PD_TOLERANCE = 1e-9


class NotPositiveDefinite(Exception):
    """Control-cost Hessian at stage ``t`` failed the positive-definite test."""

    def __init__(self, t: int, min_eig: float):
        self.t = t
        self.min_eig = min_eig
        super().__init__(
            f"control Hessian not positive definite at stage {t}: "
            f"min eigenvalue {min_eig:.3e}"
        )


class SingularKkt(Exception):
    """Dense KKT system is singular (degenerate or indefinite problem)."""


class DimensionMismatch(ValueError):
    """Sequence lengths or array shapes are inconsistent."""


class IndexOutOfWindow(IndexError):
    """Requested time index lies outside a policy's horizon window."""


@dataclass(frozen=True)
class AffinePolicy:
    """Optimal affine feedback law and value coefficients over a window.

    ``K`` and ``kff`` have one entry per step in ``[t_start, t_end)``;
    ``P``, ``p``, ``c`` have one entry per time point in ``[t_start, t_end]``.
    """

    t_start: int
    t_end: int
    K: np.ndarray
    kff: np.ndarray
    P: np.ndarray
    p: np.ndarray
    c: np.ndarray

    def value(self, x: np.ndarray, t: int | None = None) -> float:
        """Optimal cost-to-go V_t(x); defaults to the window start."""
        t = self.t_start if t is None else t
        if not self.t_start <= t <= self.t_end:
            raise IndexOutOfWindow(f"t={t} outside [{self.t_start}, {self.t_end}]")
        i = t - self.t_start
        x = np.asarray(x, dtype=float)
        return float(x @ self.P[i] @ x + 2.0 * self.p[i] @ x + self.c[i])


@dataclass(frozen=True)
class Trajectory:
    """Rolled-out states/controls with realized stage costs."""

    states: np.ndarray
    controls: np.ndarray
    stage_costs: np.ndarray
    total_cost: float


def _sym(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)


def riccati_backward(
    window_data: Sequence[StageData],
    terminal_P: np.ndarray,
    terminal_xbar: np.ndarray,
    t_start: int = 0,
) -> AffinePolicy:
    """Backward recursion for the affine tracking LQR over one window.

    Raises :class:`NotPositiveDefinite` when any stage's symmetrized control
    Hessian ``R + B'P B`` has an eigenvalue <= PD_TOLERANCE.
    """
    L = len(window_data)
    terminal_P = _sym(np.asarray(terminal_P, dtype=float))
    terminal_xbar = np.asarray(terminal_xbar, dtype=float)

    K = np.zeros((L, 2, 2))
    kff = np.zeros((L, 2))
    P = np.zeros((L + 1, 2, 2))
    p = np.zeros((L + 1, 2))
    c = np.zeros(L + 1)

    # Terminal quadratic (x - xbar)' P (x - xbar) expanded in x.
    P[L] = terminal_P
    p[L] = -terminal_P @ terminal_xbar
    c[L] = float(terminal_xbar @ terminal_P @ terminal_xbar)

    for i in range(L - 1, -1, -1):
        s = window_data[i]
        Q = _sym(s.Q)
        R = _sym(s.R)
        A, B, w, xbar = s.A, s.B, s.w, s.xbar
        Pn, pn = P[i + 1], p[i + 1]

        Rbar = _sym(R + B.T @ Pn @ B)
        min_eig = float(np.linalg.eigvalsh(Rbar)[0])
        if min_eig <= PD_TOLERANCE:
            raise NotPositiveDefinite(t_start + i, min_eig)

        H = B.T @ Pn @ A                    # u-x coupling
        h = B.T @ (Pn @ w + pn)             # u-affine term
        K[i] = -np.linalg.solve(Rbar, H)
        kff[i] = -np.linalg.solve(Rbar, h)

        P[i] = _sym(Q + A.T @ Pn @ A + H.T @ K[i])
        p[i] = -Q @ xbar + A.T @ (Pn @ w + pn) + H.T @ kff[i]
        c[i] = float(
            xbar @ Q @ xbar + w @ Pn @ w + 2.0 * pn @ w + c[i + 1] + h @ kff[i]
        )

    return AffinePolicy(t_start=t_start, t_end=t_start + L, K=K, kff=kff,
                        P=P, p=p, c=c)


def optimal_action(policy: AffinePolicy, t: int, x: np.ndarray) -> np.ndarray:
    """The policy's control ``K_t x + kff_t`` at absolute time index ``t``."""
    if not policy.t_start <= t < policy.t_end:
        raise IndexOutOfWindow(
            f"t={t} outside control window [{policy.t_start}, {policy.t_end})"
        )
    i = t - policy.t_start
    return policy.K[i] @ np.asarray(x, dtype=float) + policy.kff[i]


def _stage_cost(s: StageData, x: np.ndarray, u: np.ndarray) -> float:
    dx = x - s.xbar
    return float(dx @ s.Q @ dx + u @ s.R @ u)


def rollout(
    policy: AffinePolicy,
    window_data: Sequence[StageData],
    x_init: np.ndarray,
) -> Trajectory:
    """Simulate the closed loop ``u = Kx + kff`` on the given window data."""
    L = len(window_data)
    if policy.t_end - policy.t_start != L:
        raise DimensionMismatch(
            f"policy covers {policy.t_end - policy.t_start} steps, "
            f"window has {L}"
        )
    states = np.zeros((L + 1, 2))
    controls = np.zeros((L, 2))
    stage_costs = np.zeros(L)
    states[0] = np.asarray(x_init, dtype=float)
    for i, s in enumerate(window_data):
        u = policy.K[i] @ states[i] + policy.kff[i]
        controls[i] = u
        stage_costs[i] = _stage_cost(s, states[i], u)
        states[i + 1] = s.A @ states[i] + s.B @ u + s.w
    # Terminal cost from the value coefficients at the window end.
    xN = states[L]
    terminal = float(xN @ policy.P[L] @ xN + 2.0 * policy.p[L] @ xN + policy.c[L])
    return Trajectory(states=states, controls=controls, stage_costs=stage_costs,
                      total_cost=float(stage_costs.sum()) + terminal)


def evaluate_cost(
    states: np.ndarray,
    controls: np.ndarray,
    window_data: Sequence[StageData],
    terminal_P: np.ndarray,
    terminal_xbar: np.ndarray,
) -> float:
    """Objective value of the given sequences under the given problem data."""
    states = np.asarray(states, dtype=float)
    controls = np.asarray(controls, dtype=float)
    L = len(window_data)
    if len(states) != L + 1 or len(controls) != L:
        raise DimensionMismatch(
            f"need {L + 1} states and {L} controls, got "
            f"{len(states)} and {len(controls)}"
        )
    total = 0.0
    for i, s in enumerate(window_data):
        total += _stage_cost(s, states[i], controls[i])
    dxN = states[L] - np.asarray(terminal_xbar, dtype=float)
    total += float(dxN @ _sym(np.asarray(terminal_P, dtype=float)) @ dxN)
    return total


def solve_kkt_dense(
    window_data: Sequence[StageData],
    terminal_P: np.ndarray,
    terminal_xbar: np.ndarray,
    x_init: np.ndarray,
) -> Trajectory:
    """Solve the whole window as one equality-constrained QP (test oracle).

    Stacks z = (x_0..x_L, u_0..u_{L-1}), builds the dense KKT system for
    min 1/2 z'Hz + g'z s.t. Cz = d, and solves it with a single dense solve.
    """
    L = len(window_data)
    if L > 50:
        raise ValueError(f"dense KKT oracle limited to 50 steps, got {L}")
    n_x = 2 * (L + 1)
    n_u = 2 * L
    nv = n_x + n_u
    nc = 2 * (L + 1)

    H = np.zeros((nv, nv))
    g = np.zeros(nv)
    C = np.zeros((nc, nv))
    d = np.zeros(nc)

    terminal_P = _sym(np.asarray(terminal_P, dtype=float))
    terminal_xbar = np.asarray(terminal_xbar, dtype=float)

    def xs(t):  # slice of x_t
        return slice(2 * t, 2 * t + 2)

    def us(t):  # slice of u_t
        return slice(n_x + 2 * t, n_x + 2 * t + 2)

    for t, s in enumerate(window_data):
        Q = _sym(s.Q)
        H[xs(t), xs(t)] = 2.0 * Q
        g[xs(t)] = -2.0 * Q @ s.xbar
        H[us(t), us(t)] = 2.0 * _sym(s.R)
    H[xs(L), xs(L)] = 2.0 * terminal_P
    g[xs(L)] = -2.0 * terminal_P @ terminal_xbar

    # x_0 = x_init, then A_t x_t + B_t u_t - x_{t+1} = -w_t.
    C[0:2, xs(0)] = np.eye(2)
    d[0:2] = np.asarray(x_init, dtype=float)
    for t, s in enumerate(window_data):
        rows = slice(2 * (t + 1), 2 * (t + 2))
        C[rows, xs(t)] = s.A
        C[rows, us(t)] = s.B
        C[rows, xs(t + 1)] = -np.eye(2)
        d[rows] = -s.w

    kkt = np.block([[H, C.T], [C, np.zeros((nc, nc))]])
    rhs = np.concatenate([-g, d])
    try:
        sol = np.linalg.solve(kkt, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularKkt(str(exc)) from exc
    if not np.all(np.isfinite(sol)):
        raise SingularKkt("non-finite KKT solution")

    z = sol[:nv]
    states = z[:n_x].reshape(L + 1, 2)
    controls = z[n_x:].reshape(L, 2)
    stage_costs = np.array(
        [_stage_cost(s, states[i], controls[i]) for i, s in enumerate(window_data)]
    )
    total = evaluate_cost(states, controls, window_data, terminal_P, terminal_xbar)
    return Trajectory(states=states, controls=controls, stage_costs=stage_costs,
                      total_cost=total)
