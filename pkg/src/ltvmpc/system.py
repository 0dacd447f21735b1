"""Ground-truth problem data for the 2-D time-varying tracking LQR testbed.

The system is a rotation-driven linear time-varying plant with smoothly
varying quadratic costs and a unit-circle reference trajectory.  All matrices
are closed forms of the continuous time variable ``t_tilde = t * dt``; only
the additive disturbance ``w`` is random (zero-mean Gaussian, one independent
draw per component per step).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .seeding import seed_mix, substream

STAGE_DIM = 20  # flattened (Q:4, R:4, xbar:2, A:4, B:4, w:2)


@dataclass(frozen=True)
class StageData:
    """One step's problem data: costs, reference, dynamics, disturbance."""

    Q: np.ndarray
    R: np.ndarray
    xbar: np.ndarray
    A: np.ndarray
    B: np.ndarray
    w: np.ndarray


@dataclass(frozen=True)
class SystemSpec:
    """Episode description: length, step size, initial state, noise scale."""

    T: int
    dt: float = 0.1
    x0: np.ndarray = field(default_factory=lambda: np.zeros(2))
    disturbance_std: float = 0.2
    base_seed: int = 0

    def __post_init__(self):
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.disturbance_std < 0:
            raise ValueError(
                f"disturbance_std must be >= 0, got {self.disturbance_std}"
            )
        object.__setattr__(self, "x0", np.asarray(self.x0, dtype=float))


@dataclass(frozen=True)
class GroundTruth:
    """Full episode of stage data plus the terminal cost pair.

    ``dt`` and ``x0`` are carried along so a serialized instance is
    self-contained.
    """

    stages: tuple[StageData, ...]
    P_terminal: np.ndarray
    xbar_terminal: np.ndarray
    dt: float
    x0: np.ndarray

    @property
    def T(self) -> int:
        return len(self.stages)


def cost_weight_at(t_tilde: float) -> np.ndarray:
    """Diagonal state-cost weight; the terminal weight uses the same form."""
    return np.array([[1.0 + math.exp(-t_tilde), 0.0], [0.0, 1.0 + 0.05 * t_tilde]])


def reference_at(t_tilde: float) -> np.ndarray:
    return np.array([math.sin(t_tilde), math.cos(t_tilde)])


def stage_data_at(t_index: int, dt: float, w: np.ndarray) -> StageData:
    """Evaluate the closed-form stage matrices at ``t_tilde = t_index * dt``."""
    if t_index < 0:
        raise ValueError(f"t_index must be >= 0, got {t_index}")
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    tt = t_index * dt
    Q = cost_weight_at(tt)
    R = np.array([[1.0, 0.0], [0.0, 1.0 + math.exp(-tt)]])
    A = np.array(
        [[math.cos(tt), math.sin(tt)], [-math.sin(tt), math.cos(tt)]]
    )
    B = np.array([[1.0, 0.0], [0.0, 0.1 + math.exp(-tt)]])
    return StageData(Q=Q, R=R, xbar=reference_at(tt), A=A, B=B,
                     w=np.asarray(w, dtype=float).copy())


def sample_disturbances(spec: SystemSpec) -> np.ndarray:
    """Draw the (T, 2) disturbance sequence from the "disturbance" substream.

    The substream is keyed only by ``base_seed``, so prediction-noise draws
    elsewhere can never shift the realized disturbances.
    """
    rng = substream(spec.base_seed, "disturbance")
    return rng.normal(0.0, spec.disturbance_std, size=(spec.T, 2))


def build_ground_truth(spec: SystemSpec) -> GroundTruth:
    """Construct the episode's stage data and terminal cost, deterministically."""
    w = sample_disturbances(spec)
    stages = tuple(stage_data_at(t, spec.dt, w[t]) for t in range(spec.T))
    T_tilde = spec.T * spec.dt
    return GroundTruth(
        stages=stages,
        P_terminal=cost_weight_at(T_tilde),
        xbar_terminal=reference_at(T_tilde),
        dt=spec.dt,
        x0=spec.x0.copy(),
    )


def flatten_stage(s: StageData) -> np.ndarray:
    """Fixed coordinate order: Q (row-major), R, xbar, A, B, w."""
    return np.concatenate(
        [s.Q.ravel(), s.R.ravel(), s.xbar, s.A.ravel(), s.B.ravel(), s.w]
    )


def unflatten_stage(v: np.ndarray) -> StageData:
    v = np.asarray(v, dtype=float)
    if v.shape != (STAGE_DIM,):
        raise ValueError(f"expected a {STAGE_DIM}-vector, got shape {v.shape}")
    return StageData(
        Q=v[0:4].reshape(2, 2).copy(),
        R=v[4:8].reshape(2, 2).copy(),
        xbar=v[8:10].copy(),
        A=v[10:14].reshape(2, 2).copy(),
        B=v[14:18].reshape(2, 2).copy(),
        w=v[18:20].copy(),
    )


# --- JSON serialization -----------------------------------------------------
# Matrices are stored row-major as flat 4-element lists; vectors as 2-element
# lists.

def _stage_to_dict(s: StageData) -> dict:
    return {
        "Q": s.Q.ravel().tolist(),
        "R": s.R.ravel().tolist(),
        "xbar": s.xbar.tolist(),
        "A": s.A.ravel().tolist(),
        "B": s.B.ravel().tolist(),
        "w": s.w.tolist(),
    }


def _stage_from_dict(d: dict) -> StageData:
    return StageData(
        Q=np.array(d["Q"], dtype=float).reshape(2, 2),
        R=np.array(d["R"], dtype=float).reshape(2, 2),
        xbar=np.array(d["xbar"], dtype=float),
        A=np.array(d["A"], dtype=float).reshape(2, 2),
        B=np.array(d["B"], dtype=float).reshape(2, 2),
        w=np.array(d["w"], dtype=float),
    )


def ground_truth_to_dict(truth: GroundTruth) -> dict:
    return {
        "T": truth.T,
        "dt": truth.dt,
        "x0": truth.x0.tolist(),
        "stages": [_stage_to_dict(s) for s in truth.stages],
        "P_terminal": truth.P_terminal.ravel().tolist(),
        "xbar_terminal": truth.xbar_terminal.tolist(),
    }


def ground_truth_from_dict(d: dict) -> GroundTruth:
    return GroundTruth(
        stages=tuple(_stage_from_dict(s) for s in d["stages"]),
        P_terminal=np.array(d["P_terminal"], dtype=float).reshape(2, 2),
        xbar_terminal=np.array(d["xbar_terminal"], dtype=float),
        dt=float(d["dt"]),
        x0=np.array(d["x0"], dtype=float),
    )


def ground_truth_to_json(truth: GroundTruth) -> str:
    return json.dumps(ground_truth_to_dict(truth), indent=2)


def ground_truth_from_json(text: str) -> GroundTruth:
    return ground_truth_from_dict(json.loads(text))
