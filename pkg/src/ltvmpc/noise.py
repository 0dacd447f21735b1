"""Noisy prediction datasets: uniform entrywise perturbations of problem data.

Predictions are one fixed noisy copy of the episode's problem data (the
controller at every step sees the same perturbed dataset, not a fresh draw),
under two settings: perturb only the disturbance vectors, or perturb every
stage matrix plus the terminal cost pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .riccati import DimensionMismatch
from .seeding import substream
from .system import GroundTruth, StageData, flatten_stage


class NoiseSetting(str, Enum):
    DISTURBANCE_ONLY = "disturbance"
    ALL_DATA = "all"


def parse_setting(name: str) -> NoiseSetting:
    for s in NoiseSetting:
        if s.value == name:
            return s
    raise ValueError(
        f"unknown noise setting {name!r}; expected one of "
        f"{[s.value for s in NoiseSetting]}"
    )


@dataclass(frozen=True)
class PredictedData(GroundTruth):
    """A GroundTruth-shaped dataset as seen by the online controller.

    ``setting`` is the originating noise setting ("disturbance" | "all"),
    or "nn" when the data came from a learned predictor (then ``epsilon``
    is NaN and ``noise_seed`` is unused).
    """

    epsilon: float = 0.0
    setting: str = NoiseSetting.DISTURBANCE_ONLY.value
    noise_seed: int = 0


def inject_noise(
    truth: GroundTruth,
    epsilon: float,
    setting: NoiseSetting,
    noise_seed: int,
) -> PredictedData:
    """Add U(-epsilon, epsilon) noise to the affected problem-data entries.

    One independent draw per scalar entry, once per episode.  Draw order is
    fixed: a (T, 20) block in flattened stage order, then the 6 terminal
    entries (used only under ALL_DATA).  epsilon = 0 returns bit-identical
    copies of the ground-truth arrays.
    """
    if epsilon < 0:
        raise ValueError(f"epsilon must be >= 0, got {epsilon}")
    setting = NoiseSetting(setting)
    T = truth.T

    if epsilon == 0:
        stages = truth.stages
        P_term = truth.P_terminal
        xbar_term = truth.xbar_terminal
    else:
        rng = substream(noise_seed, "prediction-noise", setting.value,
                        float(epsilon))
        stage_noise = rng.uniform(-epsilon, epsilon, size=(T, 20))
        term_noise = rng.uniform(-epsilon, epsilon, size=6)
        if setting is NoiseSetting.DISTURBANCE_ONLY:
            stages = tuple(
                StageData(Q=s.Q, R=s.R, xbar=s.xbar, A=s.A, B=s.B,
                          w=s.w + stage_noise[t, 18:20])
                for t, s in enumerate(truth.stages)
            )
            P_term = truth.P_terminal
            xbar_term = truth.xbar_terminal
        else:
            stages = tuple(
                StageData(
                    Q=s.Q + stage_noise[t, 0:4].reshape(2, 2),
                    R=s.R + stage_noise[t, 4:8].reshape(2, 2),
                    xbar=s.xbar + stage_noise[t, 8:10],
                    A=s.A + stage_noise[t, 10:14].reshape(2, 2),
                    B=s.B + stage_noise[t, 14:18].reshape(2, 2),
                    w=s.w + stage_noise[t, 18:20],
                )
                for t, s in enumerate(truth.stages)
            )
            P_term = truth.P_terminal + term_noise[0:4].reshape(2, 2)
            xbar_term = truth.xbar_terminal + term_noise[4:6]

    return PredictedData(
        stages=stages,
        P_terminal=P_term,
        xbar_terminal=xbar_term,
        dt=truth.dt,
        x0=truth.x0,
        epsilon=float(epsilon),
        setting=setting.value,
        noise_seed=int(noise_seed),
    )


def prediction_error_profile(pred: GroundTruth, truth: GroundTruth) -> np.ndarray:
    """Per-stage Euclidean norm of the flattened 20-dim prediction residual."""
    if pred.T != truth.T:
        raise DimensionMismatch(
            f"episode lengths differ: {pred.T} vs {truth.T}"
        )
    return np.array(
        [
            float(np.linalg.norm(flatten_stage(p) - flatten_stage(s)))
            for p, s in zip(pred.stages, truth.stages)
        ]
    )


def predicted_data_to_dict(pred: PredictedData) -> dict:
    from .system import ground_truth_to_dict

    d = ground_truth_to_dict(pred)
    # NaN epsilon (learned predictor) maps to null for strict JSON.
    d["epsilon"] = None if np.isnan(pred.epsilon) else pred.epsilon
    d["setting"] = pred.setting
    d["noise_seed"] = pred.noise_seed
    return d


def predicted_data_from_dict(d: dict) -> PredictedData:
    from .system import ground_truth_from_dict

    base = ground_truth_from_dict(d)
    eps = d["epsilon"]
    return PredictedData(
        stages=base.stages,
        P_terminal=base.P_terminal,
        xbar_terminal=base.xbar_terminal,
        dt=base.dt,
        x0=base.x0,
        epsilon=float("nan") if eps is None else float(eps),
        setting=d["setting"],
        noise_seed=int(d["noise_seed"]),
    )
