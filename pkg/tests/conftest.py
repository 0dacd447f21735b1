import time

import numpy as np
import pytest

from ltvmpc import StageData, TrainConfig, seed_mix, train
from ltvmpc.harness import nn_ground_truth


def random_psd(rng, dim=2, min_eig=0.5):
    M = rng.normal(size=(dim, dim))
    return M @ M.T + min_eig * np.eye(dim)


def random_window(rng, length):
    """Random well-posed stage data (PD costs, bounded dynamics)."""
    stages = []
    for _ in range(length):
        stages.append(StageData(
            Q=random_psd(rng),
            R=random_psd(rng),
            xbar=rng.normal(size=2),
            A=rng.normal(scale=0.7, size=(2, 2)),
            B=rng.normal(scale=0.7, size=(2, 2)) + np.eye(2),
            w=rng.normal(scale=0.3, size=2),
        ))
    terminal_P = random_psd(rng)
    terminal_xbar = rng.normal(size=2)
    return stages, terminal_P, terminal_xbar


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def full_training():
    """One full 50k-step training on the base-seed-0 episode, shared by the
    predictor tests and the acceptance checks (it is the expensive part)."""
    truth = nn_ground_truth(0, 100)
    cfg = TrainConfig(init_seed=seed_mix(0, "nn", "init", 0))
    t0 = time.time()
    checkpoints = train(truth, cfg)
    seconds = time.time() - t0
    return {"truth": truth, "checkpoints": checkpoints,
            "train_seconds": seconds}
