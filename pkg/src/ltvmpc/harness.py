"""Seeded experiment sweeps over noise strengths, horizons, and episode
lengths, with CSV export.

Every sweep is a pure function of (grid, base_seed): each cell derives its
own RNG substreams, cells can run in a process pool, and rows are sorted by
their key columns before writing, so serial and parallel runs produce
byte-identical CSV files.

Seed derivation (documented, stable):
  truth seed  = seed_mix(base_seed, experiment, "truth", T, seed)
  noise seed  = seed_mix(base_seed, experiment, "noise", setting, epsilon, T, seed)
The horizon never enters the seeds: within a cell family, different horizons
face the same episode and the same noisy predictions.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .mlp import Checkpoint, TrainConfig, predict_problem_data, train
from .mpc import MpcConfig, dynamic_regret, run_online, solve_offline
from .noise import NoiseSetting, inject_noise
from .seeding import seed_mix
from .system import GroundTruth, SystemSpec, build_ground_truth

DEFAULT_EPSILONS = (0.0, 0.01, 0.02, 0.05, 0.1, 0.5, 1.0)
DEFAULT_T_VALUES = tuple(range(20, 201, 20))
DEFAULT_K_VALUES = tuple(range(10, 101, 10))
DEFAULT_FRACTIONS = (0.1, 0.5, 1.0)
DEFAULT_SEEDS = (0, 1, 2, 3, 4)

REGRET_CURVE_COLUMNS = ("experiment", "setting", "epsilon", "horizon_fraction",
                        "T", "k", "seed", "cost_alg", "cost_opt", "regret",
                        "diverged", "divergence_step")
PER_STEP_COLUMNS = ("setting", "epsilon", "k", "t", "e_t")
TABLE_MEAN_COLUMNS = ("setting", "epsilon", "k", "mean_regret", "n_diverged")
TABLE_STD_COLUMNS = ("setting", "epsilon", "k", "std_regret", "n_diverged")
NN_ERROR_COLUMNS = ("step", "mean_pred_error")
NN_REGRET_COLUMNS = ("step", "k", "regret", "diverged")


@dataclass(frozen=True)
class SweepGrid:
    epsilons: tuple[float, ...] = DEFAULT_EPSILONS
    settings: tuple[NoiseSetting, ...] = (NoiseSetting.DISTURBANCE_ONLY,
                                          NoiseSetting.ALL_DATA)
    T_values: tuple[int, ...] = DEFAULT_T_VALUES
    k_values: tuple[int, ...] = DEFAULT_K_VALUES
    horizon_fractions: tuple[float, ...] = DEFAULT_FRACTIONS
    seeds: tuple[int, ...] = DEFAULT_SEEDS

    def __post_init__(self):
        for name in ("epsilons", "settings", "T_values", "k_values",
                     "horizon_fractions", "seeds"):
            if not getattr(self, name):
                raise ValueError(f"grid field {name} must be non-empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ValueError("grid seeds must be distinct")
        object.__setattr__(
            self, "settings",
            tuple(NoiseSetting(s) for s in self.settings))


@dataclass(frozen=True)
class ResultRow:
    experiment: str
    setting: str
    epsilon: float
    T: int
    k: int
    seed: int
    cost_alg: float
    cost_opt: float
    regret: float
    diverged: bool
    divergence_step: int | None
    horizon_fraction: float | None = None


def resolve_horizon(fraction: float, T: int) -> int:
    """Integer horizon from a fraction of the episode length (at least 1)."""
    return max(1, round(fraction * T))


def make_truth(base_seed: int, experiment: str, T: int, seed: int) -> GroundTruth:
    spec = SystemSpec(T=T, base_seed=seed_mix(base_seed, experiment,
                                              "truth", T, seed))
    return build_ground_truth(spec)


def _noise_seed(base_seed, experiment, setting, epsilon, T, seed) -> int:
    return seed_mix(base_seed, experiment, "noise", setting.value,
                    float(epsilon), T, seed)


def _run_cell(truth, setting, epsilon, noise_seed, k) -> tuple:
    """One online episode vs the clairvoyant optimum on the same instance."""
    pred = inject_noise(truth, epsilon, setting, noise_seed)
    _, opt_traj = solve_offline(truth)
    rec = run_online(truth, pred, MpcConfig(k=k))
    regret = dynamic_regret(rec.cost_alg, opt_traj.total_cost)
    return rec, opt_traj.total_cost, regret


# --- regret vs episode length ------------------------------------------------

def _regret_curve_cell(args) -> ResultRow:
    base_seed, setting_value, epsilon, fraction, T, seed = args
    setting = NoiseSetting(setting_value)
    truth = make_truth(base_seed, "regret_curve", T, seed)
    k = resolve_horizon(fraction, T)
    noise_seed = _noise_seed(base_seed, "regret_curve", setting, epsilon, T, seed)
    rec, cost_opt, regret = _run_cell(truth, setting, epsilon, noise_seed, k)
    return ResultRow(
        experiment="regret_curve", setting=setting.value, epsilon=epsilon,
        T=T, k=k, seed=seed, cost_alg=rec.cost_alg, cost_opt=cost_opt,
        regret=regret, diverged=rec.diverged,
        divergence_step=rec.divergence_step, horizon_fraction=fraction)


def sweep_regret_vs_T(grid: SweepGrid, base_seed: int = 0,
                      jobs: int = 1) -> list[ResultRow]:
    """Online-vs-optimal regret over (setting, epsilon, fraction, T) cells.

    One instance per (T, seed); the first grid seed fixes the episode.
    """
    seed = grid.seeds[0]
    cells = [(base_seed, setting.value, eps, fraction, T, seed)
             for setting in grid.settings
             for eps in grid.epsilons
             for fraction in grid.horizon_fractions
             for T in grid.T_values]
    rows = _map_cells(_regret_curve_cell, cells, jobs)
    rows.sort(key=lambda r: (r.experiment, r.setting, r.epsilon,
                             r.horizon_fraction, r.T, r.k, r.seed))
    return rows


# --- per-step error vs horizon ------------------------------------------------

def _per_step_cell(args):
    base_seed, setting_value, epsilon, k, T, seed = args
    setting = NoiseSetting(setting_value)
    truth = make_truth(base_seed, "per_step", T, seed)
    noise_seed = _noise_seed(base_seed, "per_step", setting, epsilon, T, seed)
    rec, _, _ = _run_cell(truth, setting, epsilon, noise_seed, k)
    return (setting.value, epsilon, k, rec.per_step_errors, rec.diverged)


def sweep_per_step_error(grid: SweepGrid, base_seed: int = 0, T: int = 100,
                         jobs: int = 1):
    """Long-form per-step errors for every (setting, epsilon, k) cell.

    Returns (rows, means): rows are (setting, epsilon, k, t, e_t) tuples,
    means maps (setting, epsilon, k) to the cell's mean per-step error
    (inf when a run diverges before producing any step).
    """
    seed = grid.seeds[0]
    cells = [(base_seed, setting.value, eps, k, T, seed)
             for setting in grid.settings
             for eps in grid.epsilons
             for k in grid.k_values]
    results = _map_cells(_per_step_cell, cells, jobs)

    rows = []
    means = {}
    for setting_value, eps, k, errors, _diverged in results:
        for t, e in enumerate(errors):
            rows.append((setting_value, eps, k, t, float(e)))
        means[(setting_value, eps, k)] = (
            float(np.mean(errors)) if len(errors) else math.inf)
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3]))
    return rows, means


# --- mean/std regret tables ---------------------------------------------------

@dataclass(frozen=True)
class TableRow:
    setting: str
    epsilon: float
    k: int
    value: float
    n_diverged: int


def _table_cell(args) -> ResultRow:
    base_seed, setting_value, epsilon, k, T, seed = args
    setting = NoiseSetting(setting_value)
    truth = make_truth(base_seed, "regret_table", T, seed)
    noise_seed = _noise_seed(base_seed, "regret_table", setting, epsilon, T, seed)
    rec, cost_opt, regret = _run_cell(truth, setting, epsilon, noise_seed, k)
    return ResultRow(
        experiment="regret_table", setting=setting.value, epsilon=epsilon,
        T=T, k=k, seed=seed, cost_alg=rec.cost_alg, cost_opt=cost_opt,
        regret=regret, diverged=rec.diverged,
        divergence_step=rec.divergence_step)


def regret_table(grid: SweepGrid, base_seed: int = 0, T: int = 100,
                 jobs: int = 1):
    """Mean/std of regret over the grid seeds for every (setting, eps, k).

    Diverged runs are excluded from the mean/std and counted separately;
    cells without enough non-diverged runs carry the inf sentinel (no mean
    when all runs diverged, no std with fewer than two survivors).
    Returns (mean_rows, std_rows, run_rows).
    """
    if len(grid.seeds) < 2:
        raise ValueError("regret_table needs at least 2 seeds for a std")
    cells = [(base_seed, setting.value, eps, k, T, seed)
             for setting in grid.settings
             for eps in grid.epsilons
             for k in grid.k_values
             for seed in grid.seeds]
    runs = _map_cells(_table_cell, cells, jobs)
    runs.sort(key=lambda r: (r.setting, r.epsilon, r.k, r.seed))

    mean_rows, std_rows = [], []
    for setting in grid.settings:
        for eps in grid.epsilons:
            for k in grid.k_values:
                cell = [r for r in runs
                        if (r.setting, r.epsilon, r.k) == (setting.value, eps, k)]
                regrets = [r.regret for r in cell if not r.diverged]
                n_div = sum(r.diverged for r in cell)
                mean = float(np.mean(regrets)) if regrets else math.inf
                std = (float(np.std(regrets, ddof=1))
                       if len(regrets) >= 2 else math.inf)
                mean_rows.append(TableRow(setting.value, eps, k, mean, n_div))
                std_rows.append(TableRow(setting.value, eps, k, std, n_div))
    return mean_rows, std_rows, runs


# --- learned-predictor experiment ----------------------------------------------

@dataclass(frozen=True)
class NnRow:
    step: int
    k: int
    regret: float
    diverged: bool


def nn_ground_truth(base_seed: int, T: int = 100) -> GroundTruth:
    return make_truth(base_seed, "nn", T, 0)


def _nn_cell(args) -> NnRow:
    truth, weights, biases, step, k = args
    from .mlp import Mlp

    model = Mlp(weights=weights, biases=biases)
    spec = SystemSpec(T=truth.T, dt=truth.dt, x0=truth.x0)
    pred = predict_problem_data(model, spec)
    _, opt_traj = solve_offline(truth)
    rec = run_online(truth, pred, MpcConfig(k=k))
    regret = dynamic_regret(rec.cost_alg, opt_traj.total_cost)
    return NnRow(step=step, k=k, regret=regret, diverged=rec.diverged)


def nn_experiment(truth: GroundTruth, checkpoints: list[Checkpoint],
                  k_values=DEFAULT_K_VALUES, jobs: int = 1) -> list[NnRow]:
    """One online run per (training checkpoint, horizon) pair."""
    cells = [(truth, ck.model.weights, ck.model.biases, ck.step, k)
             for ck in checkpoints
             for k in k_values]
    rows = _map_cells(_nn_cell, cells, jobs)
    rows.sort(key=lambda r: (r.step, r.k))
    return rows


def run_nn_experiment(base_seed: int = 0, T: int = 100,
                      cfg: TrainConfig | None = None,
                      k_values=DEFAULT_K_VALUES, jobs: int = 1):
    """Train the predictor on the episode, then sweep (checkpoint, horizon).

    Returns (truth, checkpoints, rows).
    """
    cfg = cfg or TrainConfig(init_seed=seed_mix(base_seed, "nn", "init", 0))
    truth = nn_ground_truth(base_seed, T)
    checkpoints = train(truth, cfg)
    rows = nn_experiment(truth, checkpoints, k_values, jobs=jobs)
    return truth, checkpoints, rows


# --- execution + CSV ------------------------------------------------------------

def _map_cells(fn, cells, jobs: int) -> list:
    if jobs is None or jobs <= 1 or len(cells) <= 1:
        return [fn(c) for c in cells]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, cells))


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def write_csv(path, columns, rows) -> None:
    """UTF-8 CSV with mandatory header, '.' decimals, 'inf' sentinel."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_regret_curve_csv(rows: list[ResultRow], path) -> None:
    write_csv(path, REGRET_CURVE_COLUMNS,
              [(r.experiment, r.setting, r.epsilon, r.horizon_fraction,
                r.T, r.k, r.seed, r.cost_alg, r.cost_opt, r.regret,
                r.diverged, r.divergence_step) for r in rows])


def write_per_step_csv(rows, path) -> None:
    write_csv(path, PER_STEP_COLUMNS, rows)


def write_table_csvs(mean_rows, std_rows, mean_path, std_path) -> None:
    write_csv(mean_path, TABLE_MEAN_COLUMNS,
              [(r.setting, r.epsilon, r.k, r.value, r.n_diverged)
               for r in mean_rows])
    write_csv(std_path, TABLE_STD_COLUMNS,
              [(r.setting, r.epsilon, r.k, r.value, r.n_diverged)
               for r in std_rows])


def write_nn_error_csv(checkpoints: list[Checkpoint], path) -> None:
    write_csv(path, NN_ERROR_COLUMNS,
              [(ck.step, ck.mean_error) for ck in checkpoints])


def write_nn_regret_csv(rows: list[NnRow], path) -> None:
    write_csv(path, NN_REGRET_COLUMNS,
              [(r.step, r.k, r.regret, r.diverged) for r in rows])
