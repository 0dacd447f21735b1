"""Command-line front end: every experiment and utility as a subcommand.

Conventions: data goes to files under --out (or stdout when no --out is
given), log lines go to stderr, exit code 0 on success, 1 on runtime errors
(bad values, unwritable paths, bad config), 2 on usage errors.  A JSON
config file can preset grid/system/training values; flags override it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .harness import (
    SweepGrid,
    make_truth,
    nn_experiment,
    nn_ground_truth,
    regret_table,
    resolve_horizon,
    sweep_per_step_error,
    sweep_regret_vs_T,
    write_nn_error_csv,
    write_nn_regret_csv,
    write_per_step_csv,
    write_regret_curve_csv,
    write_table_csvs,
)
from .mlp import TrainConfig, load_checkpoints, save_checkpoints, train
from .mpc import MpcConfig, dynamic_regret, run_online, run_record_to_dict, solve_offline
from .noise import NoiseSetting, inject_noise, parse_setting
from .seeding import seed_mix
from .system import SystemSpec, build_ground_truth, ground_truth_to_dict

GRID_KEYS = {"epsilons", "settings", "T_values", "k_values",
             "horizon_fractions", "seeds"}
SYSTEM_KEYS = {"T", "dt", "x0", "disturbance_std", "base_seed"}
TRAIN_KEYS = {"total_steps", "checkpoint_steps", "learning_rate", "init_seed"}
CONFIG_KEYS = GRID_KEYS | SYSTEM_KEYS | TRAIN_KEYS


class CliError(Exception):
    """Runtime error carrying the message printed to stderr (exit 1)."""


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_config(path) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise CliError(f"config {path} must hold a JSON object")
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise CliError(
            f"unknown config keys {sorted(unknown)}; "
            f"allowed: {sorted(CONFIG_KEYS)}")
    return cfg


def _grid_from(config: dict, args) -> SweepGrid:
    kwargs = {}
    for key in GRID_KEYS:
        if key in config:
            kwargs[key] = tuple(config[key])
    if getattr(args, "setting", None):
        kwargs["settings"] = (parse_setting(args.setting),)
    elif "settings" in kwargs:
        kwargs["settings"] = tuple(parse_setting(s) for s in kwargs["settings"])
    if getattr(args, "seeds", None) is not None:
        if args.seeds < 1:
            raise CliError(f"--seeds must be >= 1, got {args.seeds}")
        kwargs["seeds"] = tuple(range(args.seeds))
    if getattr(args, "T", None) is not None:
        kwargs["T_values"] = (args.T,)
    try:
        return SweepGrid(**kwargs)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _system_spec(config: dict, args, default_T=100) -> SystemSpec:
    kwargs = {k: config[k] for k in SYSTEM_KEYS if k in config}
    if getattr(args, "T", None) is not None:
        kwargs["T"] = args.T
    kwargs.setdefault("T", default_T)
    if getattr(args, "dt", None) is not None:
        kwargs["dt"] = args.dt
    if getattr(args, "seed", None) is not None:
        kwargs["base_seed"] = args.seed
    try:
        return SystemSpec(**kwargs)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _train_config(config: dict, args) -> TrainConfig:
    kwargs = {k: config[k] for k in TRAIN_KEYS if k in config}
    if "checkpoint_steps" in kwargs:
        kwargs["checkpoint_steps"] = tuple(kwargs["checkpoint_steps"])
    if getattr(args, "seed", None) is not None:
        kwargs["init_seed"] = seed_mix(args.seed, "nn", "init", 0)
    try:
        return TrainConfig(**kwargs)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _out_dir(args) -> Path | None:
    if args.out is None:
        return None
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise CliError(f"output directory {out} is not writable: {exc}") from exc
    return out


def _emit_json(payload: dict, out: Path | None, filename: str) -> None:
    text = json.dumps(payload, indent=2)
    if out is None:
        print(text)
    else:
        (out / filename).write_text(text + "\n", encoding="utf-8")
        _log(f"wrote {out / filename}")


def _check_epsilon(value: float) -> float:
    if value < 0:
        raise CliError(f"invalid epsilon {value}: must be >= 0")
    return value


def _horizon_for(args, T: int) -> int:
    if args.horizon is not None and args.horizon_frac is not None:
        raise CliError("give either --horizon or --horizon-frac, not both")
    if args.horizon is not None:
        if args.horizon < 1:
            raise CliError(f"invalid horizon {args.horizon}: must be >= 1")
        return args.horizon
    if args.horizon_frac is not None:
        if args.horizon_frac <= 0:
            raise CliError(
                f"invalid horizon fraction {args.horizon_frac}: must be > 0")
        return resolve_horizon(args.horizon_frac, T)
    return T


# --- subcommands ---------------------------------------------------------------

def _cmd_ground_truth(args, config) -> int:
    spec = _system_spec(config, args)
    truth = build_ground_truth(spec)
    _emit_json(ground_truth_to_dict(truth), _out_dir(args), "ground_truth.json")
    return 0


def _cmd_solve_offline(args, config) -> int:
    spec = _system_spec(config, args)
    truth = build_ground_truth(spec)
    _, traj = solve_offline(truth)
    payload = {
        "T": truth.T,
        "cost_opt": traj.total_cost,
        "states": traj.states.tolist(),
        "controls": traj.controls.tolist(),
        "stage_costs": traj.stage_costs.tolist(),
    }
    _emit_json(payload, _out_dir(args), "offline_solution.json")
    return 0


def _cmd_run_online(args, config) -> int:
    spec = _system_spec(config, args)
    epsilon = _check_epsilon(args.epsilon)
    setting = parse_setting(args.setting or NoiseSetting.DISTURBANCE_ONLY.value)
    truth = build_ground_truth(spec)
    k = _horizon_for(args, truth.T)
    pred = inject_noise(truth, epsilon, setting,
                        seed_mix(spec.base_seed, "run-online", "noise"))
    _, opt = solve_offline(truth)
    rec = run_online(truth, pred, MpcConfig(k=k))
    payload = run_record_to_dict(rec)
    payload["cost_opt"] = opt.total_cost
    payload["regret"] = ("inf" if rec.diverged
                         else dynamic_regret(rec.cost_alg, opt.total_cost))
    _emit_json(payload, _out_dir(args), "run_online.json")
    return 0


def _cmd_sweep_regret(args, config) -> int:
    grid = _grid_from(config, args)
    out = _out_dir(args)
    if out is None:
        raise CliError("sweep-regret requires --out DIR")
    base_seed = args.seed if args.seed is not None else 0
    rows = sweep_regret_vs_T(grid, base_seed=base_seed, jobs=args.jobs)
    _log(f"sweep-regret: {len(rows)} cells done")
    write_regret_curve_csv(rows, out / "regret_curve.csv")
    _log(f"wrote {out / 'regret_curve.csv'}")
    return 0


def _cmd_sweep_per_step(args, config) -> int:
    grid = _grid_from(config, args)
    out = _out_dir(args)
    if out is None:
        raise CliError("sweep-per-step requires --out DIR")
    base_seed = args.seed if args.seed is not None else 0
    T = args.T if args.T is not None else 100
    rows, _ = sweep_per_step_error(grid, base_seed=base_seed, T=T,
                                   jobs=args.jobs)
    _log(f"sweep-per-step: {len(rows)} rows")
    write_per_step_csv(rows, out / "per_step.csv")
    _log(f"wrote {out / 'per_step.csv'}")
    return 0


def _cmd_regret_table(args, config) -> int:
    grid = _grid_from(config, args)
    out = _out_dir(args)
    if out is None:
        raise CliError("regret-table requires --out DIR")
    base_seed = args.seed if args.seed is not None else 0
    T = args.T if args.T is not None else 100
    mean_rows, std_rows, _ = regret_table(grid, base_seed=base_seed, T=T,
                                          jobs=args.jobs)
    write_table_csvs(mean_rows, std_rows,
                     out / "table_mean.csv", out / "table_std.csv")
    _log(f"wrote {out / 'table_mean.csv'} and {out / 'table_std.csv'}")
    return 0


def _cmd_nn_train(args, config) -> int:
    out = _out_dir(args)
    if out is None:
        raise CliError("nn-train requires --out DIR")
    base_seed = args.seed if args.seed is not None else 0
    T = args.T if args.T is not None else 100
    cfg = _train_config(config, args)
    truth = nn_ground_truth(base_seed, T)
    _log(f"nn-train: {cfg.total_steps} steps on T={T} episode")
    checkpoints = train(truth, cfg)
    save_checkpoints(out / "nn_checkpoints.npz", checkpoints)
    write_nn_error_csv(checkpoints, out / "nn_error.csv")
    _log(f"wrote {out / 'nn_checkpoints.npz'} and {out / 'nn_error.csv'}")
    return 0


def _cmd_nn_eval(args, config) -> int:
    out = _out_dir(args)
    if out is None:
        raise CliError("nn-eval requires --out DIR")
    ckpt_path = Path(args.checkpoints) if args.checkpoints else out / "nn_checkpoints.npz"
    if not ckpt_path.exists():
        raise CliError(f"checkpoint file {ckpt_path} not found (run nn-train)")
    base_seed = args.seed if args.seed is not None else 0
    T = args.T if args.T is not None else 100
    grid = _grid_from(config, args)
    truth = nn_ground_truth(base_seed, T)
    checkpoints = load_checkpoints(ckpt_path)
    rows = nn_experiment(truth, checkpoints, grid.k_values, jobs=args.jobs)
    write_nn_regret_csv(rows, out / "nn_regret.csv")
    _log(f"wrote {out / 'nn_regret.csv'}")
    return 0


def _cmd_version(args, config) -> int:
    print(__version__)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ltvmpc",
        description="Online MPC dynamic-regret benchmark on a 2-D "
                    "time-varying tracking LQR.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_text):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(fn=fn)
        p.add_argument("--T", type=int, default=None,
                       help="episode length (steps)")
        p.add_argument("--dt", type=float, default=None,
                       help="system time step (default 0.1)")
        p.add_argument("--epsilon", type=float, default=0.0,
                       help="prediction-noise strength")
        p.add_argument("--setting", choices=[s.value for s in NoiseSetting],
                       default=None, help="which problem data gets noise")
        p.add_argument("--horizon", type=int, default=None,
                       help="prediction horizon in steps")
        p.add_argument("--horizon-frac", type=float, default=None,
                       help="prediction horizon as a fraction of T")
        p.add_argument("--seed", type=int, default=None, help="base seed")
        p.add_argument("--seeds", type=int, default=None,
                       help="number of seeds (0..N-1) for aggregates")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--config", default=None, help="JSON config path")
        p.add_argument("--jobs", type=int, default=os.cpu_count(),
                       help="parallel worker processes")
        p.add_argument("--checkpoints", default=None,
                       help="nn checkpoint .npz path (nn-eval)")
        return p

    add("ground-truth", _cmd_ground_truth, "emit the episode's problem data as JSON")
    add("solve-offline", _cmd_solve_offline, "solve the clairvoyant optimum")
    add("run-online", _cmd_run_online, "run one online MPC episode")
    add("sweep-regret", _cmd_sweep_regret, "regret vs episode length sweep")
    add("sweep-per-step", _cmd_sweep_per_step, "per-step error vs horizon sweep")
    add("regret-table", _cmd_regret_table, "mean/std regret tables over seeds")
    add("nn-train", _cmd_nn_train, "train the time->problem-data predictor")
    add("nn-eval", _cmd_nn_eval, "online MPC driven by trained checkpoints")
    add("version", _cmd_version, "print the package version")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    config = {}
    try:
        config = _load_config(args.config)
        return args.fn(args, config)
    except CliError as exc:
        _log(f"error: {exc}")
        return 1
    except ValueError as exc:
        _log(f"error: {exc}")
        return 1
    except OSError as exc:
        _log(f"error: {exc}")
        return 1


def run() -> None:
    raise SystemExit(main())
