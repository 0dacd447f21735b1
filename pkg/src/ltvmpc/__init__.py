"""Benchmark lab for online MPC dynamic regret on a 2-D time-varying LQR.

Builds a seeded ground-truth tracking problem, solves it exactly (affine
Riccati recursion, dense-KKT verification oracle), runs a receding-horizon
controller on noisy or learned predictions, and sweeps noise strengths,
horizons, and episode lengths into reproducible CSV result files.
"""

from .harness import (
    NnRow,
    ResultRow,
    SweepGrid,
    TableRow,
    make_truth,
    nn_experiment,
    nn_ground_truth,
    regret_table,
    resolve_horizon,
    run_nn_experiment,
    sweep_per_step_error,
    sweep_regret_vs_T,
    write_nn_error_csv,
    write_nn_regret_csv,
    write_per_step_csv,
    write_regret_curve_csv,
    write_table_csvs,
)
from .mlp import (
    Checkpoint,
    Mlp,
    NonFiniteLoss,
    TrainConfig,
    forward,
    forward_batch,
    init_mlp,
    load_checkpoints,
    mean_prediction_error,
    mse_loss,
    predict_problem_data,
    save_checkpoints,
    train,
)
from .mpc import (
    MpcConfig,
    RunRecord,
    dynamic_regret,
    mpc_step,
    run_online,
    run_record_to_dict,
    solve_offline,
)
from .noise import (
    NoiseSetting,
    PredictedData,
    inject_noise,
    parse_setting,
    predicted_data_from_dict,
    predicted_data_to_dict,
    prediction_error_profile,
)
from .riccati import (
    AffinePolicy,
    DimensionMismatch,
    IndexOutOfWindow,
    NotPositiveDefinite,
    SingularKkt,
    Trajectory,
    evaluate_cost,
    optimal_action,
    riccati_backward,
    rollout,
    solve_kkt_dense,
)
from .seeding import seed_mix, substream
from .system import (
    GroundTruth,
    StageData,
    SystemSpec,
    build_ground_truth,
    flatten_stage,
    ground_truth_from_dict,
    ground_truth_from_json,
    ground_truth_to_dict,
    ground_truth_to_json,
    sample_disturbances,
    stage_data_at,
    unflatten_stage,
)

__version__ = "0.1.0"
