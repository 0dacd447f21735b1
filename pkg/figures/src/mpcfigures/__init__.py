"""Figure rendering for the LTV-MPC benchmark CSV outputs.

Eight figure families, one command each, all display-only (no metric is ever
recomputed from trajectories):

  fig-regret-disturbance / fig-regret-all   regret vs episode length curves
  fig-per-step                              per-step error vs horizon (log y)
  fig-table-mean-disturbance / fig-table-mean-all   mean regret heat tables
  fig-table-std                             std regret heat tables
  fig-nn-error                              predictor training error curve
  fig-nn-regret                             predictor regret heat table
"""

from .csvio import FigureDataError, as_bool, as_float, load_rows
from .render import (
    FigureSpec,
    nn_error_figure,
    nn_regret_figure,
    per_step_figure,
    regret_curves_figure,
    render,
    table_figure,
)

__version__ = "0.1.0"
