"""Renderers for the three figure kinds: curves, log-curves, table heatmaps.

Diverged results are never plotted as numbers: curve panels mark them with a
red cross pinned to the top of the axis, heatmap cells are hatched and
labelled "div".  Rendering is deterministic: fixed figure geometry, fixed
fonts, no timestamps in the PNG payload.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import FigureDataError, as_bool, as_float, load_rows

# Display floor for log-scale axes; exact zeros (perfect predictions) would
# otherwise be undrawable.
LOG_FLOOR = 1e-16

SAVEFIG_KWARGS = {"dpi": 110, "metadata": {"Software": "mpcfigures"}}


@dataclass(frozen=True)
class FigureSpec:
    """One figure: input CSV path(s), kind, output path, axis labels."""

    inputs: tuple
    kind: str  # "curves" | "log-curves" | "table-heatmap"
    output: str
    xlabel: str = ""
    ylabel: str = ""
    options: dict = field(default_factory=dict)


def render(spec: FigureSpec) -> str:
    """Render the figure described by ``spec`` and write the image file."""
    options = dict(spec.options)
    family = options.pop("family", None)
    if spec.kind == "curves":
        fig = regret_curves_figure(spec.inputs[0], **options)
    elif spec.kind == "log-curves":
        if family == "nn-error":
            fig = nn_error_figure(spec.inputs[0])
        else:
            fig = per_step_figure(spec.inputs[0])
    elif spec.kind == "table-heatmap":
        if family == "nn-regret":
            fig = nn_regret_figure(spec.inputs[0])
        else:
            fig = table_figure(spec.inputs[0], **options)
    else:
        raise FigureDataError(f"unknown figure kind {spec.kind!r}")
    fig.savefig(spec.output, **SAVEFIG_KWARGS)
    plt.close(fig)
    return spec.output


def _sorted_unique(values):
    return sorted(set(values))


def _mark_diverged(ax, xs, top):
    ax.plot(xs, [top] * len(xs), linestyle="none", marker="x", color="red",
            markersize=7, label="diverged")


# --- regret vs episode length --------------------------------------------------

def regret_curves_figure(path, setting=None):
    rows = load_rows(path, ("setting", "epsilon", "horizon_fraction", "T",
                            "regret", "diverged"))
    if setting is not None:
        rows = [r for r in rows if r["setting"] == setting]
        if not rows:
            raise FigureDataError(f"no rows with setting={setting!r} in {path}")
    epsilons = _sorted_unique(as_float(r["epsilon"]) for r in rows)
    fractions = _sorted_unique(as_float(r["horizon_fraction"]) for r in rows)

    n = len(epsilons)
    ncols = min(4, n)
    nrows = math.ceil(n / ncols)
    fig, axes = plt.subplots(nrows, ncols, figsize=(3.4 * ncols, 2.9 * nrows),
                             squeeze=False, sharex=True)
    for idx, eps in enumerate(epsilons):
        ax = axes[idx // ncols][idx % ncols]
        panel = [r for r in rows if as_float(r["epsilon"]) == eps]
        finite_tops = [as_float(r["regret"]) for r in panel
                       if not as_bool(r["diverged"])]
        top = 1.1 * max(finite_tops) if finite_tops else 1.0
        for frac in fractions:
            line = sorted(
                (r for r in panel
                 if as_float(r["horizon_fraction"]) == frac),
                key=lambda r: int(r["T"]))
            ts = [int(r["T"]) for r in line if not as_bool(r["diverged"])]
            vals = [as_float(r["regret"]) for r in line
                    if not as_bool(r["diverged"])]
            ax.plot(ts, vals, marker="o", markersize=3,
                    label=f"horizon {frac:g}T")
            bad = [int(r["T"]) for r in line if as_bool(r["diverged"])]
            if bad:
                _mark_diverged(ax, bad, top)
        ax.set_title(f"noise strength {eps:g}", fontsize=9)
        ax.tick_params(labelsize=8)
    for idx in range(n, nrows * ncols):
        axes[idx // ncols][idx % ncols].set_axis_off()
    handles, labels = axes[0][0].get_legend_handles_labels()
    fig.legend(handles, labels, loc="lower center", ncol=len(labels),
               fontsize=8, frameon=False)
    fig.supxlabel("episode length T", fontsize=10)
    fig.supylabel("dynamic regret", fontsize=10)
    fig.tight_layout(rect=(0.02, 0.06, 1, 1))
    return fig


# --- per-step error vs horizon ---------------------------------------------------

def per_step_figure(path):
    rows = load_rows(path, ("setting", "epsilon", "k", "t", "e_t"))
    settings = _sorted_unique(r["setting"] for r in rows)
    fig, axes = plt.subplots(1, len(settings),
                             figsize=(4.2 * len(settings), 3.4),
                             squeeze=False)
    for j, setting in enumerate(settings):
        ax = axes[0][j]
        sub = [r for r in rows if r["setting"] == setting]
        epsilons = _sorted_unique(as_float(r["epsilon"]) for r in sub)
        for eps in epsilons:
            cells = {}
            for r in sub:
                if as_float(r["epsilon"]) == eps:
                    cells.setdefault(int(r["k"]), []).append(as_float(r["e_t"]))
            ks = sorted(cells)
            # Display averaging of the tabulated e_t values per horizon.
            means = [np.mean(cells[k]) + LOG_FLOOR for k in ks]
            ax.semilogy(ks, means, marker="o", markersize=3,
                        label=f"eps {eps:g}")
        ax.set_title(setting, fontsize=9)
        ax.set_xlabel("prediction horizon k", fontsize=9)
        ax.tick_params(labelsize=8)
        ax.legend(fontsize=7)
    axes[0][0].set_ylabel("mean per-step error (log scale)", fontsize=9)
    fig.tight_layout()
    return fig


# --- mean/std regret tables -------------------------------------------------------

def table_figure(path, value_column="mean_regret", setting=None):
    rows = load_rows(path, ("setting", "epsilon", "k", value_column,
                            "n_diverged"))
    settings = ([setting] if setting is not None
                else _sorted_unique(r["setting"] for r in rows))
    if setting is not None and not any(r["setting"] == setting for r in rows):
        raise FigureDataError(f"no rows with setting={setting!r} in {path}")

    fig, axes = plt.subplots(1, len(settings),
                             figsize=(5.2 * len(settings), 3.8),
                             squeeze=False)
    for j, name in enumerate(settings):
        ax = axes[0][j]
        sub = [r for r in rows if r["setting"] == name]
        epsilons = _sorted_unique(as_float(r["epsilon"]) for r in sub)
        ks = _sorted_unique(int(r["k"]) for r in sub)
        grid = np.full((len(epsilons), len(ks)), np.nan)
        cell = {}
        for r in sub:
            i = epsilons.index(as_float(r["epsilon"]))
            c = ks.index(int(r["k"]))
            value = as_float(r[value_column])
            cell[(i, c)] = (value, int(r["n_diverged"]))
            if math.isfinite(value):
                grid[i, c] = math.log10(max(value, LOG_FLOOR))
        masked = np.ma.masked_invalid(grid)
        ax.imshow(masked, aspect="auto", cmap="viridis")
        for (i, c), (value, n_div) in cell.items():
            if not math.isfinite(value):
                # Diverged cell: a marker, never a number.
                ax.add_patch(plt.Rectangle(
                    (c - 0.5, i - 0.5), 1, 1, fill=False, hatch="///",
                    edgecolor="red", linewidth=0.5))
                ax.text(c, i, "div", ha="center", va="center", fontsize=7,
                        color="red")
            else:
                label = f"{value:.3g}" + ("*" if n_div else "")
                ax.text(c, i, label, ha="center", va="center", fontsize=6,
                        color="white")
        ax.set_xticks(range(len(ks)), [str(k) for k in ks], fontsize=8)
        ax.set_yticks(range(len(epsilons)), [f"{e:g}" for e in epsilons],
                      fontsize=8)
        ax.set_xlabel("prediction horizon k", fontsize=9)
        ax.set_ylabel("noise strength", fontsize=9)
        ax.set_title(f"{value_column} ({name})", fontsize=9)
    fig.tight_layout()
    return fig


# --- learned-predictor figures ------------------------------------------------------

def nn_error_figure(path):
    rows = load_rows(path, ("step", "mean_pred_error"))
    steps = [int(r["step"]) for r in rows]
    errors = [as_float(r["mean_pred_error"]) + LOG_FLOOR for r in rows]
    order = np.argsort(steps)
    fig, ax = plt.subplots(figsize=(4.6, 3.2))
    ax.loglog(np.array(steps)[order], np.array(errors)[order], marker="o",
              markersize=3)
    ax.set_xlabel("gradient step", fontsize=9)
    ax.set_ylabel("mean prediction error", fontsize=9)
    ax.tick_params(labelsize=8)
    fig.tight_layout()
    return fig


def nn_regret_figure(path):
    rows = load_rows(path, ("step", "k", "regret", "diverged"))
    steps = _sorted_unique(int(r["step"]) for r in rows)
    ks = _sorted_unique(int(r["k"]) for r in rows)
    grid = np.full((len(steps), len(ks)), np.nan)
    flags = {}
    for r in rows:
        i = steps.index(int(r["step"]))
        c = ks.index(int(r["k"]))
        value = as_float(r["regret"])
        diverged = as_bool(r["diverged"])
        flags[(i, c)] = (value, diverged)
        if not diverged and math.isfinite(value):
            grid[i, c] = math.log10(max(value, LOG_FLOOR))
    fig, ax = plt.subplots(figsize=(5.4, 4.2))
    ax.imshow(np.ma.masked_invalid(grid), aspect="auto", cmap="viridis")
    for (i, c), (value, diverged) in flags.items():
        if diverged or not math.isfinite(value):
            ax.add_patch(plt.Rectangle(
                (c - 0.5, i - 0.5), 1, 1, fill=False, hatch="///",
                edgecolor="red", linewidth=0.5))
            ax.text(c, i, "div", ha="center", va="center", fontsize=7,
                    color="red")
        else:
            ax.text(c, i, f"{value:.3g}", ha="center", va="center",
                    fontsize=6, color="white")
    ax.set_xticks(range(len(ks)), [str(k) for k in ks], fontsize=8)
    ax.set_yticks(range(len(steps)), [str(s) for s in steps], fontsize=8)
    ax.set_xlabel("prediction horizon k", fontsize=9)
    ax.set_ylabel("training step", fontsize=9)
    ax.set_title("dynamic regret of the learned predictor", fontsize=9)
    fig.tight_layout()
    return fig
