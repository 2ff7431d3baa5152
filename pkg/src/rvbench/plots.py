"""Figure rendering for the report commands.

Each report command can drop a PNG next to its CSV; the functions here take
the same dataframes that get written to disk. Rendering is headless (Agg).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_summary(table: pd.DataFrame, symbol: str, path) -> None:
    """Bar chart of per-segment means with min/max whiskers."""
    fig, ax = plt.subplots(figsize=(7, 4))
    x = np.arange(len(table))
    means = table["mean"].to_numpy()
    ax.bar(x, means, color="steelblue", alpha=0.8)
    yerr = np.vstack([means - table["min"].to_numpy(),
                      table["max"].to_numpy() - means])
    ax.errorbar(x, means, yerr=yerr, fmt="none", ecolor="gray", capsize=3, lw=1)
    ax.set_xticks(x, table["segment"], rotation=20)
    ax.set_ylabel("mean (whiskers: min/max)")
    ax.set_title(f"{symbol}: segment summary")
    _finish(fig, path)


def render_loss_table(table: pd.DataFrame, loss_names, path) -> None:
    """One panel per loss, bars by model (averaged across symbols)."""
    avg = table.groupby("model", sort=False)[list(loss_names)].mean()
    ncol = min(3, len(loss_names))
    nrow = -(-len(loss_names) // ncol)
    fig, axes = plt.subplots(nrow, ncol, figsize=(4.2 * ncol, 3.2 * nrow), squeeze=False)
    for k, loss in enumerate(loss_names):
        ax = axes[k // ncol][k % ncol]
        ax.bar(np.arange(len(avg)), avg[loss].to_numpy(), color="indianred", alpha=0.85)
        ax.set_xticks(np.arange(len(avg)), avg.index, rotation=45, ha="right", fontsize=8)
        ax.set_title(loss)
    for k in range(len(loss_names), nrow * ncol):
        axes[k // ncol][k % ncol].set_axis_off()
    fig.suptitle("Average losses by model")
    _finish(fig, path)


def render_matrix(matrix: pd.DataFrame, title: str, path) -> None:
    """Heat map of a square model-by-model table (skill ratios, p-values)."""
    vals = matrix.to_numpy(dtype=float)
    fig, ax = plt.subplots(figsize=(1.0 + 0.55 * len(matrix.columns),
                                    1.0 + 0.5 * len(matrix)))
    im = ax.imshow(vals, cmap="RdYlGn_r", aspect="auto")
    ax.set_xticks(np.arange(len(matrix.columns)), matrix.columns,
                  rotation=45, ha="right", fontsize=8)
    ax.set_yticks(np.arange(len(matrix.index)), matrix.index, fontsize=8)
    for i in range(vals.shape[0]):
        for j in range(vals.shape[1]):
            ax.text(j, i, f"{vals[i, j]:.3g}", ha="center", va="center", fontsize=7)
    fig.colorbar(im, ax=ax, shrink=0.8)
    ax.set_title(title)
    _finish(fig, path)


def render_mcs(table: pd.DataFrame, level: float, path) -> None:
    """MCS p-values per model, one panel per symbol, cutoff line at 1-level."""
    symbols = list(dict.fromkeys(table["symbol"]))
    fig, axes = plt.subplots(len(symbols), 1, figsize=(7, 2.8 * len(symbols)),
                             squeeze=False)
    for k, sym in enumerate(symbols):
        ax = axes[k][0]
        sub = table[table["symbol"] == sym]
        colors = ["seagreen" if r else "lightgray" for r in sub["retained"]]
        ax.bar(np.arange(len(sub)), sub["mcs_p"].to_numpy(), color=colors)
        ax.axhline(1.0 - level, color="firebrick", ls="--", lw=1,
                   label=f"cutoff {1.0 - level:.2f}")
        ax.set_xticks(np.arange(len(sub)), sub["model"], rotation=45,
                      ha="right", fontsize=8)
        ax.set_ylabel("MCS p-value")
        ax.set_title(f"{sym}: retained set at {level:.0%}")
        ax.legend(fontsize=8)
    _finish(fig, path)


def render_deciles(table: pd.DataFrame, benchmark: str, path) -> None:
    """Relative loss across variance deciles, one line per model."""
    symbols = list(dict.fromkeys(table["symbol"]))
    fig, axes = plt.subplots(len(symbols), 1, figsize=(7, 3.2 * len(symbols)),
                             squeeze=False)
    for k, sym in enumerate(symbols):
        ax = axes[k][0]
        sub = table[table["symbol"] == sym]
        for model in dict.fromkeys(sub["model"]):
            rows = sub[sub["model"] == model]
            mids = (rows["decile_lo"].to_numpy() + rows["decile_hi"].to_numpy()) / 2
            ax.plot(mids, rows["relative_loss"].to_numpy(), marker="o",
                    ms=3, lw=1, label=model)
        ax.axhline(1.0, color="black", ls=":", lw=1)
        ax.set_xlabel("variance decile")
        ax.set_ylabel(f"loss relative to {benchmark}")
        ax.set_title(sym)
        ax.legend(fontsize=7)
    _finish(fig, path)
