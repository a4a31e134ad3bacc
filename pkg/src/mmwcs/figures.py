"""Render benchmark figures to files next to the CSV reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import TrialRecord, summarize

_METHOD_STYLE = {
    "omp1d": dict(color="tab:blue", marker="o"),
    "somp2stage": dict(color="tab:orange", marker="s"),
    "omp2d": dict(color="tab:green", marker="^"),
    "ls1d": dict(color="tab:red", marker="d"),
    "ls2d_simple": dict(color="tab:purple", marker="v"),
}


def render_nmse_figure(records: list[TrialRecord], path: str | Path) -> Path:
    """Mean NMSE versus SNR, one curve per method.

    Noiseless rows (infinite SNR) have no x position and are skipped.
    """
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for method, rows in _by_method(records):
        points = [
            (row.snr_db, row.mean_nmse_db)
            for row in rows
            if np.isfinite(row.snr_db) and np.isfinite(row.mean_nmse_db)
        ]
        if not points:
            continue
        points.sort()
        xs, ys = zip(*points)
        ax.plot(xs, ys, label=method, **_METHOD_STYLE.get(method, {}))
    ax.set_xlabel("SNR (dB)")
    ax.set_ylabel("mean NMSE (dB)")
    ax.grid(True, alpha=0.4)
    if ax.get_legend_handles_labels()[0]:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def render_runtime_figure(records: list[TrialRecord], path: str | Path) -> Path:
    """Median estimator wall time versus grid size, one curve per method."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for method, rows in _by_method(records):
        points = [
            (row.grid_n, row.median_time_s) for row in rows if np.isfinite(row.median_time_s)
        ]
        if not points:
            continue
        points.sort()
        xs, ys = zip(*points)
        ax.plot(xs, ys, label=method, **_METHOD_STYLE.get(method, {}))
    ax.set_xlabel("grid size per side")
    ax.set_ylabel("median wall time (s)")
    ax.set_yscale("log")
    ax.grid(True, which="both", alpha=0.4)
    if ax.get_legend_handles_labels()[0]:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def _by_method(records: list[TrialRecord]):
    summary = summarize(records)
    methods = sorted({row.method for row in summary})
    for method in methods:
        yield method, [row for row in summary if row.method == method]
