"""Figure rendering for the command line reports.

Each report writes its numbers as a CSV table; the helpers here draw the
matching picture next to it. Everything goes through the Agg backend so
the reports work on headless machines, and every function closes its
figure after saving so long sweeps do not accumulate state.
"""

import matplotlib

matplotlib.use("Agg")  # must run before pyplot is imported

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_line_plot",
    "save_bar_plot",
    "save_error_plot",
    "save_image_pair",
    "save_sweep_panels",
    "save_alpha_sweep_plot",
]


def _finish(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_line_plot(path, x, series, xlabel, ylabel, logy=False):
    """One marked line per ``series`` entry (label -> y values) over ``x``."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, ys in series.items():
        ax.plot(x, ys, marker="o", label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    if len(series) > 1:
        ax.legend()
    return _finish(fig, path)


def save_bar_plot(path, x, heights, xlabel, ylabel):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.bar(x, heights, width=0.8, edgecolor="black", linewidth=0.5)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, axis="y", alpha=0.3)
    return _finish(fig, path)


def save_error_plot(path, series, ylabel):
    """Per-case error magnitudes on a log axis, one series per label.

    Exact zeros cannot sit on a log axis, so they are floored at 1e-17,
    one decade below anything a double-precision mismatch would produce.
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, values in series.items():
        values = np.maximum(np.asarray(values, dtype=float), 1e-17)
        ax.plot(range(len(values)), values, marker="o", linestyle="none",
                label=label)
    ax.set_yscale("log")
    ax.set_xlabel("case")
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    if len(series) > 1:
        ax.legend()
    return _finish(fig, path)


def save_image_pair(path, left, right, left_title, right_title):
    """Two grayscale images side by side on a shared colour scale."""
    left = np.asarray(left, dtype=float)
    right = np.asarray(right, dtype=float)
    vmax = max(left.max(), right.max(), 1e-12)
    fig, axes = plt.subplots(1, 2, figsize=(8.0, 4.0))
    for ax, img, title in zip(axes, (left, right), (left_title, right_title)):
        shown = ax.imshow(img, cmap="gray", vmin=0.0, vmax=vmax)
        ax.set_title(title)
        ax.set_xticks(())
        ax.set_yticks(())
    fig.colorbar(shown, ax=axes, shrink=0.8)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def save_sweep_panels(path, panels, ylabel):
    """One errorbar panel per (x, y, yerr, xlabel) tuple, shared y label."""
    fig, axes = plt.subplots(1, len(panels),
                             figsize=(4.0 * len(panels), 4.0), sharey=True)
    axes = np.atleast_1d(axes)
    for ax, (x, y, yerr, xlabel) in zip(axes, panels):
        ax.errorbar(x, y, yerr=yerr, marker="o", capsize=3)
        ax.set_xlabel(xlabel)
        ax.grid(True, alpha=0.3)
    axes[0].set_ylabel(ylabel)
    return _finish(fig, path)


def save_alpha_sweep_plot(path, alphas, mean_accuracy, std_accuracy,
                          mean_dimension):
    """Accuracy with a one-sigma band on the left axis, effective dimension
    on the right axis."""
    alphas = np.asarray(alphas, dtype=float)
    acc = np.asarray(mean_accuracy, dtype=float)
    std = np.asarray(std_accuracy, dtype=float)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(alphas, acc, marker="o", color="tab:blue", label="test accuracy")
    ax.fill_between(alphas, acc - std, acc + std, color="tab:blue", alpha=0.2)
    ax.set_xlabel("amplification strength")
    ax.set_ylabel("test accuracy", color="tab:blue")
    ax.tick_params(axis="y", labelcolor="tab:blue")
    ax.grid(True, alpha=0.3)
    twin = ax.twinx()
    twin.plot(alphas, mean_dimension, marker="s", color="tab:red",
              label="effective dimension")
    twin.set_ylabel("effective dimension", color="tab:red")
    twin.tick_params(axis="y", labelcolor="tab:red")
    return _finish(fig, path)
