"""Matplotlib figures for recovery experiments, written as reproducible SVGs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "svg.hashsalt": "ising-screen",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.4,
    "lines.markersize": 4,
    "axes.spines.top": False,
    "axes.spines.right": False,
}

MARKERS = {"l1-lr": "o", "l1constr-lr": "s", "l1-ise": "^", "l0l2-lr": "D", "l0l2-ise": "v"}
LABELS = {"l1-lr": "L1 LR", "l1constr-lr": "L1Constr LR", "l1-ise": "L1 ISE",
          "l0l2-lr": "L0-L2 LR", "l0l2-ise": "L0-L2 ISE"}


def _save(fig, path):
    # no Date metadata so reruns give byte-identical files
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_phase_transition(curves: dict, p: int, path) -> None:
    """``curves[method] = (ns, success_ratios)``."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.0))
        for m, (ns, ratios) in curves.items():
            ax.plot(ns, ratios, marker=MARKERS.get(m, "o"), label=LABELS.get(m, m))
        ax.set_xlabel("number of samples n")
        ax.set_ylabel("ratio of success")
        ax.set_ylim(-0.03, 1.03)
        ax.set_title(f"p = {p}")
        ax.legend(frameon=False)
        fig.tight_layout()
        _save(fig, path)


def plot_l2_estimation(curves: dict, p: int, path) -> None:
    """``curves[method] = (ns, mean_l2, sd_l2)``."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.0))
        for m, (ns, mean, sd) in curves.items():
            ax.errorbar(ns, mean, yerr=sd, marker=MARKERS.get(m, "o"), capsize=2,
                        label=LABELS.get(m, m))
        ax.set_xlabel("number of samples n")
        ax.set_ylabel(r"$\|\hat W - W^*\|_2$")
        ax.set_title(f"p = {p}")
        ax.legend(frameon=False)
        fig.tight_layout()
        _save(fig, path)


def plot_complexity(curves: dict, path) -> None:
    """``curves[method] = (ps, n_star)``; missing values are skipped."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.0))
        for m, (ps, nstar) in curves.items():
            pts = [(p, v) for p, v in zip(ps, nstar) if v is not None]
            if pts:
                xs, ys = zip(*pts)
                ax.plot(xs, ys, marker=MARKERS.get(m, "o"), label=LABELS.get(m, m))
        ax.set_xlabel("number of nodes p")
        ax.set_ylabel("n*(p)")
        ax.legend(frameon=False)
        fig.tight_layout()
        _save(fig, path)
