"""Static SVG line plots for the sweep experiments.

Rendering is forced through the non-interactive SVG backend with a fixed
hash salt and no embedded date, so rerunning a sweep rewrites the same
bytes.
"""

import matplotlib

matplotlib.use("svg")

import matplotlib.pyplot as plt

matplotlib.rcParams["svg.hashsalt"] = "cbod"


def line_plot(path, curves, xlabel, ylabel, title=None, log_x=False):
    """Write one SVG with a line per curve.

    curves is a sequence of (label, x, y) triples.  Labels land in the
    legend; pass log_x for mass-ratio and ramp-time sweeps.
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    try:
        for label, x, y in curves:
            ax.plot(x, y, marker="o", markersize=3, linewidth=1.2, label=str(label))
        if log_x:
            ax.set_xscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        ax.grid(True, which="both", alpha=0.3)
        if len(curves) > 1:
            ax.legend(fontsize=9)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)
    return path
