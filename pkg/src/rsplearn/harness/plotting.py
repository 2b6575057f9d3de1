"""Figure rendering for sweep summaries (matplotlib, Agg backend)."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "target": dict(color="#000000", marker="s", label="Target policy"),
    "l1": dict(color="#0072B2", marker="o", label=r"$\ell_1$-regularized policy"),
    "unregularized": dict(color="#D55E00", marker="^", label="Unregularized policy"),
    "greedy": dict(color="#009E73", marker="v", label="Greedy policy"),
}

RC = {
    "font.size": 10,
    "axes.grid": True,
    "grid.linewidth": 0.25,
    "grid.alpha": 0.5,
    "axes.linewidth": 0.6,
    "lines.linewidth": 1.2,
    "errorbar.capsize": 2.5,
    "legend.framealpha": 0.8,
    "svg.hashsalt": "rsplearn",
}


def plot_sweep(summary, path, title=None):
    """Mean average reward (error bars: one standard deviation) against sample size."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5.5, 4.0))
        for policy, style in STYLE.items():
            pts = [r for r in summary if r["policy"] == policy]
            if not pts:
                continue
            ax.errorbar(
                [r["m"] for r in pts],
                [r["mean_reward"] for r in pts],
                yerr=[r["std_reward"] for r in pts],
                **style,
            )
        ax.set_xscale("log")
        ax.set_xlabel("Number of training samples")
        ax.set_ylabel("Average reward")
        if title:
            ax.set_title(title)
        ax.legend(loc="lower right")
        fig.tight_layout()
        fig.savefig(path, dpi=150, metadata={"Software": None})
        plt.close(fig)
    return path
