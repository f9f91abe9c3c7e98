"""Log-log figures of mean relative variance against poset size."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiment import mean_rv_table  # noqa: E402

SPEC_LABELS = {
    "uniform": "uniform",
    "descendants": "descendants",
    "asq": "available spaces quotient",
}
SPEC_COLORS = {"uniform": "tab:red", "descendants": "tab:blue", "asq": "tab:green"}

# PNG metadata carries a timestamp/version by default; drop it so reruns match
_SAVE_KW = {"dpi": 120, "metadata": {"Software": None}}


def _axes(title):
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("poset size n")
    ax.set_ylabel("mean relative variance")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    return fig, ax


def _series(curve):
    sizes = sorted(n for n, v in curve.items() if v > 0)
    return sizes, [curve[n] for n in sizes]


def plot_specs(summary, path, recursive=False):
    """One curve per importance kind, for a fixed recursion mode."""
    table = mean_rv_table(summary)
    fig, ax = _axes("Relative variance by importance function")
    for spec in SPEC_LABELS:
        curve = table.get((spec, recursive))
        if not curve:
            continue
        xs, ys = _series(curve)
        ax.plot(xs, ys, "o-", color=SPEC_COLORS[spec], label=SPEC_LABELS[spec], ms=4)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return Path(path)


def plot_recursion(summary, path):
    """Plain versus component-recursive curves for each importance kind."""
    table = mean_rv_table(summary)
    fig, ax = _axes("Effect of the connected-components recursion")
    for spec in SPEC_LABELS:
        for rec, style in ((False, "o-"), (True, "s--")):
            curve = table.get((spec, rec))
            if not curve:
                continue
            xs, ys = _series(curve)
            tag = "recursive" if rec else "plain"
            ax.plot(xs, ys, style, color=SPEC_COLORS[spec], ms=4,
                    label=f"{SPEC_LABELS[spec]} ({tag})")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return Path(path)


def render_report(summary, out_dir, stem="experiment"):
    """Write both figures into ``out_dir`` and return their paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return [
        plot_specs(summary, out_dir / f"{stem}_rv_by_spec.png"),
        plot_recursion(summary, out_dir / f"{stem}_rv_recursion.png"),
    ]
