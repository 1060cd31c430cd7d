"""Matplotlib figures written next to the tabular reports."""

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from imbr.evaluate import METRIC_COLUMNS  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 120,
}
# fixed metadata keeps the PNG bytes reproducible
_PNG_METADATA = {"Software": None}


def _png(fig):
    buf = io.BytesIO()
    fig.savefig(buf, format="png", metadata=_PNG_METADATA, bbox_inches="tight")
    plt.close(fig)
    return buf.getvalue()


def metric_bars(rows):
    """Grouped bars: one panel per block, one bar group per setting."""
    blocks = {}
    for block, setting, values in rows:
        blocks.setdefault(block, []).append((setting, values))
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(blocks), figsize=(4.2 * len(blocks), 3.2), squeeze=False, sharey=True)
        width = 0.8 / len(METRIC_COLUMNS)
        for ax, (block, entries) in zip(axes[0], blocks.items()):
            x = np.arange(len(entries))
            for j, name in enumerate(METRIC_COLUMNS):
                ax.bar(x + (j - 1.5) * width, [v[j] for _, v in entries], width, label=name)
            ax.set_xticks(x)
            ax.set_xticklabels([s for s, _ in entries], rotation=20, ha="right")
            ax.set_title(block)
            ax.set_ylim(0, 1)
        axes[0][0].set_ylabel("score")
        axes[0][-1].legend(loc="upper right", frameon=False)
        fig.tight_layout()
        return _png(fig)


def confusion_heatmap(cm, title="", class_names=None):
    cm = np.asarray(cm)
    support = cm.sum(axis=1, keepdims=True)
    norm = np.divide(cm, support, out=np.zeros(cm.shape), where=support > 0)
    n = cm.shape[0]
    size = min(2.5 + 0.3 * n, 9)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(size, size))
        im = ax.imshow(norm, vmin=0, vmax=1, cmap="Blues")
        names = class_names or [str(i) for i in range(n)]
        ax.set_xticks(range(n))
        ax.set_yticks(range(n))
        ax.set_xticklabels(names, rotation=90)
        ax.set_yticklabels(names)
        ax.set_xlabel("predicted")
        ax.set_ylabel("true")
        if title:
            ax.set_title(title)
        fig.colorbar(im, ax=ax, fraction=0.046, pad=0.04, label="row-normalized")
        fig.tight_layout()
        return _png(fig)


def class_distribution_bars(dist):
    items = sorted(dist.items(), key=lambda kv: -kv[1][0])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6, 0.25 * len(items) + 1.2))
        ax.barh([k for k, _ in items][::-1], [v[0] for _, v in items][::-1], color="0.35")
        ax.set_xscale("log")
        ax.set_xlabel("instances")
        fig.tight_layout()
        return _png(fig)
