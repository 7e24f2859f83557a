"""Static SVG figures of diagrams and mode estimates."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .persistence import PersistenceDiagram  # noqa: E402

# fixed ids and no timestamp, so identical inputs give identical files
matplotlib.rcParams["svg.hashsalt"] = "persmode"


def _scatter_diagram(ax, diagram: PersistenceDiagram, label: str, marker: str):
    fin = diagram.finite
    if fin:
        ax.scatter([p.death for p in fin], [p.birth for p in fin], s=14, marker=marker, label=label)
    ess = diagram.essential
    if ess:
        ax.scatter([p.death for p in ess], [p.birth for p in ess], s=40, marker="*", label=f"{label} (essential)")


def plot_diagrams(diagrams: dict[str, PersistenceDiagram], out, modes: dict[str, tuple] | None = None):
    """Births against deaths for each diagram; mode locations in a second panel when given."""
    panels = 2 if modes else 1
    fig, axes = plt.subplots(1, panels, figsize=(5 * panels, 4.5), squeeze=False)
    ax = axes[0, 0]
    top = 0.0
    for (label, dgm), marker in zip(diagrams.items(), "os^vD"):
        _scatter_diagram(ax, dgm, label, marker)
        top = max([top] + [p.birth for p in dgm.points])
    ax.plot([0, top * 1.05 or 1], [0, top * 1.05 or 1], color="grey", lw=0.8)
    ax.set_xlabel("death")
    ax.set_ylabel("birth")
    ax.set_title("H0 superlevel diagram")
    ax.legend(fontsize=8)
    if modes:
        ax = axes[0, 1]
        for (label, (locs, vals)), marker in zip(modes.items(), "os^vD"):
            locs = np.asarray(locs, dtype=float)
            if locs.size == 0:
                continue
            if locs.shape[1] == 1:
                ax.scatter(locs[:, 0], vals, marker=marker, label=label)
                ax.set_ylabel("value")
            else:
                ax.scatter(locs[:, 0], locs[:, 1], marker=marker, label=label)
                ax.set_ylim(0, 1)
                ax.set_ylabel("x2")
        ax.set_xlim(0, 1)
        ax.set_xlabel("x1")
        ax.set_title("modes")
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out, format="svg", metadata={"Date": None})
    plt.close(fig)
