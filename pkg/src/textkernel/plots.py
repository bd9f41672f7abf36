"""Figure rendering for overlays and evaluation reports.

Uses the Agg backend so figures save headlessly; nothing here opens a
window.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Circle

__all__ = ["save_overlay", "save_report_figure"]


def save_overlay(path, mask, lines=(), polygons=(), image=None, dpi=120):
    """Draw center lines, radii, and boxes over a page mask or image.

    `lines` are CenterLine objects; `polygons` are (4, 2) arrays.  Returns
    the path it wrote.
    """
    base = np.asarray(image if image is not None else mask, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(base.shape[1] / dpi, base.shape[0] / dpi), dpi=dpi)
    ax.imshow(base, cmap="gray", interpolation="nearest", vmin=0.0, vmax=1.0)
    for line in lines:
        pts = np.asarray(line.points, dtype=np.float64)
        radii = np.asarray(line.radii, dtype=np.float64)
        ax.plot(pts[:, 0], pts[:, 1], "-", color="tab:red", linewidth=1.2)
        for (x, y), r in zip(pts, radii):
            ax.add_patch(Circle((x, y), r, fill=False, color="tab:orange", linewidth=0.6))
        ax.plot(pts[:, 0], pts[:, 1], ".", color="tab:red", markersize=3)
    for poly in polygons:
        p = np.asarray(poly, dtype=np.float64)
        closed = np.vstack([p, p[:1]])
        ax.plot(closed[:, 0], closed[:, 1], "-", color="tab:blue", linewidth=1.0)
    ax.set_xlim(-0.5, base.shape[1] - 0.5)
    ax.set_ylim(base.shape[0] - 0.5, -0.5)
    ax.set_axis_off()
    fig.savefig(path, bbox_inches="tight", pad_inches=0.05)
    plt.close(fig)
    return path


def save_report_figure(path, report, dpi=120):
    """Two panels: aggregate scores as bars, per-page CR/AR as lines."""
    fig, (left, right) = plt.subplots(1, 2, figsize=(9, 3.6), dpi=dpi)
    names = ["precision", "recall", "F", "CR", "AR"]
    values = [report.precision, report.recall, report.f_measure, report.cr, report.ar]
    bars = left.bar(names, values, color="tab:blue")
    left.set_ylim(0.0, 1.05)
    left.bar_label(bars, fmt="%.3f", fontsize=8)
    left.set_title("aggregate scores")

    pages = report.pages or []
    xs = np.arange(len(pages))
    crs = [row.get("cr", 0.0) for row in pages]
    ars = [row.get("ar", 0.0) for row in pages]
    right.plot(xs, crs, "o-", label="CR", color="tab:green")
    right.plot(xs, ars, "s--", label="AR", color="tab:purple")
    right.set_xticks(xs)
    right.set_xticklabels(
        [str(row.get("page", i)) for i, row in enumerate(pages)],
        rotation=30,
        ha="right",
        fontsize=8,
    )
    right.set_ylim(-0.05, 1.05)
    right.set_title("per page")
    right.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
