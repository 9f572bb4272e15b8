"""Report figures rendered alongside the delimited outputs."""

from __future__ import annotations

import numpy as np

from .regions import SafetySpec
from .synth import Certificate


def _axes(path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    return plt, fig, ax


def level_set_figure(cert: Certificate, spec: SafetySpec, path: str) -> str:
    """Contour plot of a 2-D barrier with its level sets and regions."""
    if spec.dim != 2:
        raise ValueError("level-set figures are drawn for 2-D systems only")
    plt, fig, ax = _axes(path)
    lo, hi = spec.state_space.lower, spec.state_space.upper
    xs = np.linspace(lo[0], hi[0], 240)
    ys = np.linspace(lo[1], hi[1], 240)
    grid_x, grid_y = np.meshgrid(xs, ys)
    pts = np.vstack([grid_x.ravel(), grid_y.ravel()])
    if cert.is_linear or cert.system_class == "dt-NPS":
        lifted = pts
    else:
        lifted = cert.basis.evaluate_many(pts)
    values = np.einsum("ik,ij,jk->k", lifted, cert.p_matrix, lifted).reshape(grid_x.shape)
    cs = ax.contourf(grid_x, grid_y, values, levels=20, cmap="viridis", alpha=0.55)
    fig.colorbar(cs, ax=ax, label="B(x)")
    if cert.gamma is not None:
        ax.contour(grid_x, grid_y, values, levels=[cert.gamma], colors="tab:blue", linestyles="--")
    if cert.lam is not None:
        ax.contour(grid_x, grid_y, values, levels=[cert.lam], colors="tab:red", linestyles="--")

    def draw_box(box, color, label):
        from matplotlib.patches import Rectangle

        ax.add_patch(
            Rectangle(
                (box.lower[0], box.lower[1]),
                box.upper[0] - box.lower[0],
                box.upper[1] - box.lower[1],
                fill=False,
                edgecolor=color,
                linewidth=2.0,
                label=label,
            )
        )

    draw_box(spec.initial, "purple", "initial set")
    for i, box in enumerate(spec.unsafe):
        draw_box(box, "red", "unsafe set" if i == 0 else None)
    ax.set_xlim(lo[0], hi[0])
    ax.set_ylim(lo[1], hi[1])
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title(f"{cert.kind} level sets ({cert.system_class})")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def suite_figure(rows: list[dict], path: str) -> str:
    """Horizontal bars of per-benchmark wall time, green when verified."""
    plt, fig, ax = _axes(path)
    names = [f"{r['name']} ({r['system_class']})" for r in rows]
    times = [r["wall_time_s"] or 0.0 for r in rows]
    colors = ["tab:green" if r["verified"] else "tab:red" for r in rows]
    ypos = np.arange(len(rows))
    ax.barh(ypos, times, color=colors)
    ax.set_yticks(ypos, names, fontsize=7)
    ax.invert_yaxis()
    ax.set_xlabel("wall time [s]")
    ax.set_title("benchmark suite")
    fig.set_size_inches(7.0, 0.3 * max(len(rows), 4) + 1.2)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
