"""Deterministic batch rendering of sweep and fit outputs.

All styling is pinned (Agg backend, bundled DejaVu fonts, fixed hash salt,
no embedded timestamps) so identical inputs yield identical image bytes.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .inputs import (BoundaryCurve, InterpolationError, Landscape,
                     check_provenance, load_boundary, load_datapoints,
                     load_fit_report, load_landscape)

_RC = {
    "font.family": "DejaVu Sans",
    "font.size": 9.0,
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "svg.hashsalt": "miptfigs",
    "axes.grid": True,
    "grid.alpha": 0.3,
}

_SERIES_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                  "#8c564b"]
_MARKERS = ["o", "s", "^", "D", "v", "P"]


@dataclass(frozen=True)
class FigureJob:
    kind: str
    inputs: tuple
    out: str


def _save(fig, out_path) -> None:
    ext = os.path.splitext(out_path)[1].lower()
    if ext not in (".png", ".svg"):
        raise ValueError(f"output must be .png or .svg, got {out_path!r}")
    metadata = {"Date": None} if ext == ".svg" else {"Software": "miptfigs"}
    fig.savefig(out_path, format=ext[1:], metadata=metadata)
    plt.close(fig)


def render_collapse(data_csv, fit_json, out_path) -> str:
    """Scaled-data main panel with an unscaled inset, one series per size."""
    report = load_fit_report(fit_json)
    table = load_datapoints(data_csv)
    check_provenance(report, data_csv)
    scaled = report["scaled_points"]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.2, 3.9))
        sizes = sorted({int(s["L"]) for s in scaled})
        for i, L in enumerate(sizes):
            pts = [s for s in scaled if int(s["L"]) == L]
            xs = np.array([s["x"] for s in pts])
            ys = np.array([s["y"] for s in pts])
            es = np.array([s["sigma"] for s in pts])
            order = np.argsort(xs)
            ax.errorbar(xs[order], ys[order], yerr=es[order],
                        color=_SERIES_COLORS[i % len(_SERIES_COLORS)],
                        marker=_MARKERS[i % len(_MARKERS)], ms=4, lw=1.0,
                        capsize=2, label=f"L = {L}")
        ax.set_xlabel(r"$(p - p_c)\,L^{1/\nu}$")
        ax.set_ylabel("diagnostic")
        ax.legend(loc="best", fontsize=8)
        ax.set_title(f"collapse ({report['method']}): "
                     f"$p_c$ = {report['p_c']:.4f}, "
                     r"$\nu$ = " + f"{report['nu']:.3f}", fontsize=9)
        inset = fig.add_axes([0.63, 0.55, 0.27, 0.3])
        for i, L in enumerate(sizes):
            sel = table.L == L
            order = np.argsort(table.p[sel])
            inset.plot(table.p[sel][order], table.delta[sel][order],
                       color=_SERIES_COLORS[i % len(_SERIES_COLORS)],
                       marker=_MARKERS[i % len(_MARKERS)], ms=2.5, lw=0.8)
        inset.axvline(report["p_c"], color="k", lw=0.6, ls="--")
        inset.set_xlabel("p", fontsize=7)
        inset.tick_params(labelsize=6)
        fig.subplots_adjust(left=0.12, right=0.97, top=0.92, bottom=0.13)
        _save(fig, out_path)
    return out_path


def render_landscape(landscape_csv, fit_json, out_path) -> str:
    """Objective heatmap over (p_c, nu) with the minimum marked and a slice
    through it inset."""
    report = load_fit_report(fit_json)
    land = load_landscape(landscape_csv)
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(5.2, 3.9))
        grid = np.log10(land.epsilon.T)
        mesh = ax.pcolormesh(land.pc, land.nu, grid, shading="nearest",
                             cmap="viridis")
        fig.colorbar(mesh, ax=ax, label=r"$\log_{10}\,\epsilon$")
        ax.plot([report["p_c"]], [report["nu"]], marker="*", ms=12,
                color="#d62728", mec="white")
        ax.set_xlabel(r"$p_c$")
        ax.set_ylabel(r"$\nu$")
        ax.set_title(f"objective landscape ({report['method']})", fontsize=9)
        ax.grid(False)
        # slice at the fitted p_c
        col = int(np.argmin(np.abs(land.pc - report["p_c"])))
        inset = fig.add_axes([0.17, 0.62, 0.24, 0.24])
        inset.plot(land.nu, land.epsilon[col], color="#1f77b4", lw=1.0)
        inset.axvline(report["nu"], color="#d62728", lw=0.7)
        inset.set_xlabel(r"$\nu$ at $p_c$", fontsize=7)
        inset.set_yscale("log")
        inset.tick_params(labelsize=6)
        fig.subplots_adjust(left=0.11, right=0.98, top=0.92, bottom=0.13)
        _save(fig, out_path)
    return out_path


def render_phase_diagram(boundary_csvs, out_path, labels=None) -> str:
    """Simplex-triangle axes with boundary points and interpolated curves.

    Each CSV holds one curve: the critical points of a family of sweep
    lines. Curves need at least two points to interpolate.
    """
    curves = [load_boundary(p) for p in boundary_csvs]
    for c in curves:
        if c.pu.size < 2:
            raise InterpolationError(
                f"{c.path}: need at least two boundary points per curve")
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.6, 4.2))
        ax.plot([0, 1, 0, 0], [1, 0, 0, 1], color="k", lw=1.0)
        for i, c in enumerate(curves):
            order = np.argsort(c.pmz)
            pu, pmz = c.pu[order], c.pmz[order]
            dense = np.linspace(pmz.min(), pmz.max(), 80)
            ax.plot(np.interp(dense, pmz, pu), dense, lw=1.2,
                    color=_SERIES_COLORS[i % len(_SERIES_COLORS)])
            name = labels[i] if labels else os.path.basename(c.path)
            ax.plot(pu, pmz, ls="", marker="o", ms=5, color="k",
                    mfc=_SERIES_COLORS[i % len(_SERIES_COLORS)], label=name)
        ax.set_xlabel(r"$p_u$")
        ax.set_ylabel(r"$p_M^z$")
        ax.set_xlim(-0.02, 1.02)
        ax.set_ylim(-0.02, 1.02)
        ax.set_aspect("equal")
        ax.legend(loc="upper right", fontsize=7)
        ax.set_title("phase boundaries", fontsize=9)
        fig.subplots_adjust(left=0.13, right=0.97, top=0.92, bottom=0.12)
        _save(fig, out_path)
    return out_path
