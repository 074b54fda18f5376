"""The four figure kinds rendered from pipeline artifacts.

- levelset: filled contour of a reconstructed (or analytic) grid
- surface: 3-D surface view of a grid
- error-curve: mean relative sup error vs 1/h with a +/- 2 sigma band
- histogram: how often each bandwidth index was selected across seeds

All grid figures use a diverging colormap centered at 0 so negative regions
(the physically interesting signature) stand apart from the positive bulk.
Rendering is deterministic: identical inputs produce identical image bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .formats import grid_axis, read_csv_rows, read_grid

FIGURE_KINDS = ("levelset", "surface", "error-curve", "histogram")

# fixed salt so optional SVG output is reproducible too
matplotlib.rcParams["svg.hashsalt"] = "qhtomo-plots"


@dataclass(frozen=True)
class FigureRequest:
    kind: str
    inputs: tuple
    output: str
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"kind must be one of {FIGURE_KINDS}, got {self.kind!r}")
        object.__setattr__(self, "inputs", tuple(str(p) for p in self.inputs))
        if len(self.inputs) != 1:
            raise ValueError(f"{self.kind} takes exactly one input file")


def _symmetric_limits(values):
    v = float(np.max(np.abs(values)))
    return (-1.0, 1.0) if v == 0.0 else (-v, v)


def _save(fig, req: FigureRequest):
    if req.output.lower().endswith(".svg"):
        # drop the embedded creation date so identical inputs give
        # identical bytes
        metadata = {"Date": None}
    else:
        metadata = {"Software": "qhtomo-plots"}
    fig.savefig(req.output, dpi=150, metadata=metadata)
    plt.close(fig)


def _render_levelset(req: FigureRequest):
    half_width, n, values = read_grid(req.inputs[0])
    axis = grid_axis(half_width, n)
    vmin, vmax = _symmetric_limits(values)
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    # values[i, j] is the point (q_i, p_j): transpose so q runs horizontally
    im = ax.contourf(axis, axis, values.T, levels=41, cmap="RdBu_r", vmin=vmin, vmax=vmax)
    ax.contour(axis, axis, values.T, levels=[0.0], colors="black", linewidths=0.6)
    ax.set_aspect("equal")
    ax.set_xlabel(req.xlabel or "q")
    ax.set_ylabel(req.ylabel or "p")
    ax.set_title(req.title)
    fig.colorbar(im, ax=ax, shrink=0.85)
    _save(fig, req)


def _render_surface(req: FigureRequest):
    half_width, n, values = read_grid(req.inputs[0])
    axis = grid_axis(half_width, n)
    Q, P = np.meshgrid(axis, axis, indexing="ij")
    vmin, vmax = _symmetric_limits(values)
    fig = plt.figure(figsize=(6.5, 5.0))
    ax = fig.add_subplot(projection="3d")
    ax.plot_surface(
        Q, P, values, cmap="RdBu_r", vmin=vmin, vmax=vmax, rstride=max(1, n // 128),
        cstride=max(1, n // 128), linewidth=0.0, antialiased=False,
    )
    ax.set_xlabel(req.xlabel or "q")
    ax.set_ylabel(req.ylabel or "p")
    ax.set_title(req.title)
    _save(fig, req)


def _render_error_curve(req: FigureRequest):
    rows = read_csv_rows(
        req.inputs[0], required_fields=("h", "mean_relative_sup_error", "std_relative_sup_error")
    )
    inv_h = np.array([1.0 / float(r["h"]) for r in rows])
    mean = np.array([float(r["mean_relative_sup_error"]) for r in rows])
    std = np.array([float(r["std_relative_sup_error"]) for r in rows])
    order = np.argsort(inv_h)
    inv_h, mean, std = inv_h[order], mean[order], std[order]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.fill_between(inv_h, mean - 2.0 * std, mean + 2.0 * std, alpha=0.25, label="±2σ across seeds")
    ax.plot(inv_h, mean, marker="o", markersize=3.0, label="mean")
    ax.set_xlabel(req.xlabel or "1/h")
    ax.set_ylabel(req.ylabel or "relative sup error")
    ax.set_title(req.title)
    ax.legend()
    _save(fig, req)


def _render_histogram(req: FigureRequest):
    rows = read_csv_rows(req.inputs[0], required_fields=("m", "count"))
    ms = [int(r["m"]) for r in rows]
    counts = [int(r["count"]) for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.bar(ms, counts, width=0.8)
    ax.set_xticks(ms)
    ax.set_xlabel(req.xlabel or "selected bandwidth index m")
    ax.set_ylabel(req.ylabel or "count")
    ax.set_title(req.title)
    _save(fig, req)


_RENDERERS = {
    "levelset": _render_levelset,
    "surface": _render_surface,
    "error-curve": _render_error_curve,
    "histogram": _render_histogram,
}


def render(req: FigureRequest):
    """Render the requested figure to req.output; returns the output path."""
    _RENDERERS[req.kind](req)
    return req.output
