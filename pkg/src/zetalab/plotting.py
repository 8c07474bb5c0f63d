"""SVG scatter plots of lambda-spectra.

Figures are written with a fixed hash salt and no date stamp, so the same
points always give the same bytes.  Eigenvalue markers go into groups whose
``id`` starts with ``eigenvalues`` (one ``<use>`` element per point); the
reference circle is the group ``reference-circle``.
"""

from __future__ import annotations

import html
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402
from matplotlib.patches import Circle  # noqa: E402

from . import GENERATOR_VERSION  # noqa: E402
from .pade import W_limit  # noqa: E402

RC = {
    "svg.hashsalt": "zetalab",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.linewidth": 0.6,
    "path.simplify": False,
}

PART_COLORS = {"arrow": "#d62728", "bow": "#1f77b4", "orbit": "#2ca02c"}
PAIR_COLORS = ("#1f77b4", "#d62728")


def reference_radius(l: int) -> float:
    """3/2 for ``l = 1`` and ``W_l`` in general (the two agree at ``l = 1``)."""
    W = W_limit(l)
    return W.numerator / W.denominator


def _xy(values) -> tuple:
    z = np.array([complex(v) for v in values], dtype=complex)
    return z.real, z.imag


def _limits(points: np.ndarray, radius: float | None, axis_range: float | None) -> float:
    if axis_range:
        return float(axis_range)
    r = float(np.abs(points).max()) if points.size else 1.0
    if radius:
        r = max(r, radius)
    return 1.08 * r


def _new_axes(title: str):
    fig = Figure(figsize=(5.0, 5.0))
    ax = fig.add_subplot(1, 1, 1)
    ax.set_aspect("equal")
    ax.axhline(0.0, color="0.8", lw=0.5, zorder=0)
    ax.axvline(0.0, color="0.8", lw=0.5, zorder=0)
    ax.set_title(title)
    ax.set_xlabel("Re w")
    ax.set_ylabel("Im w")
    return fig, ax


def _scatter(ax, values, gid: str, color: str, size: float = 2.5, label: str | None = None):
    x, y = _xy(values)
    (line,) = ax.plot(x, y, linestyle="none", marker="o", ms=size, mew=0, color=color, label=label)
    line.set_gid(gid)
    return line


def _finish(fig, ax, points: np.ndarray, radius, axis_range, path: Path, meta: dict) -> Path:
    if radius:
        c = Circle((0.0, 0.0), radius, fill=False, color="0.35", lw=0.7, ls="--")
        c.set_gid("reference-circle")
        ax.add_patch(c)
    lim = _limits(points, radius, axis_range)
    ax.set_xlim(-lim, lim)
    ax.set_ylim(-lim, lim)
    fig.tight_layout()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    desc = ", ".join(f"{k}={v}" for k, v in sorted(meta.items()))
    with matplotlib.rc_context(RC):
        fig.savefig(path, format="svg",
                    metadata={"Date": None, "Creator": f"zetalab {GENERATOR_VERSION}", "Description": desc})
    return path


def plot_spectrum(values: Sequence, path: Path, l: int, title: str = "", radius: float | None = None,
                  axis_range: float | None = None, classification=None, meta: dict | None = None) -> Path:
    """One spectrum with the reference circle; colored by part when a classification is given."""
    radius = reference_radius(l) if radius is None else radius
    fig, ax = _new_axes(title)
    if classification is None:
        _scatter(ax, values, "eigenvalues", PAIR_COLORS[0])
    else:
        parts = classification.parts()
        for name, vals in parts.items():
            if vals:
                color = PART_COLORS["orbit" if name.startswith("orbit") else name]
                _scatter(ax, vals, f"eigenvalues-{name}", color, label=name)
        ax.legend(loc="upper left", fontsize=7, frameon=False, markerscale=2)
    pts = np.array([complex(v) for v in values])
    return _finish(fig, ax, pts, radius, axis_range, path, meta or {})


def plot_overlay(values_a: Sequence, values_b: Sequence, path: Path, l: int, labels=("a", "b"),
                 title: str = "", radius: float | None = None, axis_range: float | None = None,
                 meta: dict | None = None) -> Path:
    """Two spectra in two colors."""
    radius = reference_radius(l) if radius is None else radius
    fig, ax = _new_axes(title)
    _scatter(ax, values_a, "eigenvalues-a", PAIR_COLORS[0], label=labels[0])
    _scatter(ax, values_b, "eigenvalues-b", PAIR_COLORS[1], size=2.0, label=labels[1])
    ax.legend(loc="upper left", fontsize=7, frameon=False, markerscale=2)
    pts = np.array([complex(v) for v in list(values_a) + list(values_b)])
    return _finish(fig, ax, pts, radius, axis_range, path, meta or {})


def plot_union(spectra: Sequence[Sequence], path: Path, l: int, title: str = "", radius: float | None = None,
               axis_range: float | None = None, meta: dict | None = None) -> Path:
    """Union of many spectra in one color (a single marker group)."""
    allv = [v for vals in spectra for v in vals]
    return plot_spectrum(allv, path, l, title, radius, axis_range, None, meta)


def frame_name(index: int, width: int = 4) -> str:
    return f"frame_{index:0{width}d}.svg"


def write_frames(spectra: dict, frames_dir: Path, l: int, label: str, axis_range: float | None = None,
                 meta: dict | None = None) -> list:
    """One numbered SVG per ``m`` (shared axis range) plus ``index.html`` listing them in order."""
    frames_dir = Path(frames_dir)
    ms = sorted(spectra)
    pts = np.array([complex(v) for m in ms for v in spectra[m].eigenvalues])
    lim = axis_range or _limits(pts, reference_radius(l), None)
    paths = []
    for m in ms:
        p = frames_dir / frame_name(m)
        plot_spectrum(spectra[m].eigenvalues, p, l, f"Spec l={l}, m={m} ({label})", axis_range=lim,
                      meta=dict(meta or {}, m=m))
        paths.append(p)
    items = "\n".join(f'<li><a href="{html.escape(p.name)}">m = {m}</a><br><img src="{html.escape(p.name)}" '
                      f'width="400"></li>' for m, p in zip(ms, paths))
    (frames_dir / "index.html").write_text(
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
        f"<title>{html.escape(label)} l={l}</title></head>\n<body>\n"
        f"<h1>{html.escape(label)}, l = {l}, m = {ms[0]}..{ms[-1]}</h1>\n<ol>\n{items}\n</ol>\n</body></html>\n")
    return paths
