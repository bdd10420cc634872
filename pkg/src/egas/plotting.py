"""Static figures: Hasse diagrams with a domain/kernel overlay and
abstract transition systems.

Figures are built on :class:`matplotlib.figure.Figure` directly so nothing
touches pyplot's global state; the output format follows the file suffix.
"""

from __future__ import annotations

from collections import deque
from pathlib import Path
from typing import Iterable, Sequence

from matplotlib.figure import Figure
from matplotlib.patches import FancyArrowPatch

from .ats import AbstractTransitionSystem
from .lattice import FiniteLattice

KEPT = "#4c72b0"
REMOVED = "#dd8452"
OTHER = "#dddddd"

_STABLE_METADATA = {
    ".png": {"Software": None},
    ".svg": {"Date": None},
    ".pdf": {"CreationDate": None},
}


def hasse_layout(lat: FiniteLattice) -> dict[int, tuple[float, float]]:
    """Rank = length of the longest chain from bottom; x spreads each rank."""
    rank = {}
    for x in sorted(lat.elements(), key=lambda e: len(lat.downset(e))):
        below = [rank[y] for y in lat.downset(x) if y != x]
        rank[x] = 1 + max(below) if below else 0
    rows: dict[int, list[int]] = {}
    for x in lat.elements():
        rows.setdefault(rank[x], []).append(x)
    pos = {}
    for r, xs in rows.items():
        for i, x in enumerate(xs):
            pos[x] = (i - (len(xs) - 1) / 2, float(r))
    return pos


def draw_hasse(
    ax,
    lat: FiniteLattice,
    kept: Iterable[int] = (),
    removed: Iterable[int] = (),
    title: str = "",
) -> None:
    kept, removed = frozenset(kept), frozenset(removed)
    pos = hasse_layout(lat)
    for a, b in lat.covers():
        (x0, y0), (x1, y1) = pos[a], pos[b]
        ax.plot([x0, x1], [y0, y1], color="0.5", lw=1, zorder=1)
    for x, (px, py) in pos.items():
        color = KEPT if x in kept else REMOVED if x in removed else OTHER
        ax.scatter([px], [py], s=500, color=color, edgecolors="k", zorder=2)
        ax.annotate(lat.name(x), (px, py), ha="center", va="center", fontsize=8, zorder=3)
    ax.set_title(title)
    ax.margins(0.2)
    ax.axis("off")


def _layers(ats: AbstractTransitionSystem) -> dict[int, int]:
    """Breadth-first depth from the init blocks (block 0 if none)."""
    seeds = sorted(ats.init_blocks()) or [0]
    depth = {b: 0 for b in seeds}
    queue = deque(seeds)
    while queue:
        b = queue.popleft()
        for c in sorted(ats.successors(b)):
            if c not in depth:
                depth[c] = depth[b] + 1
                queue.append(c)
    last = max(depth.values(), default=-1) + 1
    for b in range(len(ats.partition)):
        depth.setdefault(b, last)
    return depth


def draw_ats(ax, ats: AbstractTransitionSystem, title: str = "", highlight: Sequence[int] = ()) -> None:
    """Blocks as boxes laid out by depth; ``highlight`` is an abstract path."""
    depth = _layers(ats)
    cols: dict[int, list[int]] = {}
    for b in range(len(ats.partition)):
        cols.setdefault(depth[b], []).append(b)
    pos = {}
    for d, bs in cols.items():
        for i, b in enumerate(bs):
            pos[b] = (float(d), -(i - (len(bs) - 1) / 2))
    on_path = set(zip(highlight, highlight[1:]))
    init, error = ats.init_blocks(), ats.error_blocks()
    for a, b in sorted(ats.edges):
        hot = (a, b) in on_path
        if a == b:
            x, y = pos[a]
            ax.annotate("", (x + 0.1, y + 0.15), (x - 0.1, y + 0.15),
                        arrowprops=dict(arrowstyle="->", connectionstyle="arc3,rad=-1.5",
                                        color="crimson" if hot else "0.4"))
            continue
        ax.add_patch(FancyArrowPatch(
            pos[a], pos[b], arrowstyle="-|>", mutation_scale=12, shrinkA=18, shrinkB=18,
            color="crimson" if hot else "0.4", lw=2 if hot else 1,
        ))
    for b, (x, y) in pos.items():
        face = "#f4cccc" if b in error else "#d9ead3" if b in init else "white"
        ax.annotate(
            ats.block_name(b), (x, y), ha="center", va="center", fontsize=8,
            bbox=dict(boxstyle="round", fc=face, ec="k"),
        )
    xs = [p[0] for p in pos.values()] or [0.0]
    ys = [p[1] for p in pos.values()] or [0.0]
    ax.set_xlim(min(xs) - 0.7, max(xs) + 0.7)
    ax.set_ylim(min(ys) - 0.7, max(ys) + 0.7)
    ax.set_title(title)
    ax.axis("off")


def save(fig: Figure, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # drop timestamps so reruns produce identical files
    meta = _STABLE_METADATA.get(path.suffix.lower())
    fig.savefig(path, bbox_inches="tight", metadata=meta)
    return path


def kernel_figure(
    lat: FiniteLattice, domain_image: Iterable[int], kernel_image: Iterable[int], path: str | Path, title: str = ""
) -> Path:
    """Hasse diagram: kernel elements filled, elements the kernel drops in a second colour."""
    kernel_image = frozenset(kernel_image)
    fig = Figure(figsize=(5, 5))
    draw_hasse(fig.subplots(), lat, kernel_image, frozenset(domain_image) - kernel_image, title)
    return save(fig, path)


def ats_figure(
    panels: Sequence[tuple[str, AbstractTransitionSystem, Sequence[int]]], path: str | Path
) -> Path:
    """One panel per ``(title, ats, highlighted path)``, side by side."""
    fig = Figure(figsize=(4.5 * max(1, len(panels)), 4))
    axes = fig.subplots(1, max(1, len(panels)), squeeze=False)[0]
    for ax, (title, ats, hl) in zip(axes, panels):
        draw_ats(ax, ats, title, hl)
    return save(fig, path)
