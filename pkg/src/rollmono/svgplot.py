"""Minimal deterministic SVG plots: axes, polylines, markers.

No plotting dependency; identical inputs produce byte-identical files,
which keeps the emitted figures golden-file testable.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class Polyline:
    """Connected curve; split into segments where |dy| exceeds ``split_gap``."""

    points: np.ndarray
    color: str = "#1f6fb4"
    width: float = 1.3
    split_gap: float | None = None

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)


@dataclass
class Markers:
    """Isolated points drawn as filled circles."""

    points: np.ndarray
    color: str = "#c0392b"
    radius: float = 3.0

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)


@dataclass
class PlotStyle:
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    width: int = 640
    height: int = 480
    xlim: tuple | None = None
    ylim: tuple | None = None
    margins: tuple = field(default=(58, 14, 30, 46))  # left, right, top, bottom


def _bounds(datasets, style: PlotStyle):
    xs = np.concatenate([d.points[:, 0] for d in datasets])
    ys = np.concatenate([d.points[:, 1] for d in datasets])
    if style.xlim is not None:
        x0, x1 = map(float, style.xlim)
    else:
        x0, x1 = float(xs.min()), float(xs.max())
    if style.ylim is not None:
        y0, y1 = map(float, style.ylim)
    else:
        y0, y1 = float(ys.min()), float(ys.max())
    if x1 <= x0:
        x0, x1 = x0 - 0.5, x0 + 0.5
    if y1 <= y0:
        y0, y1 = y0 - 0.5, y0 + 0.5
    if style.xlim is None:
        pad = 0.04 * (x1 - x0)
        x0, x1 = x0 - pad, x1 + pad
    if style.ylim is None:
        pad = 0.04 * (y1 - y0)
        y0, y1 = y0 - pad, y1 + pad
    return x0, x1, y0, y1


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _tick_label(value: float) -> str:
    text = f"{value:.3g}"
    return "0" if text == "-0" else text


def emit_svg(datasets, style: PlotStyle, path) -> None:
    """Write the datasets as a standalone SVG file.

    Raises ValueError when there is nothing to draw; I/O failures surface
    as the built-in OSError.
    """
    datasets = list(datasets)
    if not datasets or all(d.points.shape[0] == 0 for d in datasets):
        raise ValueError("emit_svg needs a non-empty dataset")
    datasets = [d for d in datasets if d.points.shape[0] > 0]
    x0, x1, y0, y1 = _bounds(datasets, style)
    ml, mr, mt, mb = style.margins
    box_w = style.width - ml - mr
    box_h = style.height - mt - mb

    def px(x):
        return ml + (x - x0) / (x1 - x0) * box_w

    def py(y):
        return style.height - mb - (y - y0) / (y1 - y0) * box_h

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{style.width}" '
        f'height="{style.height}" viewBox="0 0 {style.width} {style.height}">',
        f'<rect x="0" y="0" width="{style.width}" height="{style.height}" fill="white"/>',
        f'<rect x="{_fmt(ml)}" y="{_fmt(mt)}" width="{_fmt(box_w)}" '
        f'height="{_fmt(box_h)}" fill="none" stroke="#444" stroke-width="1"/>',
    ]
    for tx in np.linspace(x0, x1, 5):
        x = px(tx)
        out.append(
            f'<line x1="{_fmt(x)}" y1="{_fmt(style.height - mb)}" x2="{_fmt(x)}" '
            f'y2="{_fmt(style.height - mb + 4)}" stroke="#444" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(x)}" y="{_fmt(style.height - mb + 16)}" font-size="11" '
            f'text-anchor="middle" font-family="sans-serif">{_tick_label(tx)}</text>'
        )
    for ty in np.linspace(y0, y1, 5):
        y = py(ty)
        out.append(
            f'<line x1="{_fmt(ml - 4)}" y1="{_fmt(y)}" x2="{_fmt(ml)}" '
            f'y2="{_fmt(y)}" stroke="#444" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_fmt(ml - 7)}" y="{_fmt(y + 4)}" font-size="11" '
            f'text-anchor="end" font-family="sans-serif">{_tick_label(ty)}</text>'
        )
    if style.title:
        out.append(
            f'<text x="{_fmt(ml + box_w / 2)}" y="{_fmt(mt - 10)}" font-size="13" '
            f'text-anchor="middle" font-family="sans-serif">{style.title}</text>'
        )
    if style.xlabel:
        out.append(
            f'<text x="{_fmt(ml + box_w / 2)}" y="{_fmt(style.height - 8)}" '
            f'font-size="12" text-anchor="middle" font-family="sans-serif">{style.xlabel}</text>'
        )
    if style.ylabel:
        yc = mt + box_h / 2
        out.append(
            f'<text x="14" y="{_fmt(yc)}" font-size="12" text-anchor="middle" '
            f'font-family="sans-serif" transform="rotate(-90 14 {_fmt(yc)})">{style.ylabel}</text>'
        )

    for ds in datasets:
        if isinstance(ds, Markers):
            for x, y in ds.points:
                out.append(
                    f'<circle cx="{_fmt(px(x))}" cy="{_fmt(py(y))}" '
                    f'r="{_fmt(ds.radius)}" fill="{ds.color}"/>'
                )
            continue
        segments = [ds.points]
        if ds.split_gap is not None and ds.points.shape[0] > 1:
            jumps = np.where(np.abs(np.diff(ds.points[:, 1])) > ds.split_gap)[0]
            segments = np.split(ds.points, jumps + 1)
        for seg in segments:
            if seg.shape[0] < 2:
                continue
            coords = " ".join(f"{_fmt(px(x))},{_fmt(py(y))}" for x, y in seg)
            out.append(
                f'<polyline points="{coords}" fill="none" stroke="{ds.color}" '
                f'stroke-width="{_fmt(ds.width)}"/>'
            )
    out.append("</svg>")
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(out) + "\n")
