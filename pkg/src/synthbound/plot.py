"""Static three-panel SVG figure: outcome vs. counterfactual, ATT with bound band, cumulative effect."""

from __future__ import annotations

import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError

SVG_NS = "http://www.w3.org/2000/svg"
WIDTH, PANEL_H, MARGIN_L, MARGIN_R, MARGIN_T, GAP = 720, 200, 70, 20, 40, 50


class _Panel:
    def __init__(self, root: ET.Element, index: int, title: str, xs: np.ndarray, ys: list[np.ndarray]):
        self.top = MARGIN_T + index * (PANEL_H + GAP)
        self.left, self.right = MARGIN_L, WIDTH - MARGIN_R
        self.x0, self.x1 = float(xs.min()), float(xs.max())
        if self.x0 == self.x1:
            self.x0, self.x1 = self.x0 - 0.5, self.x1 + 0.5
        stacked = np.concatenate([np.ravel(y) for y in ys])
        lo, hi = float(stacked.min()), float(stacked.max())
        pad = 0.05 * (hi - lo) if hi > lo else max(abs(hi), 1.0) * 0.05
        self.y0, self.y1 = lo - pad, hi + pad
        self.g = ET.SubElement(root, "g", {"class": "panel", "data-panel": title})
        ET.SubElement(
            self.g, "rect",
            {"x": f"{self.left}", "y": f"{self.top}", "width": f"{self.right - self.left}",
             "height": f"{PANEL_H}", "fill": "none", "stroke": "#888"},
        )
        t = ET.SubElement(self.g, "text", {"x": f"{self.left}", "y": f"{self.top - 8}", "font-size": "13"})
        t.text = title
        for v in (self.y0 + pad, self.y1 - pad):
            lab = ET.SubElement(
                self.g, "text",
                {"x": f"{self.left - 6}", "y": f"{self.py(v) + 4:.2f}", "font-size": "10", "text-anchor": "end"},
            )
            lab.text = f"{v:.4g}"

    def px(self, x: float) -> float:
        return self.left + (x - self.x0) / (self.x1 - self.x0) * (self.right - self.left)

    def py(self, y: float) -> float:
        return self.top + PANEL_H - (y - self.y0) / (self.y1 - self.y0) * PANEL_H

    def line(self, xs, ys, name: str, color: str, dashed: bool = False) -> ET.Element:
        pts = " ".join(f"{self.px(x):.2f},{self.py(y):.2f}" for x, y in zip(xs, ys))
        attrs = {"points": pts, "fill": "none", "stroke": color, "stroke-width": "1.8", "data-series": name}
        if dashed:
            attrs["stroke-dasharray"] = "6 4"
        return ET.SubElement(self.g, "polyline", attrs)

    def vline(self, x: float, name: str) -> None:
        ET.SubElement(
            self.g, "line",
            {"x1": f"{self.px(x):.2f}", "x2": f"{self.px(x):.2f}", "y1": f"{self.top}",
             "y2": f"{self.top + PANEL_H}", "stroke": "#555", "stroke-dasharray": "2 3", "data-marker": name},
        )

    def band(self, xs, center, half: float) -> None:
        upper = [f"{self.px(x):.2f},{self.py(c + half):.2f}" for x, c in zip(xs, center)]
        lower = [f"{self.px(x):.2f},{self.py(c - half):.2f}" for x, c in zip(xs, center)][::-1]
        ET.SubElement(
            self.g, "polygon",
            {"points": " ".join(upper + lower), "fill": "#2ca02c", "fill-opacity": "0.2", "stroke": "none",
             "data-series": "bound_band", "data-half-width": repr(float(half))},
        )


def _positions(times: Sequence) -> np.ndarray:
    if all(isinstance(t, (int, float, np.integer, np.floating)) for t in times):
        return np.asarray(times, dtype=float)
    return np.arange(len(times), dtype=float)


def render_svg(
    times: Sequence,
    observed: Sequence[float],
    counterfactual: Sequence[float],
    t0,
    bound: float,
    title: str = "",
) -> str:
    """Build the SVG document. ``t0`` is the first post-period label."""
    observed = np.asarray(observed, dtype=float)
    counterfactual = np.asarray(counterfactual, dtype=float)
    times = list(times)
    if len(times) == 0 or observed.size == 0:
        raise DataError("cannot plot an empty series", code="empty_series")
    if not (observed.shape == counterfactual.shape == (len(times),)):
        raise DataError("plot series are not aligned", code="misaligned_series")
    if t0 not in times:
        raise DataError(f"intervention time {t0!r} not in series", code="unknown_time")
    k = times.index(t0)
    xs = _positions(times)
    att = observed[k:] - counterfactual[k:]
    running = np.cumsum(att) / np.arange(1, att.size + 1)
    cumulative = np.cumsum(att)

    height = MARGIN_T + 3 * PANEL_H + 2 * GAP + 30
    root = ET.Element(
        "svg",
        {"xmlns": SVG_NS, "width": f"{WIDTH}", "height": f"{height}", "viewBox": f"0 0 {WIDTH} {height}",
         "data-bound": repr(float(bound)), "data-t0": str(t0)},
    )
    if title:
        head = ET.SubElement(root, "text", {"x": f"{MARGIN_L}", "y": "18", "font-size": "15"})
        head.text = title

    p1 = _Panel(root, 0, "Outcome: observed vs synthetic control", xs, [observed, counterfactual])
    p1.line(xs, observed, "observed", "#000")
    p1.line(xs, counterfactual, "counterfactual", "#ff7f0e", dashed=True)
    p1.vline(xs[k], "intervention")

    xp = xs[k:]
    p2 = _Panel(root, 1, f"ATT (running average) with +/- bound {bound:.4g}", xp,
                [att, running + bound, running - bound, np.zeros(1)])
    p2.band(xp, running, bound)
    p2.line(xp, att, "att", "#1f77b4")
    p2.line(xp, running, "running_att", "#d62728")
    p2.line([xp[0], xp[-1]], [0.0, 0.0], "zero", "#999", dashed=True)

    p3 = _Panel(root, 2, "Cumulative effect", xp, [cumulative, np.zeros(1)])
    p3.line(xp, cumulative, "cumulative", "#9467bd")
    p3.line([xp[0], xp[-1]], [0.0, 0.0], "zero", "#999", dashed=True)

    ET.indent(root)
    return ET.tostring(root, encoding="unicode", xml_declaration=False) + "\n"


def emit_plot_svg(path: str | Path, times, observed, counterfactual, t0, bound: float, title: str = "") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text('<?xml version="1.0" encoding="UTF-8"?>\n' + render_svg(times, observed, counterfactual, t0, bound, title), encoding="utf-8")
    return path
