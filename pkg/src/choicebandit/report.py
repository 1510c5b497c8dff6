"""CSV, SVG and JSON output for experiment results.

SVGs are written by hand (SVG 1.1, no plotting dependency).
"""
from __future__ import annotations

import json
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .harness import AggregateResult, check_bounds

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf")
WIDTH, HEIGHT = 720, 420
MARGIN = dict(left=70, right=160, top=40, bottom=50)


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def emit_csv(result: AggregateResult, path) -> Path:
    """Columns ``step, variant, mean_reward, pct_optimal``; steps are 1-based."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["step,variant,mean_reward,pct_optimal"]
    for name, v in result.variants.items():
        for t, (r, p) in enumerate(zip(v.mean_reward, v.pct_optimal), start=1):
            lines.append(f"{t},{name},{_fmt(r)},{_fmt(p)}")
    path.write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
    return path


def _nice_range(lo: float, hi: float) -> tuple[float, float]:
    if not np.isfinite(lo) or not np.isfinite(hi):
        return 0.0, 1.0
    if hi - lo < 1e-12:
        pad = max(abs(hi), 1.0) * 0.05
        return lo - pad, hi + pad
    pad = (hi - lo) * 0.05
    return lo - pad, hi + pad


class _Canvas:
    def __init__(self, title: str, xlabel: str, ylabel: str, xrange, yrange):
        self.parts = []
        self.x0, self.x1 = xrange
        self.y0, self.y1 = yrange
        self.plot_w = WIDTH - MARGIN["left"] - MARGIN["right"]
        self.plot_h = HEIGHT - MARGIN["top"] - MARGIN["bottom"]
        self._frame(title, xlabel, ylabel)

    def px(self, x):
        return MARGIN["left"] + (np.asarray(x) - self.x0) / (self.x1 - self.x0) * self.plot_w

    def py(self, y):
        return MARGIN["top"] + (self.y1 - np.asarray(y)) / (self.y1 - self.y0) * self.plot_h

    def _frame(self, title, xlabel, ylabel):
        left, top = MARGIN["left"], MARGIN["top"]
        self.parts.append(f'<rect x="{left}" y="{top}" width="{self.plot_w}" height="{self.plot_h}" '
                          'fill="none" stroke="#444"/>')
        self.parts.append(f'<text x="{WIDTH / 2:.1f}" y="22" text-anchor="middle" font-size="15">'
                          f'{escape(title)}</text>')
        self.parts.append(f'<text x="{left + self.plot_w / 2:.1f}" y="{HEIGHT - 12}" '
                          f'text-anchor="middle" font-size="12">{escape(xlabel)}</text>')
        self.parts.append(f'<text x="16" y="{top + self.plot_h / 2:.1f}" text-anchor="middle" '
                          f'font-size="12" transform="rotate(-90 16 {top + self.plot_h / 2:.1f})">'
                          f'{escape(ylabel)}</text>')
        for k in range(5):
            yv = self.y0 + (self.y1 - self.y0) * k / 4
            y = self.py(yv)
            self.parts.append(f'<line x1="{left - 4}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="#444"/>')
            self.parts.append(f'<text x="{left - 7}" y="{y + 4:.2f}" text-anchor="end" font-size="10">'
                              f'{yv:.3g}</text>')
            xv = self.x0 + (self.x1 - self.x0) * k / 4
            x = self.px(xv)
            bottom = top + self.plot_h
            self.parts.append(f'<line x1="{x:.2f}" y1="{bottom}" x2="{x:.2f}" y2="{bottom + 4}" stroke="#444"/>')
            self.parts.append(f'<text x="{x:.2f}" y="{bottom + 16}" text-anchor="middle" font-size="10">'
                              f'{xv:.4g}</text>')

    def legend(self, names):
        x = WIDTH - MARGIN["right"] + 12
        for k, name in enumerate(names):
            y = MARGIN["top"] + 14 + 18 * k
            color = PALETTE[k % len(PALETTE)]
            self.parts.append(f'<line x1="{x}" y1="{y - 4}" x2="{x + 18}" y2="{y - 4}" '
                              f'stroke="{color}" stroke-width="2"/>')
            self.parts.append(f'<text x="{x + 24}" y="{y}" font-size="11">{escape(name)}</text>')

    def render(self) -> str:
        body = "\n  ".join(self.parts)
        return ('<?xml version="1.0" encoding="UTF-8" standalone="no"?>\n'
                '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
                f'width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">\n'
                f'  <rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>\n  {body}\n</svg>\n')


def _line_chart(title, ylabel, series: dict[str, np.ndarray]) -> str:
    T = max(len(y) for y in series.values())
    values = np.concatenate(list(series.values()))
    canvas = _Canvas(title, "step", ylabel, (1, max(T, 2)), _nice_range(values.min(), values.max()))
    for k, (name, y) in enumerate(series.items()):
        xs = canvas.px(np.arange(1, len(y) + 1))
        ys = canvas.py(y)
        points = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(xs, ys))
        canvas.parts.append(f'<polyline fill="none" stroke="{PALETTE[k % len(PALETTE)]}" '
                            f'stroke-width="1.3" points="{points}"><title>{escape(name)}</title></polyline>')
    canvas.legend(series)
    return canvas.render()


def _bar_chart(title, ylabel, series: dict[str, np.ndarray], reference=None) -> str:
    n = max(len(y) for y in series.values())
    values = np.concatenate([np.nan_to_num(y) for y in series.values()] +
                            ([reference] if reference is not None else []))
    lo, hi = _nice_range(min(0.0, values.min()), values.max())
    canvas = _Canvas(title, "arm", ylabel, (0.5, n + 0.5), (lo, hi))
    group = 0.8 / len(series)
    zero = canvas.py(max(lo, 0.0))
    for k, (name, y) in enumerate(series.items()):
        color = PALETTE[k % len(PALETTE)]
        for arm, value in enumerate(y, start=1):
            if np.isnan(value):
                continue
            left = canvas.px(arm - 0.4 + k * group)
            width = canvas.px(arm - 0.4 + (k + 1) * group) - left
            top = canvas.py(value)
            canvas.parts.append(f'<rect x="{left:.2f}" y="{min(top, zero):.2f}" width="{width:.2f}" '
                                f'height="{abs(zero - top):.2f}" fill="{color}">'
                                f'<title>{escape(name)} arm {arm}: {value:.4g}</title></rect>')
    if reference is not None:
        xs = canvas.px(np.arange(1, len(reference) + 1))
        points = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(xs, canvas.py(reference)))
        canvas.parts.append(f'<polyline fill="none" stroke="#000" stroke-dasharray="4 3" '
                            f'points="{points}"><title>true means</title></polyline>')
    canvas.legend(list(series) + (["true means"] if reference is not None else []))
    return canvas.render()


def emit_svg(result: AggregateResult, out_dir) -> list[Path]:
    """Mean-reward, optimal-action and learned-value charts, one file each.

    Single-replication runs also draw the true arm means on the learned-value chart.
    """
    reference_means = None
    if result.env_means is not None and result.env_means.shape[0] == 1:
        reference_means = result.env_means[0]
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = result.config.name
    charts = {
        f"{name}_mean_reward.svg": _line_chart(
            f"{name}: average reward", "average reward",
            {k: v.mean_reward for k, v in result.variants.items()}),
        f"{name}_pct_optimal.svg": _line_chart(
            f"{name}: optimal action", "fraction optimal action",
            {k: v.pct_optimal for k, v in result.variants.items()}),
        f"{name}_learned_values.svg": _bar_chart(
            f"{name}: learned average reward per arm", "learned value",
            {k: v.learned_values for k, v in result.variants.items()}, reference_means),
    }
    paths = []
    for fname, text in charts.items():
        path = out_dir / fname
        path.write_text(text, encoding="utf-8")
        paths.append(path)
    return paths


def emit_metadata(result: AggregateResult, path) -> Path:
    path = Path(path)
    meta = {
        "config": result.config.to_json(),
        "variants": result.summary(),
        "bounds": [{"variant": c.variant, "measured": c.measured, "bound": c.bound,
                    "margin": c.margin, "passed": c.passed}
                   for c in check_bounds(result.config, result)],
    }
    path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_outputs(result: AggregateResult, out_dir, formats=("csv", "svg")) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = result.config.name
    paths = [emit_metadata(result, out_dir / f"{name}_meta.json")]
    if "csv" in formats:
        paths.append(emit_csv(result, out_dir / f"{name}.csv"))
    if "svg" in formats:
        paths += emit_svg(result, out_dir)
    return paths
