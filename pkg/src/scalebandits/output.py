"""CSV and SVG writers for experiment results.

Floats are written with ``repr`` (shortest round-trip form) so that identical
runs give byte-identical files.
"""

from __future__ import annotations

import math
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from . import __version__
from .simulator import RNG_IDENTITY, ExperimentResult

RUNS_HEADER = "preset,policy,run,round,cum_reward,cum_pseudo_regret"
AGGREGATE_HEADER = "preset,policy,round,mean_regret,stderr,runs"

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2",
           "#7f7f7f", "#bcbd22", "#17becf")


def _fmt(x) -> str:
    return repr(float(x))


def metadata_line(result: ExperimentResult) -> str:
    cfg = result.config
    return (f"# scalebandits {__version__} master_seed={cfg.master_seed} rng={RNG_IDENTITY} "
            f"horizon={cfg.horizon} runs={cfg.runs} schedule={cfg.schedule.describe()} "
            f"raw_means={list(cfg.raw_means)}")


def emit_csv(result: ExperimentResult, directory) -> tuple[Path, Path]:
    """Write ``<name>_runs.csv`` (long format) and ``<name>_aggregate.csv``."""
    if not result.curves:
        raise ValueError("no curves to write")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    name = result.config.name
    meta = metadata_line(result)

    runs_path = directory / f"{name}_runs.csv"
    lines = [meta, RUNS_HEADER]
    for pid, traces in result.traces.items():
        for run, tr in enumerate(traces):
            for rnd, rew, reg in zip(tr.rounds, tr.cum_reward, tr.cum_regret):
                lines.append(f"{name},{pid},{run},{int(rnd)},{_fmt(rew)},{_fmt(reg)}")
    runs_path.write_text("\n".join(lines) + "\n")

    agg_path = directory / f"{name}_aggregate.csv"
    lines = [meta, AGGREGATE_HEADER]
    for pid, curve in result.curves.items():
        for rnd, mean, se in zip(curve.rounds, curve.mean, curve.stderr):
            lines.append(f"{name},{pid},{int(rnd)},{_fmt(mean)},{_fmt(se)},{curve.runs}")
    agg_path.write_text("\n".join(lines) + "\n")
    return runs_path, agg_path


def _nice_ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    ticks = []
    x = start
    while x <= hi + 1e-9 * step:
        ticks.append(round(x, 12))
        x += step
    return ticks


def emit_svg(curves, path, *, log_x: bool = False, title: str | None = None,
             width: int = 720, height: int = 440) -> Path:
    """Cumulative pseudo-regret against round, one polyline per policy."""
    curves = list(curves.values()) if isinstance(curves, dict) else list(curves)
    if not curves:
        raise ValueError("no curves to plot")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    left, right, top, bottom = 70, 150, 40 if title else 20, 50
    pw, ph = width - left - right, height - top - bottom

    def xval(r):
        return math.log10(r) if log_x else float(r)

    x_lo = min(xval(max(c.rounds[0], 1)) for c in curves)
    x_hi = max(xval(c.rounds[-1]) for c in curves)
    if log_x:
        x_lo = math.floor(x_lo)
        x_hi = max(math.ceil(x_hi), x_lo + 1)
    else:
        x_lo = 0.0
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    y_hi = max(float(np.max(c.mean)) for c in curves)
    y_hi = y_hi * 1.05 if y_hi > 0 else 1.0

    def sx(v):
        return left + (v - x_lo) / (x_hi - x_lo) * pw

    def sy(v):
        return top + ph - v / y_hi * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{width / 2:.2f}" y="24" text-anchor="middle" '
                   f'font-size="15">{escape(title)}</text>')
    out.append(f'<line x1="{left}" y1="{top + ph}" x2="{left + pw}" y2="{top + ph}" stroke="black"/>')
    out.append(f'<line x1="{left}" y1="{top}" x2="{left}" y2="{top + ph}" stroke="black"/>')

    if log_x:
        xticks = [float(e) for e in range(int(x_lo), int(x_hi) + 1)]
        xlabels = [f"1e{int(e)}" for e in xticks]
    else:
        xticks = _nice_ticks(x_lo, x_hi)
        xlabels = [f"{t:g}" for t in xticks]
    for tv, label in zip(xticks, xlabels):
        x = sx(tv)
        out.append(f'<line x1="{x:.2f}" y1="{top + ph}" x2="{x:.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{x:.2f}" y="{top + ph + 18}" text-anchor="middle">{label}</text>')
    for tv in _nice_ticks(0.0, y_hi):
        y = sy(tv)
        out.append(f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end">{tv:g}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 12}" text-anchor="middle">'
               f'round{" (log scale)" if log_x else ""}</text>')
    out.append(f'<text x="18" y="{top + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 18 {top + ph / 2:.2f})">cumulative pseudo-regret</text>')

    for i, c in enumerate(curves):
        color = PALETTE[i % len(PALETTE)]
        pts = " ".join(f"{sx(xval(max(r, 1))):.2f},{sy(m):.2f}" for r, m in zip(c.rounds, c.mean))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.8" points="{pts}"/>')
        ly = top + 10 + 18 * i
        lx = left + pw + 15
        out.append(f'<line x1="{lx}" y1="{ly}" x2="{lx + 20}" y2="{ly}" stroke="{color}" stroke-width="2.5"/>')
        out.append(f'<text x="{lx + 26}" y="{ly + 4}">{escape(c.policy)}</text>')
    out.append("</svg>")
    path.write_text("\n".join(out) + "\n")
    return path
