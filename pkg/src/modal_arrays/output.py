"""CSV tables and self-contained SVG plots."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .analysis import SWEEP_COLUMNS, BeampatternCurve

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _open_for_write(path):
    path = Path(path)
    try:
        return path.open("w", newline="", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from exc


def write_table(header, rows, path):
    """Write a CSV table to a path or to an already open text stream."""
    if hasattr(path, "write"):
        _write_rows(path, header, rows)
        return
    with _open_for_write(path) as fh:
        _write_rows(fh, header, rows)


def _write_rows(fh, header, rows):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])


def write_results(rows, path):
    """Sweep rows (:class:`~modal_arrays.analysis.SweepRow`) to CSV with the fixed schema."""
    write_table(SWEEP_COLUMNS, (r.as_tuple() for r in rows), path)


def read_results(path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_beampattern(curve: BeampatternCurve, path):
    rows = zip(
        curve.theta_grid.tolist(),
        curve.values.real.tolist(),
        curve.values.imag.tolist(),
        np.abs(curve.values).tolist(),
        curve.magnitude_db.tolist(),
    )
    write_table(("theta", "re", "im", "magnitude", "magnitude_db"), rows, path)


def write_crb(label, mags, phases, crb, path):
    rows = []
    for i, r in enumerate(mags):
        for j, t in enumerate(phases):
            z2 = r * np.exp(1j * t)
            c = float(crb[i, j])
            db = 10 * math.log10(c) if 0 < c < math.inf else math.inf
            rows.append((label, float(r), float(t), float(z2.real), float(z2.imag), c, db))
    write_table(("geometry", "z2_mag", "z2_phase", "z2_re", "z2_im", "crb_z1", "crb_z1_db"), rows, path)


# ------------------------------------------------------------------------ SVG


@dataclass
class Series:
    label: str
    x: np.ndarray
    y: np.ndarray


@dataclass
class Figure:
    """A line or scatter plot; ``kind`` is "line" or "scatter"."""

    kind: str
    series: list[Series] = field(default_factory=list)
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    width: int = 640
    height: int = 480
    xlim: tuple[float, float] | None = None
    ylim: tuple[float, float] | None = None
    logy: bool = False

    def add(self, label, x, y):
        self.series.append(Series(label, np.asarray(x, float), np.asarray(y, float)))
        return self


MARGIN = (70, 20, 40, 55)  # left, right, top, bottom


def _limits(values, given):
    if given is not None:
        return given
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        return 0.0, 1.0
    lo, hi = float(finite.min()), float(finite.max())
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


class _Axes:
    def __init__(self, fig: Figure):
        xs = np.concatenate([s.x for s in fig.series]) if fig.series else np.zeros(1)
        ys = np.concatenate([s.y for s in fig.series]) if fig.series else np.zeros(1)
        if fig.logy:
            with np.errstate(divide="ignore", invalid="ignore"):
                ys = np.log10(ys)
        self.fig = fig
        self.xlim = _limits(xs, fig.xlim)
        self.ylim = _limits(ys, fig.ylim)
        left, right, top, bottom = MARGIN
        self.x0, self.x1 = left, fig.width - right
        self.y0, self.y1 = fig.height - bottom, top

    def px(self, x, y):
        if self.fig.logy:
            with np.errstate(divide="ignore", invalid="ignore"):
                y = np.log10(y)
        (a, b), (c, d) = self.xlim, self.ylim
        u = self.x0 + (np.asarray(x, float) - a) / (b - a) * (self.x1 - self.x0)
        v = self.y0 + (np.asarray(y, float) - c) / (d - c) * (self.y1 - self.y0)
        return u, v


def _ticks(lo, hi, n=5):
    return np.linspace(lo, hi, n)


def render_svg(fig: Figure) -> str:
    ax = _Axes(fig)
    w, h = fig.width, fig.height
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>',
        f'<rect x="{ax.x0}" y="{ax.y1}" width="{ax.x1 - ax.x0}" height="{ax.y0 - ax.y1}" '
        'fill="none" stroke="black"/>',
    ]
    for t in _ticks(*ax.xlim):
        u = ax.x0 + (t - ax.xlim[0]) / (ax.xlim[1] - ax.xlim[0]) * (ax.x1 - ax.x0)
        out.append(f'<line x1="{u:.2f}" y1="{ax.y0}" x2="{u:.2f}" y2="{ax.y0 + 5}" stroke="black"/>')
        out.append(f'<text x="{u:.2f}" y="{ax.y0 + 18}" text-anchor="middle">{t:.3g}</text>')
    for t in _ticks(*ax.ylim):
        v = ax.y0 + (t - ax.ylim[0]) / (ax.ylim[1] - ax.ylim[0]) * (ax.y1 - ax.y0)
        label = f"1e{t:.2g}" if fig.logy else f"{t:.3g}"
        out.append(f'<line x1="{ax.x0 - 5}" y1="{v:.2f}" x2="{ax.x0}" y2="{v:.2f}" stroke="black"/>')
        out.append(f'<text x="{ax.x0 - 8}" y="{v + 4:.2f}" text-anchor="end">{label}</text>')
    out.append(f'<text x="{(ax.x0 + ax.x1) / 2:.1f}" y="{h - 12}" text-anchor="middle">'
               f'{escape(fig.xlabel)}</text>')
    out.append(f'<text x="16" y="{(ax.y0 + ax.y1) / 2:.1f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {(ax.y0 + ax.y1) / 2:.1f})">{escape(fig.ylabel)}</text>')
    if fig.title:
        out.append(f'<text x="{w / 2:.1f}" y="22" text-anchor="middle" font-size="14">'
                   f'{escape(fig.title)}</text>')
    out.append(f'<clipPath id="plot"><rect x="{ax.x0}" y="{ax.y1}" width="{ax.x1 - ax.x0}" '
               f'height="{ax.y0 - ax.y1}"/></clipPath>')
    for idx, s in enumerate(fig.series):
        color = PALETTE[idx % len(PALETTE)]
        u, v = ax.px(s.x, s.y)
        ok = np.isfinite(u) & np.isfinite(v)
        out.append(f'<g class="series" data-label="{escape(s.label)}" clip-path="url(#plot)">')
        if fig.kind == "line":
            pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(u[ok], v[ok]))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        else:
            for a, b in zip(u[ok], v[ok]):
                out.append(f'<circle cx="{a:.2f}" cy="{b:.2f}" r="2" fill="{color}"/>')
        out.append("</g>")
        ly = ax.y1 + 16 + 16 * idx
        out.append(f'<rect x="{ax.x1 - 150}" y="{ly - 9}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{ax.x1 - 135}" y="{ly}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(fig: Figure, path):
    with _open_for_write(path) as fh:
        fh.write(render_svg(fig))


def beampattern_figure(curves: dict[str, BeampatternCurve], floor_db=-40.0) -> Figure:
    fig = Figure("line", title="Beampattern", xlabel="theta (rad)", ylabel="|B| (dB)",
                 ylim=(floor_db, 0.0))
    for label, c in curves.items():
        fig.add(label, c.theta_grid, np.maximum(c.magnitude_db, floor_db))
    return fig


def sweep_figure(rows) -> Figure:
    """RMSE versus SNR, one series per (geometry, mode)."""
    fig = Figure("line", title="RMSE versus per-sensor SNR", xlabel="SNR (dB)", ylabel="RMSE",
                 logy=True)
    groups: dict[tuple, list] = {}
    for r in rows:
        groups.setdefault((r.geometry, r.mode_index), []).append(r)
    for (geom, k), rs in groups.items():
        rs = sorted(rs, key=lambda r: r.snr_db)
        fig.add(f"{geom} z{k + 1}", [r.snr_db for r in rs], [r.rmse for r in rs])
    return fig


def scatter_figure(estimates: dict[str, np.ndarray], truth=None, lim=None) -> Figure:
    """Mode estimates in the complex plane, one series per label."""
    fig = Figure("scatter", title="Mode estimates", xlabel="Re z", ylabel="Im z",
                 xlim=lim[0] if lim else None, ylim=lim[1] if lim else None)
    for label, z in estimates.items():
        z = np.asarray(z, complex).ravel()
        fig.add(label, z.real, z.imag)
    if truth is not None:
        t = np.asarray(truth, complex)
        fig.add("truth", t.real, t.imag)
    return fig
