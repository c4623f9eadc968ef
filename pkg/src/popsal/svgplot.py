"""Minimal self-contained SVG line charts.

Hand-rolled rather than delegated to a plotting library so that report
artifacts are byte-identical across runs: no embedded timestamps, hashes, or
font machinery. Fixed-precision coordinate formatting keeps output stable.
"""
from __future__ import annotations

from pathlib import Path

from .errors import OutputError, ValidationError

_WIDTH, _HEIGHT = 640, 420
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 70, 20, 40, 55
_STYLE = (
    "text{font-family:sans-serif;font-size:13px;fill:#222}"
    ".title{font-size:15px}"
    ".axis{stroke:#222;stroke-width:1}"
    ".grid{stroke:#ddd;stroke-width:0.5}"
    ".curve{stroke:#1f77b4;stroke-width:2;fill:none}"
    ".pt{fill:#1f77b4}"
)


def _fmt(v: float) -> str:
    return f"{v:.2f}".rstrip("0").rstrip(".")


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    step = (hi - lo) / (n - 1)
    return [lo + i * step for i in range(n)]


def line_chart(path, points, x_label: str, y_label: str, title: str | None = None) -> Path:
    """Write one polyline chart. ``points`` is a list of (x, y-or-None).

    None y-values produce gaps in the polyline (empty bins).
    """
    drawable = [(x, y) for x, y in points if y is not None]
    if not drawable:
        raise ValidationError("cannot plot a curve with no defined points")

    xs = [p[0] for p in points]
    ys = [p[1] for p in drawable]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.05 * (y_hi - y_lo)
    y_lo -= pad
    y_hi += pad

    plot_w = _WIDTH - _MARGIN_L - _MARGIN_R
    plot_h = _HEIGHT - _MARGIN_T - _MARGIN_B

    def sx(x: float) -> float:
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w

    def sy(y: float) -> float:
        return _MARGIN_T + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f"<style>{_STYLE}</style>",
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(f'<text class="title" x="{_WIDTH / 2:.1f}" y="22" text-anchor="middle">{title}</text>')

    for tx in _ticks(x_lo, x_hi):
        parts.append(f'<line class="grid" x1="{sx(tx):.2f}" y1="{_MARGIN_T}" x2="{sx(tx):.2f}" y2="{_MARGIN_T + plot_h}"/>')
        parts.append(
            f'<text x="{sx(tx):.2f}" y="{_MARGIN_T + plot_h + 18}" text-anchor="middle">{_fmt(tx)}</text>'
        )
    for ty in _ticks(y_lo, y_hi):
        parts.append(f'<line class="grid" x1="{_MARGIN_L}" y1="{sy(ty):.2f}" x2="{_MARGIN_L + plot_w}" y2="{sy(ty):.2f}"/>')
        parts.append(
            f'<text x="{_MARGIN_L - 8}" y="{sy(ty) + 4:.2f}" text-anchor="end">{_fmt(ty)}</text>'
        )

    parts.append(
        f'<line class="axis" x1="{_MARGIN_L}" y1="{_MARGIN_T + plot_h}" '
        f'x2="{_MARGIN_L + plot_w}" y2="{_MARGIN_T + plot_h}"/>'
    )
    parts.append(f'<line class="axis" x1="{_MARGIN_L}" y1="{_MARGIN_T}" x2="{_MARGIN_L}" y2="{_MARGIN_T + plot_h}"/>')
    parts.append(
        f'<text x="{_MARGIN_L + plot_w / 2:.1f}" y="{_HEIGHT - 12}" text-anchor="middle">{x_label}</text>'
    )
    parts.append(
        f'<text x="18" y="{_MARGIN_T + plot_h / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {_MARGIN_T + plot_h / 2:.1f})">{y_label}</text>'
    )

    # Split the polyline at undefined points.
    segment: list[str] = []
    for x, y in points:
        if y is None:
            if len(segment) >= 2:
                parts.append(f'<polyline class="curve" points="{" ".join(segment)}"/>')
            segment = []
        else:
            segment.append(f"{sx(x):.2f},{sy(y):.2f}")
    if len(segment) >= 2:
        parts.append(f'<polyline class="curve" points="{" ".join(segment)}"/>')
    for x, y in drawable:
        parts.append(f'<circle class="pt" cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.5"/>')
    parts.append("</svg>")

    path = Path(path)
    try:
        path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    except OSError as e:
        raise OutputError(f"cannot write {path}: {e}") from e
    return path
