"""Static SVG rendering of PR curves in the unit square."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from .core import PRCurve
from .analysis import build_envelope

PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def curves_to_svg(curves: Sequence[PRCurve], labels: Sequence[str] | None = None, size: int = 420, title: str = "") -> str:
    labels = list(labels) if labels is not None else [str(c.metadata.get("method", f"curve {i}")) for i, c in enumerate(curves)]
    m = 50
    plot = size - 2 * m

    def px(beta: float) -> float:
        return m + beta * plot

    def py(alpha: float) -> float:
        return size - m - alpha * plot

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + 140}" height="{size}" viewBox="0 0 {size + 140} {size}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<rect x="{m}" y="{m}" width="{plot}" height="{plot}" fill="none" stroke="black"/>',
    ]
    for t in (0.0, 0.25, 0.5, 0.75, 1.0):
        out.append(f'<line x1="{px(t):.1f}" y1="{py(0):.1f}" x2="{px(t):.1f}" y2="{py(0) + 5:.1f}" stroke="black"/>')
        out.append(f'<text x="{px(t):.1f}" y="{py(0) + 18:.1f}" font-size="11" text-anchor="middle">{t:g}</text>')
        out.append(f'<line x1="{px(0) - 5:.1f}" y1="{py(t):.1f}" x2="{px(0):.1f}" y2="{py(t):.1f}" stroke="black"/>')
        out.append(f'<text x="{px(0) - 8:.1f}" y="{py(t) + 4:.1f}" font-size="11" text-anchor="end">{t:g}</text>')
    out.append(f'<text x="{m + plot / 2:.1f}" y="{size - 12}" font-size="13" text-anchor="middle">recall (beta)</text>')
    out.append(
        f'<text x="14" y="{m + plot / 2:.1f}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 14 {m + plot / 2:.1f})">precision (alpha)</text>'
    )
    if title:
        out.append(f'<text x="{m + plot / 2:.1f}" y="{m - 16}" font-size="14" text-anchor="middle">{escape(title)}</text>')
    for i, (c, lab) in enumerate(zip(curves, labels)):
        color = PALETTE[i % len(PALETTE)]
        env = build_envelope(c)
        pts = [(0.0, float(env.ys[0]))] + list(zip(env.xs.tolist(), env.ys.tolist()))
        pts.append((float(env.xs[-1]), 0.0))
        path = " ".join(f"{px(b):.2f},{py(a):.2f}" for b, a in pts)
        out.append(f'<polyline points="{path}" fill="none" stroke="{color}" stroke-width="1.8"/>')
        ly = m + 14 + 18 * i
        out.append(f'<line x1="{size + 4}" y1="{ly}" x2="{size + 24}" y2="{ly}" stroke="{color}" stroke-width="3"/>')
        out.append(f'<text x="{size + 30}" y="{ly + 4}" font-size="12">{escape(lab)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(curves: Sequence[PRCurve], path: str | Path, labels: Sequence[str] | None = None, title: str = "") -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(curves_to_svg(curves, labels, title=title))
    return path
