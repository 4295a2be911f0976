"""Deterministic SVG charts; no rendering dependencies.

Two figures: a grouped bar chart of posterior type means per class, and a
panel per class with the marginal Beta density of every type.  Densities
are evaluated analytically on a 512-point warped grid,
``theta(u) = u^q / (u^q + (1-u)^q)`` with ``q`` chosen so that the
change-of-variables integrand ``f(theta(u)) * theta'(u)`` vanishes at
both endpoints even when a concentration is below 1 (Beta densities with
a < 1 diverge at 0, so a uniform theta grid can neither resolve nor
integrate them).  ``BetaCurve.trapezoid_mass`` integrates in the warp
coordinate and is how the tests confirm each plotted curve carries unit
mass.

All numbers are rendered through fixed format strings, so byte output is
a pure function of the model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from dirimult.classifier import FittedModel
from dirimult.conjugate import marginal_beta, posterior_mean_table

__all__ = ["BetaCurve", "beta_curve", "posterior_means_svg", "marginals_svg"]

PALETTE = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
    "#8c564b", "#17becf", "#bcbd22", "#e377c2", "#7f7f7f",
]

GRID_POINTS = 512


def _esc(text: str) -> str:
    return (
        text.replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )


@dataclass(frozen=True)
class BetaCurve:
    """Sampled Beta(a, b) density on the warped grid."""

    a: float
    b: float
    warp: int
    us: tuple[float, ...]
    thetas: tuple[float, ...]
    densities: tuple[float, ...]

    def trapezoid_mass(self) -> float:
        """Trapezoid integral of the density in the warp coordinate."""
        q = float(self.warp)
        hs = []
        for u, t, f in zip(self.us, self.thetas, self.densities):
            if u == 0.0 or u == 1.0:
                hs.append(0.0)  # q * min(a, b) > 1 forces the limit to 0
                continue
            uq = u ** q
            om = (1.0 - u) ** q
            dt = (q * u ** (q - 1.0) * om + q * (1.0 - u) ** (q - 1.0) * uq) / (
                (uq + om) * (uq + om)
            )
            hs.append(f * dt)
        step = self.us[1] - self.us[0]
        return math.fsum(
            (h0 + h1) * step / 2.0 for h0, h1 in zip(hs, hs[1:])
        )


def beta_curve(a: float, b: float, n: int = GRID_POINTS) -> BetaCurve:
    """Analytic Beta(a, b) density samples on the warped grid."""
    q = max(3, math.ceil(1.0 / min(a, b)) + 1)
    log_norm = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
    us, thetas, dens = [], [], []
    for k in range(n):
        u = k / (n - 1)
        us.append(u)
        if u == 0.0:
            thetas.append(0.0)
            dens.append(0.0)
            continue
        if u == 1.0:
            thetas.append(1.0)
            dens.append(0.0)
            continue
        uq = u ** q
        om = (1.0 - u) ** q
        t = uq / (uq + om)
        omt = om / (uq + om)
        thetas.append(t)
        dens.append(
            math.exp(log_norm + (a - 1.0) * math.log(t) + (b - 1.0) * math.log(omt))
        )
    return BetaCurve(
        a=a, b=b, warp=q, us=tuple(us), thetas=tuple(thetas), densities=tuple(dens)
    )


def posterior_means_svg(model: FittedModel) -> str:
    """Grouped bar chart: one group per type, one bar per class."""
    table = posterior_mean_table(model.posteriors)
    types = model.typology.labels
    classes = model.class_labels
    width, height = 900, 460
    left, right, top, bottom = 70, 170, 50, 60
    plot_w = width - left - right
    plot_h = height - top - bottom
    ymax = max(max(row) for row in table) * 1.1

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="#ffffff"/>',
        f'<text x="{width / 2:.1f}" y="28" text-anchor="middle" '
        'font-family="sans-serif" font-size="17">'
        "Posterior mean type probabilities by class</text>",
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        y = top + plot_h - frac * plot_h
        val = frac * ymax
        out.append(
            f'<line x1="{left}" y1="{y:.2f}" x2="{left + plot_w}" y2="{y:.2f}" '
            'stroke="#dddddd" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{left - 8}" y="{y + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{val:.2f}</text>'
        )
    group_w = plot_w / len(types)
    bar_w = group_w * 0.8 / len(classes)
    for j, tlab in enumerate(types):
        gx = left + j * group_w
        out.append(
            f'<text x="{gx + group_w / 2:.2f}" y="{top + plot_h + 20}" '
            'text-anchor="middle" font-family="sans-serif" font-size="12">'
            f"{_esc(tlab)}</text>"
        )
        for i in range(len(classes)):
            v = table[j][i]
            h = v / ymax * plot_h
            x = gx + group_w * 0.1 + i * bar_w
            y = top + plot_h - h
            color = PALETTE[i % len(PALETTE)]
            out.append(
                f'<rect x="{x:.2f}" y="{y:.2f}" width="{bar_w:.2f}" '
                f'height="{h:.2f}" fill="{color}"/>'
            )
    lx = left + plot_w + 20
    for i, clab in enumerate(classes):
        ly = top + 10 + i * 22
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<rect x="{lx}" y="{ly}" width="14" height="14" fill="{color}"/>')
        out.append(
            f'<text x="{lx + 20}" y="{ly + 11}" font-family="sans-serif" '
            f'font-size="12">{_esc(clab)}</text>'
        )
    out.append(
        f'<line x1="{left}" y1="{top + plot_h}" x2="{left + plot_w}" '
        f'y2="{top + plot_h}" stroke="#000000" stroke-width="1"/>'
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _panel_cap(curves: list[BetaCurve]) -> float:
    """Display ceiling: the body of the density, ignoring singular heads."""
    cap = 0.0
    for c in curves:
        for t, f in zip(c.thetas, c.densities):
            if 0.005 <= t <= 0.995:
                cap = max(cap, f)
    return cap * 1.05 if cap > 0.0 else 1.0


def marginals_svg(model: FittedModel, grid_points: int = GRID_POINTS) -> str:
    """One panel per class: marginal Beta density of every type."""
    classes = model.class_labels
    types = model.typology.labels
    panel_w, panel_h = 300, 210
    cols = min(3, len(classes))
    rows = (len(classes) + cols - 1) // cols
    width = cols * panel_w + 160
    height = rows * panel_h + 70

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        '<rect width="100%" height="100%" fill="#ffffff"/>',
        f'<text x="{width / 2:.1f}" y="26" text-anchor="middle" '
        'font-family="sans-serif" font-size="17">'
        "Marginal type-probability densities per class</text>",
    ]
    for i, (clab, post) in enumerate(zip(classes, model.posteriors)):
        curves = [
            beta_curve(m.a, m.b, grid_points)
            for m in (marginal_beta(post, j) for j in range(len(types)))
        ]
        cap = _panel_cap(curves)
        px = 40 + (i % cols) * panel_w
        py = 50 + (i // cols) * panel_h
        iw, ih = panel_w - 50, panel_h - 55
        out.append(
            f'<rect x="{px}" y="{py}" width="{iw}" height="{ih}" fill="none" '
            'stroke="#888888" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{px + iw / 2:.1f}" y="{py - 6}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="13">{_esc(clab)}</text>'
        )
        for lab, frac in (("0", 0.0), ("0.5", 0.5), ("1", 1.0)):
            out.append(
                f'<text x="{px + frac * iw:.1f}" y="{py + ih + 14}" '
                'text-anchor="middle" font-family="sans-serif" font-size="10">'
                f"{lab}</text>"
            )
        for j, curve in enumerate(curves):
            color = PALETTE[j % len(PALETTE)]
            pts = []
            for t, f in zip(curve.thetas, curve.densities):
                x = px + t * iw
                y = py + ih - min(f, cap) / cap * ih
                pts.append(f"{x:.2f},{y:.2f}")
            out.append(
                f'<polyline points="{" ".join(pts)}" fill="none" '
                f'stroke="{color}" stroke-width="1.3"/>'
            )
    lx = width - 115
    for j, tlab in enumerate(types):
        ly = 60 + j * 20
        color = PALETTE[j % len(PALETTE)]
        out.append(
            f'<line x1="{lx}" y1="{ly}" x2="{lx + 16}" y2="{ly}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        out.append(
            f'<text x="{lx + 22}" y="{ly + 4}" font-family="sans-serif" '
            f'font-size="12">{_esc(tlab)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
