"""Chart rendering (text grids, SVG) and golden-file comparison.

The drawing conventions follow the usual chart key: dots are copies of
M2 (tau-torsion dots are drawn distinctly and annotated with their
exponent), vertical lines are h0-multiplications, slope-1 lines are h1,
slope-1/3 lines are h2; a line is drawn in the twist colour when the
product hits tau times a generator rather than the generator itself;
boundary torsion dots supporting h1 get a tower arrow.

Golden data for the two reference charts lives in goldens/ as chart
JSON; it was transcribed from the source figures and cross-validated
against the computation before freezing (per-dot notes in the files
record how drawing ambiguities were resolved).
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field

from .ext import Dot, Edge, ExtChart

GOLDEN_NAMES = ("fig2", "fig3")


@dataclass(frozen=True)
class ChartStyle:
    unit: int = 40
    margin: int = 60
    dot_radius: int = 5
    free_fill: str = "black"
    torsion_fill: str = "red"
    edge_color: str = "black"
    twist_color: str = "blue"
    tower_color: str = "red"
    label_color: str = "#555555"

    def dot_fill(self, torsion: int | None) -> str:
        return self.free_fill if torsion is None else self.torsion_fill


def render_text(chart: ExtChart) -> str:
    """Fixed-width grid, one column per stem, filtration increasing
    upward; a cell shows the number of free dots and one t<r> marker per
    torsion dot."""
    dots = list(chart.dots)
    if dots:
        max_s = max(d.s for d in dots)
        max_f = max(d.f for d in dots)
    else:
        max_s = max_f = 0
    bounds = chart.meta.get("bounds", {})
    max_s = max(max_s, bounds.get("max_s", 0))
    max_f = max(max_f, bounds.get("max_f_shown", 0))
    cells: dict[tuple[int, int], str] = {}
    for s in range(max_s + 1):
        for f in range(max_f + 1):
            here = [d for d in dots if (d.s, d.f) == (s, f)]
            if not here:
                cells[(s, f)] = "."
                continue
            nfree = sum(1 for d in here if d.torsion is None)
            tors = sorted(d.torsion for d in here if d.torsion is not None)
            cells[(s, f)] = str(nfree) + "".join(f"t{r}" for r in tors)
    width = max(max(len(v) for v in cells.values()), 3) + 1
    lines = []
    header = f"Ext({chart.meta.get('source', '?')}, {chart.meta.get('target', '?')})"
    lines.append(header)
    for f in range(max_f, -1, -1):
        row = f"{f:3d} |"
        for s in range(max_s + 1):
            row += cells[(s, f)].rjust(width)
        lines.append(row)
    lines.append("    +" + "-" * ((max_s + 1) * width))
    footer = "  f/s"
    for s in range(max_s + 1):
        footer += str(s).rjust(width)
    lines.append(footer)
    return "\n".join(lines) + "\n"


def _dot_xy(style: ChartStyle, max_f: int, d: Dot, offset: int, total: int):
    dx = 0.0
    if total > 1:
        dx = (offset - (total - 1) / 2) * 0.35
    x = style.margin + (d.s + dx) * style.unit
    y = style.margin + (max_f - d.f) * style.unit
    return x, y


def render_svg(chart: ExtChart, style: ChartStyle | None = None) -> str:
    """Deterministic SVG 1.1 rendering; dots carry their weight (and
    torsion) in a title element, so it shows on hover."""
    style = style or ChartStyle()
    dots = sorted(chart.dots, key=lambda d: d.key)
    max_s = max((d.s for d in dots), default=0)
    max_f = max((d.f for d in dots), default=0)
    groups: dict[tuple[int, int], list[Dot]] = {}
    for d in dots:
        groups.setdefault((d.s, d.f), []).append(d)
    place: dict[tuple, tuple[float, float]] = {}
    for (s, f), ds in sorted(groups.items()):
        for k, d in enumerate(ds):
            place[d.key] = _dot_xy(style, max_f, d, k, len(ds))
    w = style.margin * 2 + (max_s + 1) * style.unit
    h = style.margin * 2 + (max_f + 1) * style.unit
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{w}" height="{h}" viewBox="0 0 {w} {h}">'
    ]
    title = f"Ext({chart.meta.get('source', '?')}, {chart.meta.get('target', '?')})"
    out.append(f"<title>{title}</title>")
    # grid and axis labels
    for s in range(0, max_s + 1, 2):
        x = style.margin + s * style.unit
        out.append(
            f'<text x="{x}" y="{h - style.margin // 3}" font-size="12" '
            f'fill="{style.label_color}" text-anchor="middle">{s}</text>'
        )
    for f in range(0, max_f + 1, 2):
        y = style.margin + (max_f - f) * style.unit
        out.append(
            f'<text x="{style.margin // 3}" y="{y + 4}" font-size="12" '
            f'fill="{style.label_color}" text-anchor="middle">{f}</text>'
        )
    # edges under dots
    for e in sorted(chart.edges, key=lambda e: (e.src, e.dst, e.label)):
        if e.src not in place or e.dst not in place:
            continue
        x1, y1 = place[e.src]
        x2, y2 = place[e.dst]
        color = style.twist_color if e.tau_twist else style.edge_color
        out.append(
            f'<line x1="{x1:.1f}" y1="{y1:.1f}" x2="{x2:.1f}" y2="{y2:.1f}" '
            f'stroke="{color}" stroke-width="1.4"><title>{e.label}'
            f'{" (tau twist)" if e.tau_twist else ""}</title></line>'
        )
    # tower arrows: torsion dots with h1 leaving the window
    torsion_targets = {e.src for e in chart.edges if e.label == "h1"}
    for d in dots:
        if d.torsion is None:
            continue
        if d.key in torsion_targets:
            continue
        if d.s + 1 > max_s or d.f + 1 > max_f:
            x, y = place[d.key]
            out.append(
                f'<line x1="{x:.1f}" y1="{y:.1f}" x2="{x + 0.6 * style.unit:.1f}" '
                f'y2="{y - 0.6 * style.unit:.1f}" stroke="{style.tower_color}" '
                f'stroke-width="1.4" marker-end="url(#arrow)"/>'
            )
    out.append(
        '<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" '
        'markerWidth="6" markerHeight="6" orient="auto-start-reverse">'
        f'<path d="M 0 0 L 10 5 L 0 10 z" fill="{style.tower_color}"/></marker></defs>'
    )
    for d in dots:
        x, y = place[d.key]
        label = f"w={d.w}" + ("" if d.torsion is None else f", tau^{d.torsion} torsion")
        out.append(
            f'<circle cx="{x:.1f}" cy="{y:.1f}" r="{style.dot_radius}" '
            f'fill="{style.dot_fill(d.torsion)}"><title>({d.s}, {d.f}, {d.w}): '
            f"{label}</title></circle>"
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# golden charts


def load_golden(name: str) -> ExtChart:
    if name not in GOLDEN_NAMES:
        raise ValueError(f"unknown golden chart {name!r}; choose from {GOLDEN_NAMES}")
    text = (
        importlib.resources.files("motivic_ext")
        .joinpath(f"goldens/{name}.json")
        .read_text()
    )
    return ExtChart.from_json(text)


@dataclass
class GoldenDiff:
    missing_dots: list
    extra_dots: list
    missing_edges: list
    extra_edges: list

    @property
    def empty(self) -> bool:
        return not (
            self.missing_dots or self.extra_dots or self.missing_edges or self.extra_edges
        )

    def summary(self) -> str:
        if self.empty:
            return "empty diff: chart matches the golden data exactly"
        lines = ["chart differs from golden data:"]
        for name, items in (
            ("missing dots", self.missing_dots),
            ("extra dots", self.extra_dots),
            ("missing edges", self.missing_edges),
            ("extra edges", self.extra_edges),
        ):
            if items:
                lines.append(f"  {name}: {items}")
        return "\n".join(lines)


def compare_charts(chart: ExtChart, golden: ExtChart) -> GoldenDiff:
    """Exact, order-insensitive set comparison of dots and edges."""
    cd = set(chart.dot_multiset())
    gd = set(golden.dot_multiset())
    ce = set(chart.edge_multiset())
    ge = set(golden.edge_multiset())
    return GoldenDiff(
        missing_dots=sorted(gd - cd),
        extra_dots=sorted(cd - gd),
        missing_edges=sorted(ge - ce),
        extra_edges=sorted(ce - ge),
    )


def golden_compare(chart: ExtChart, figure: str) -> GoldenDiff:
    """Compare a computed chart against a transcribed figure chart.

    The chart bounds must cover the figure's range (s <= 12, f <= 7);
    the comparison restricts to that window.
    """
    golden = load_golden(figure)
    gb = golden.meta["bounds"]
    window = chart.restricted(gb["max_s"], gb["max_f"])
    return compare_charts(window, golden)
