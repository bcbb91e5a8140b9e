"""Deterministic CSV, JSON, and SVG emitters for reports.

Identical payloads produce byte-identical output: field order is fixed,
floats are printed at 4 significant digits, and the SVG is assembled from
plain strings with no timestamps or generated ids.
"""

import json
import math
from typing import Optional, Sequence

from .errors import UnsupportedFormat
from .sim import SimResult

FORMATS = ("csv", "json", "svg")

ROOFLINE_CSV_HEADER = (
    "oi_flops_per_byte", "roofline_gops", "point_label", "point_oi",
    "point_gops", "bound",
)


def sig4(value) -> str:
    """Fixed 4-significant-digit rendering used for all numeric output."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    return f"{value:.4g}"


def _round4(value: float) -> float:
    if value == 0 or not math.isfinite(value):
        return value
    return float(f"{value:.4g}")


def _roundtree(payload):
    if isinstance(payload, float):
        return _round4(payload)
    if isinstance(payload, dict):
        return {k: _roundtree(v) for k, v in payload.items()}
    if isinstance(payload, (list, tuple)):
        return [_roundtree(v) for v in payload]
    return payload


def emit_json(payload) -> bytes:
    return (json.dumps(_roundtree(payload), indent=2) + "\n").encode("utf-8")


def emit_csv(header: Sequence[str], rows: Sequence[Sequence]) -> bytes:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if cell is None:
                cells.append("")
            elif isinstance(cell, str):
                cells.append(cell)
            else:
                cells.append(sig4(cell))
        lines.append(",".join(cells))
    return ("\n".join(lines) + "\n").encode("utf-8")


def roofline_rows_to_csv(rows: Sequence[dict]) -> bytes:
    return emit_csv(
        ROOFLINE_CSV_HEADER,
        [[row[key] for key in ROOFLINE_CSV_HEADER] for row in rows],
    )


def sim_result_payload(result: SimResult) -> dict:
    scenario = result.scenario
    return {
        "platform": scenario.platform_id,
        "network": scenario.network_id,
        "components": list(scenario.engaged),
        "frames": scenario.frame_count,
        "dispatch_overhead_s": scenario.dispatch_overhead_s,
        "contention": dict(sorted(scenario.contention.items())),
        "makespan_s": result.makespan_s,
        "throughput_imgs_per_s": result.throughput,
        "frames_per_component": dict(sorted(result.frames_per_component.items())),
        "composition": dict(sorted(result.composition.items())),
        "busy_time_s": dict(sorted(result.busy_time_s.items())),
        "energy_j": result.energy_j,
        "energy_efficiency_imgs_per_j": result.energy_efficiency,
        "reorder_high_water": result.reorder_high_water,
    }


def sim_result_to_csv(result: SimResult) -> bytes:
    header = ("component", "frames", "share", "busy_s", "energy_j")
    rows = []
    from .dataset import platform_by_id

    platform = platform_by_id(result.scenario.platform_id)
    for comp_id in sorted(result.frames_per_component):
        power = platform.component(comp_id).active_power_w
        rows.append([
            comp_id,
            result.frames_per_component[comp_id],
            result.composition[comp_id],
            result.busy_time_s[comp_id],
            power * result.busy_time_s[comp_id],
        ])
    rows.append([
        "total",
        result.scenario.frame_count,
        1.0,
        result.makespan_s,
        result.energy_j,
    ])
    return emit_csv(header, rows)


def emit_svg_roofline(rows: Sequence[dict], title: str,
                      width: int = 720, height: int = 480) -> bytes:
    """Log-log roofline plot as a standalone SVG."""
    line = [(r["oi_flops_per_byte"], r["roofline_gops"])
            for r in rows if r["point_label"] is None]
    points = [(r["point_oi"], r["point_gops"], r["point_label"], r["bound"])
              for r in rows if r["point_label"] is not None]
    if not line:
        raise UnsupportedFormat("roofline SVG needs at least the grid rows")

    xs = [x for x, _ in line] + [p[0] for p in points]
    ys = [y for _, y in line] + [p[1] for p in points]
    lo_x, hi_x = min(xs), max(xs)
    lo_y, hi_y = min(ys) * 0.5, max(ys) * 2.0
    margin = 56

    def px(x: float) -> float:
        span = math.log10(hi_x) - math.log10(lo_x) or 1.0
        return margin + (math.log10(x) - math.log10(lo_x)) / span * (width - 2 * margin)

    def py(y: float) -> float:
        span = math.log10(hi_y) - math.log10(lo_y) or 1.0
        return height - margin - (math.log10(y) - math.log10(lo_y)) / span * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
        f'<text x="{width / 2:.1f}" y="{height - 12}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12">'
        f'operational intensity (FLOPS/byte, log)</text>',
        f'<text x="16" y="{height / 2:.1f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="12" '
        f'transform="rotate(-90 16 {height / 2:.1f})">'
        f'performance (GOPS/s, log)</text>',
        f'<rect x="{margin}" y="{margin}" width="{width - 2 * margin}" '
        f'height="{height - 2 * margin}" fill="none" stroke="#888"/>',
    ]
    path = " ".join(
        f"{'M' if i == 0 else 'L'}{px(x):.2f},{py(y):.2f}"
        for i, (x, y) in enumerate(line)
    )
    parts.append(f'<path d="{path}" fill="none" stroke="#1f3b99" stroke-width="2"/>')
    for oi, gops, label, bound in points:
        color = "#b22222" if bound == "memory" else "#1a7a1a"
        parts.append(
            f'<circle cx="{px(oi):.2f}" cy="{py(gops):.2f}" r="4" '
            f'fill="{color}"/>'
        )
        parts.append(
            f'<text x="{px(oi) + 6:.2f}" y="{py(gops) - 6:.2f}" '
            f'font-family="sans-serif" font-size="10">{label}</text>'
        )
    parts.append("</svg>")
    return ("\n".join(parts) + "\n").encode("utf-8")


def emit(payload, fmt: str, title: Optional[str] = None) -> bytes:
    """Render a payload in the requested format.

    Roofline series (lists of plot-table rows) support csv, json, and svg;
    simulation results and generic table payloads support csv and json.
    """
    if fmt not in FORMATS:
        raise UnsupportedFormat(f"unknown format {fmt!r}; expected {FORMATS}")
    if isinstance(payload, SimResult):
        if fmt == "json":
            return emit_json(sim_result_payload(payload))
        if fmt == "csv":
            return sim_result_to_csv(payload)
        raise UnsupportedFormat("simulation results render as csv or json, not svg")
    if isinstance(payload, list) and payload and isinstance(payload[0], dict) \
            and "oi_flops_per_byte" in payload[0]:
        if fmt == "csv":
            return roofline_rows_to_csv(payload)
        if fmt == "json":
            return emit_json(payload)
        return emit_svg_roofline(payload, title or "roofline")
    if fmt == "json":
        return emit_json(payload)
    if fmt == "csv" and isinstance(payload, dict) and "header" in payload:
        return emit_csv(payload["header"], payload["rows"])
    raise UnsupportedFormat(f"cannot render {type(payload).__name__} as {fmt}")
