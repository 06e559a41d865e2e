"""
ASCII charts for terminal reports.
Plain characters only, so output survives logs and CI consoles.
"""

import math
from typing import Dict, List, Optional


def _fmt_probability(p: float) -> str:
    return "  --  " if p is None or math.isnan(p) else f"{p:0.3f}"


def draw_detection_matrix(
    results: Dict[str, Dict[int, float]],
    k_values: Optional[List[int]] = None
) -> str:
    """
    Draw a P_d table with one row per coalition size and one column per design.

    results: {design: {K: p_d}}

    The last column flags how far the designs disagree at each K:
    [ok] under 0.05, [~] under 0.15, [!] otherwise.
    """
    designs = list(results.keys())
    if not k_values:
        k_values = sorted({k for series in results.values() for k in series})

    k_width = 6
    col_width = max([12] + [len(d) + 2 for d in designs])

    lines = ["", "  DETECTION PROBABILITY P_d BY COALITION SIZE", ""]
    header = "  " + "K".ljust(k_width)
    for design in designs:
        header += design.center(col_width)
    lines.append(header)
    lines.append("  " + "-" * (k_width + len(designs) * col_width))

    for K in k_values:
        row = "  " + str(K).ljust(k_width)
        finite = []
        for design in designs:
            p = results.get(design, {}).get(K, math.nan)
            if not math.isnan(p):
                finite.append(p)
            row += _fmt_probability(p).center(col_width)

        if len(finite) >= 2:
            spread = max(finite) - min(finite)
            row += "  [ok]" if spread < 0.05 else "  [~]" if spread < 0.15 else "  [!]"
        lines.append(row)

    lines.append("")
    return "\n".join(lines)


def draw_curve_bars(
    k_values: List[int],
    p_d: List[float],
    title: str = "",
    width: int = 40
) -> str:
    """Horizontal bar per K; infeasible points are marked (infeasible)."""
    lines = ["", f"  P_d vs K  {title}".rstrip(), "  " + "=" * (width + 16), ""]
    label_width = max(len(str(k)) for k in k_values) if k_values else 1
    for K, p in zip(k_values, p_d):
        label = f"K={str(K).rjust(label_width)}"
        if p is None or math.isnan(p):
            lines.append(f"  {label} [{'.' * width}] (infeasible)")
            continue
        filled = min(width, int(round(p * width)))
        bar = "#" * filled + "." * (width - filled)
        lines.append(f"  {label} [{bar}] {p:.3f}")
    lines.extend(["", "  " + "=" * (width + 16)])
    return "\n".join(lines)


def draw_experiment_summary(curves) -> str:
    """Detection matrix plus one bar chart per design for run_experiment output."""
    results = {c.design: {pt.K: pt.p_d for pt in c.points} for c in curves}
    parts = [draw_detection_matrix(results)]
    for c in curves:
        parts.append(draw_curve_bars([pt.K for pt in c.points], c.p_d(),
                                     title=f"{c.design} (N={c.N}, M={c.M})"))
    return "\n".join(parts)
