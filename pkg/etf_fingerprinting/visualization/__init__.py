"""
Terminal and SVG renderings of experiment results.
"""

from .ascii_charts import (
    draw_curve_bars,
    draw_detection_matrix,
    draw_experiment_summary,
)

__all__ = [
    "draw_curve_bars",
    "draw_detection_matrix",
    "draw_experiment_summary",
]
