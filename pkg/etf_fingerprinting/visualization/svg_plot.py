"""
Static SVG rendering of P_d-vs-K curves from a results CSV.

One line per design, tagged with the SVG group id ``series-<design>``.
Infeasible points (NaN) break the line. Requires the ``plot`` extra
(matplotlib); rendering uses the SVG backend on a
standalone Figure, so no global pyplot state is touched.
"""

import io
import logging
import math
from collections import OrderedDict

from etf_fingerprinting.core.formats import atomic_write_text

logger = logging.getLogger(__name__)

_GOLDEN_RATIO = (math.sqrt(5) - 1.0) / 2.0


def series_from_rows(rows):
    """Group CSV rows into {design: (K list, P_d list)} keeping first-seen design order."""
    series = OrderedDict()
    for row in rows:
        ks, pds = series.setdefault(row["design"], ([], []))
        ks.append(int(row["K"]))
        pds.append(float(row["p_d"]))
    return series


def render_curves_svg(rows, title=None, width=8.0):
    """Return SVG text for the P_d-vs-K curves in ``rows``."""
    import matplotlib
    from matplotlib.figure import Figure
    from matplotlib.ticker import MaxNLocator

    series = series_from_rows(rows)
    with matplotlib.rc_context({"svg.hashsalt": "etf-fingerprinting", "svg.fonttype": "none"}):
        fig = Figure(figsize=(width, width * _GOLDEN_RATIO))
        ax = fig.add_subplot(1, 1, 1)
        for design, (ks, pds) in series.items():
            ax.plot(ks, pds, marker="o", label=design, gid=f"series-{design}")
        ax.set_xlabel("number of colluders K")
        ax.set_ylabel("probability of detection P_d")
        ax.set_ylim(-0.02, 1.02)
        ax.xaxis.set_major_locator(MaxNLocator(integer=True))
        ax.grid(True, alpha=0.3)
        if title:
            ax.set_title(title)
        if series:
            ax.legend(loc="best")

        buffer = io.BytesIO()
        fig.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue().decode("utf-8")


def write_curves_svg(rows, path, title=None):
    text = render_curves_svg(rows, title=title)
    atomic_write_text(path, text)
    logger.info("wrote SVG plot with %d series to %s", len(series_from_rows(rows)), path)
