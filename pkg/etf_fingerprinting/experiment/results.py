"""
Results CSV and run manifests.

CSV: header ``design,N,M,K,trials,tau,p_fa,p_d,seed``, one row per
(design, K) in config order then K ascending, decimals with 6 significant
digits, ``nan`` for the tau and p_d of infeasible rows.

Manifest: ``<output>.manifest.yaml`` next to every produced file with the
command, resolved config, sha256 of every input, master seed, package
version and UTC timestamp.
"""

import csv
import io
import logging
import math
from datetime import datetime, timezone
from pathlib import Path

import yaml

from etf_fingerprinting.core.errors import ParseError
from etf_fingerprinting.core.formats import atomic_write_text, file_digest

logger = logging.getLogger(__name__)

CSV_HEADER = ("design", "N", "M", "K", "trials", "tau", "p_fa", "p_d", "seed")

_INT_COLUMNS = ("N", "M", "K", "trials", "seed")
_FLOAT_COLUMNS = ("tau", "p_fa", "p_d")


def _fmt(value):
    value = float(value)
    return "nan" if math.isnan(value) else f"{value:.6g}"


def results_csv_text(curves):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for curve in curves:
        for pt in sorted(curve.points, key=lambda p: p.K):
            writer.writerow([pt.design, pt.N, pt.M, pt.K, pt.trials,
                             _fmt(pt.tau), _fmt(pt.p_fa), _fmt(pt.p_d), pt.seed])
    return buffer.getvalue()


def write_results_csv(curves, path):
    atomic_write_text(path, results_csv_text(curves))
    logger.info("wrote %d curves to %s", len(curves), path)


def read_results_csv(path):
    """
    Parse a results CSV into a list of row dicts with typed values.

    Raises:
        ParseError: Wrong header, wrong column count or unparsable values
    """
    with open(path, "r", encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: results file is empty")
        if tuple(header) != CSV_HEADER:
            raise ParseError(f"{path}: header must be {','.join(CSV_HEADER)}")
        rows = []
        for lineno, record in enumerate(reader, start=2):
            if not record:
                continue
            if len(record) != len(CSV_HEADER):
                raise ParseError(f"{path}:{lineno}: expected {len(CSV_HEADER)} columns")
            row = dict(zip(CSV_HEADER, record))
            try:
                for key in _INT_COLUMNS:
                    row[key] = int(row[key])
                for key in _FLOAT_COLUMNS:
                    row[key] = float(row[key])
            except ValueError:
                raise ParseError(f"{path}:{lineno}: malformed value in {record}")
            rows.append(row)
    return rows


# =============================================================================
# Run manifests
# =============================================================================

def manifest_path(output):
    output = Path(output)
    return output.with_name(output.name + ".manifest.yaml")


def build_manifest(command, config, inputs, master_seed, version):
    return {
        "command": command,
        "config": config,
        "inputs": {str(p): file_digest(p) for p in inputs},
        "master_seed": master_seed,
        "version": version,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def write_manifest(output, command, config, inputs=(), master_seed=None, version=None):
    """Write ``<output>.manifest.yaml`` and return its path."""
    if version is None:
        from etf_fingerprinting import __version__ as version
    manifest = build_manifest(command, config, inputs, master_seed, version)
    path = manifest_path(output)
    atomic_write_text(path, yaml.safe_dump(manifest, sort_keys=False))
    return path
