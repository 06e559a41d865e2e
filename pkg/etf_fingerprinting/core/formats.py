"""
Text File Formats

Incidence:  first line ``steiner v=<v> k=<k> b=<b>``, then b lines of v
            space-separated 0/1 digits.
Design:     first line ``design kind=<kind> N=<N> M=<M>``, then N lines of M
            space-separated decimals written with 17 significant digits.
Vector:     first line ``vector N=<N>``, then one line of N decimals.
Hadamard:   first line ``hadamard n=<n>``, then n lines of n values +1/-1.
Attack:     flat YAML mapping with ``coalition``, optional ``weights``
            (user -> alpha, uniform when omitted), ``sigma2`` and ``seed``.

Every writer goes through atomic_write_text: a temporary file in the target
directory followed by os.replace, so an interrupted run never leaves a
truncated artifact.
"""

import hashlib
import logging
import os
import tempfile
from pathlib import Path

import numpy as np
import yaml

from etf_fingerprinting.core.designs import (
    DESIGN_KINDS,
    check_hadamard,
    check_steiner,
    make_design,
)
from etf_fingerprinting.core.errors import ParseError, ValidationError
from etf_fingerprinting.core.validators import DEFAULT_TOL

logger = logging.getLogger(__name__)


def format_float(x):
    """Round-trippable decimal with 17 significant digits."""
    return f"{float(x):.17g}"


def atomic_write_text(path, text):
    """Write text to path via a same-directory temp file and os.replace."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    logger.debug("wrote %s (%d bytes)", path, len(text))


def file_digest(path):
    """sha256 hex digest of a file's bytes."""
    digest = hashlib.sha256()
    with open(path, "rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


# =============================================================================
# Header parsing
# =============================================================================

def _read_lines(path):
    with open(path, "r", encoding="utf-8") as handle:
        lines = [line.strip() for line in handle]
    lines = [line for line in lines if line]
    if not lines:
        raise ParseError(f"{path}: file is empty")
    return lines


def _parse_header(line, keyword, keys, path):
    """Parse ``<keyword> key=value ...`` into a dict of strings."""
    tokens = line.split()
    if not tokens or tokens[0] != keyword:
        raise ParseError(f"{path}: header must start with '{keyword}', got {line!r}")
    fields = {}
    for token in tokens[1:]:
        name, sep, value = token.partition("=")
        if not sep or not value:
            raise ParseError(f"{path}: malformed header field {token!r}")
        fields[name] = value
    missing = [k for k in keys if k not in fields]
    if missing:
        raise ParseError(f"{path}: header is missing {', '.join(missing)}")
    return fields


def _header_int(fields, key, path):
    try:
        value = int(fields[key])
    except ValueError:
        raise ParseError(f"{path}: header field {key}={fields[key]!r} is not an integer")
    if value < 0:
        raise ParseError(f"{path}: header field {key} must be nonnegative")
    return value


def _parse_rows(rows, width, path, converter=float):
    parsed = []
    for lineno, row in enumerate(rows, start=2):
        parts = row.split()
        if len(parts) != width:
            raise ParseError(f"{path}:{lineno}: expected {width} values, got {len(parts)}")
        try:
            parsed.append([converter(p) for p in parts])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: non-numeric value in {row!r}")
    return parsed


# =============================================================================
# Steiner incidence
# =============================================================================

def _zero_one(token):
    if token not in ("0", "1"):
        raise ValueError(token)
    return int(token)


def load_steiner_incidence(path):
    """
    Read an incidence file and re-verify every Steiner invariant.

    Raises:
        ParseError: Empty file, bad header, row count/width mismatch, non-0/1 digits
        ValidationError: Steiner property violated (names the offending point pair)
    """
    lines = _read_lines(path)
    fields = _parse_header(lines[0], "steiner", ("v", "k", "b"), path)
    v, k, b = (_header_int(fields, key, path) for key in ("v", "k", "b"))
    rows = lines[1:]
    if len(rows) != b:
        raise ParseError(f"{path}: header declares b={b} blocks, found {len(rows)} rows")
    entries = np.array(_parse_rows(rows, v, path, converter=_zero_one), dtype=np.uint8)
    if entries.size == 0:
        raise ParseError(f"{path}: incidence has no entries")
    incidence = check_steiner(entries, k=k)
    logger.info("loaded Steiner incidence v=%d k=%d b=%d from %s", v, k, b, path)
    return incidence


def save_steiner_incidence(A, path):
    lines = [f"steiner v={A.v} k={A.k} b={A.b}"]
    lines += [" ".join(str(int(x)) for x in row) for row in A.entries]
    atomic_write_text(path, "\n".join(lines) + "\n")


# =============================================================================
# Hadamard matrices
# =============================================================================

def _plus_minus_one(token):
    value = int(token)
    if value not in (1, -1):
        raise ValueError(token)
    return value


def load_hadamard(path):
    """Read a Hadamard matrix file; row orthogonality is re-verified."""
    lines = _read_lines(path)
    fields = _parse_header(lines[0], "hadamard", ("n",), path)
    n = _header_int(fields, "n", path)
    rows = lines[1:]
    if len(rows) != n:
        raise ParseError(f"{path}: header declares n={n} rows, found {len(rows)}")
    return check_hadamard(np.array(_parse_rows(rows, n, path, converter=_plus_minus_one)))


def save_hadamard(H, path):
    lines = [f"hadamard n={H.order}"]
    lines += [" ".join(str(int(x)) for x in row) for row in H.entries]
    atomic_write_text(path, "\n".join(lines) + "\n")


# =============================================================================
# Design matrices
# =============================================================================

def save_design(F, path):
    lines = [f"design kind={F.kind} N={F.N} M={F.M}"]
    lines += [" ".join(format_float(x) for x in row) for row in F.matrix]
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_design(path, tol=DEFAULT_TOL):
    """
    Read a design matrix file; unit norm is re-verified and coherence recomputed.

    A header kind whose shape invariant does not hold raises ValidationError.
    """
    lines = _read_lines(path)
    fields = _parse_header(lines[0], "design", ("kind", "N", "M"), path)
    kind = fields["kind"]
    if kind not in DESIGN_KINDS:
        raise ParseError(f"{path}: unknown design kind {kind!r}")
    N, M = _header_int(fields, "N", path), _header_int(fields, "M", path)
    rows = lines[1:]
    if len(rows) != N:
        raise ParseError(f"{path}: header declares N={N} rows, found {len(rows)}")
    design = make_design(kind, np.array(_parse_rows(rows, M, path)), tol=tol)
    logger.info("loaded %s design N=%d M=%d from %s", kind, N, M, path)
    return design


# =============================================================================
# Vectors (host signals, forgeries, statistics)
# =============================================================================

def save_vector(values, path):
    vec = np.asarray(values, dtype=float).ravel()
    text = f"vector N={vec.size}\n" + " ".join(format_float(x) for x in vec) + "\n"
    atomic_write_text(path, text)


def load_vector(path):
    lines = _read_lines(path)
    fields = _parse_header(lines[0], "vector", ("N",), path)
    N = _header_int(fields, "N", path)
    body = " ".join(lines[1:])
    rows = _parse_rows([body], N, path) if N else [[]]
    vec = np.array(rows[0], dtype=float)
    if not np.all(np.isfinite(vec)):
        raise ParseError(f"{path}: vector entries must be finite")
    return vec


# =============================================================================
# Attack specifications
# =============================================================================

def load_attack_spec(path):
    """
    Read an attack YAML file into an AttackSpec.

    Example::

        coalition: [0, 3, 7]
        weights: {0: 0.5, 3: 0.25, 7: 0.25}
        sigma2: 1.0
        seed: 12345
    """
    from etf_fingerprinting.core.channel import AttackSpec

    with open(path, "r", encoding="utf-8") as handle:
        try:
            data = yaml.safe_load(handle)
        except yaml.YAMLError as exc:
            raise ParseError(f"{path}: invalid YAML ({exc})")
    if not isinstance(data, dict):
        raise ParseError(f"{path}: attack spec must be a YAML mapping")
    unknown = set(data) - {"coalition", "weights", "sigma2", "seed"}
    if unknown:
        raise ValidationError(f"{path}: unknown attack keys {sorted(unknown)}")
    if "coalition" not in data:
        raise ParseError(f"{path}: 'coalition' is required")

    coalition = data["coalition"]
    if not isinstance(coalition, list):
        raise ParseError(f"{path}: 'coalition' must be a list of user indices")
    weights = data.get("weights")
    if weights is None:
        weights = {int(k): 1.0 / len(coalition) for k in coalition} if coalition else {}
    elif not isinstance(weights, dict):
        raise ParseError(f"{path}: 'weights' must map user index to weight")
    return AttackSpec(
        coalition=tuple(coalition),
        weights={int(k): w for k, w in weights.items()},
        sigma2=data.get("sigma2", 0.0),
        seed=data.get("seed", 0),
    )


def save_attack_spec(spec, path):
    data = {
        "coalition": list(spec.coalition),
        "weights": {k: float(w) for k, w in spec.weights.items()},
        "sigma2": float(spec.sigma2),
        "seed": int(spec.seed),
    }
    atomic_write_text(path, yaml.safe_dump(data, sort_keys=False))
