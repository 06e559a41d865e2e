"""
Input Validation Utilities

Shared argument checks used across designs, channel, detection, analysis
and the experiment harness:
- Finite/positive number checks
- Integer and index range checks
- Collusion weight validation (nonnegative, bounded by one, summing to one)
- Probability clamping
"""

import math
import numbers

import numpy as np

from etf_fingerprinting.core.errors import DimensionError, DomainError, ValidationError

# Tolerance on sum(alpha) == 1 for collusion weights
WEIGHT_SUM_TOL = 1e-9

# Default tolerance for structural checks on constructed designs
DEFAULT_TOL = 1e-10


def require_finite_inputs(values):
    """
    Ensure required inputs are present and finite numbers.

    Args:
        values: Dict or iterable of (name, value) pairs

    Raises:
        DomainError: If any value is None or not finite
        TypeError: If any value is not a number
    """
    items = values.items() if isinstance(values, dict) else values
    for name, value in items:
        if value is None:
            raise DomainError(f"{name} is required and cannot be None")
        try:
            val = float(value)
        except (TypeError, ValueError):
            raise TypeError(f"{name} must be a number, got {type(value).__name__}")
        if not math.isfinite(val):
            raise DomainError(f"{name} must be a finite number")


def require_positive(value, name, strict=True):
    """Return ``value`` as float after checking it is finite and > 0 (>= 0 if not strict)."""
    require_finite_inputs({name: value})
    val = float(value)
    if strict and val <= 0:
        raise DomainError(f"{name} must be positive, got {val}")
    if not strict and val < 0:
        raise DomainError(f"{name} must be nonnegative, got {val}")
    return val


def require_int(value, name, minimum=None, maximum=None):
    """
    Coerce an integral value to int and check its range.

    Floats are accepted only when they hold an exact integer; bools are rejected.
    """
    if isinstance(value, bool) or not isinstance(value, (numbers.Integral, float)):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if isinstance(value, float):
        if not value.is_integer():
            raise DomainError(f"{name} must be an integer, got {value}")
    ival = int(value)
    if minimum is not None and ival < minimum:
        raise DomainError(f"{name} must be >= {minimum}, got {ival}")
    if maximum is not None and ival > maximum:
        raise DomainError(f"{name} must be <= {maximum}, got {ival}")
    return ival


def require_index(m, M, name="m"):
    """Check a zero-based user index against the user count M."""
    return require_int(m, name, minimum=0, maximum=M - 1)


def as_vector(values, name, length=None):
    """
    Convert to a finite 1-D float64 array, optionally checking its length.

    Raises:
        DimensionError: On wrong dimensionality or length
        DomainError: On NaN/inf entries
    """
    vec = np.asarray(values, dtype=float)
    if vec.ndim != 1:
        raise DimensionError(f"{name} must be one-dimensional, got shape {vec.shape}")
    if length is not None and vec.shape[0] != length:
        raise DimensionError(f"{name} has length {vec.shape[0]}, expected {length}")
    if not np.all(np.isfinite(vec)):
        raise DomainError(f"{name} must contain only finite entries")
    return vec


def validate_weights(coalition, weights, tol=WEIGHT_SUM_TOL):
    """
    Validate linear-averaging weights for a coalition.

    Args:
        coalition: Iterable of user indices
        weights: Mapping user index -> alpha_k
        tol: Allowed deviation of sum(alpha) from 1

    Returns:
        dict: {user: float weight} with keys in ascending user order

    Raises:
        DomainError: Empty coalition, negative weights or weights above one
        ValidationError: Key mismatch or weight-sum violation
    """
    members = sorted({int(k) for k in coalition})
    if not members:
        raise DomainError("coalition must contain at least one user")
    keys = sorted(int(k) for k in weights)
    if keys != members:
        raise ValidationError(
            f"weight keys {keys} must equal coalition members {members}"
        )

    validated = {}
    for k in members:
        raw = weights[k] if k in weights else weights[str(k)]
        require_finite_inputs({f"weights[{k}]": raw})
        w = float(raw)
        if w < 0 or w > 1:
            raise DomainError(f"weights[{k}] must lie in [0, 1], got {w}")
        validated[k] = w

    total = math.fsum(validated.values())
    if abs(total - 1.0) > tol:
        raise ValidationError(f"weights must sum to 1 (got {total:.12g})")
    return validated


def clamp_probability(value):
    """Clamp a probability into [0, 1]; NaN passes through."""
    val = float(value)
    if math.isnan(val):
        return val
    return float(np.clip(val, 0.0, 1.0))
