"""
Experiment Configuration

A flat YAML mapping whose keys are exactly the ExperimentConfig fields:

    designs:        ["etf:pairs=16", "orthogonal:120", "simplex:120"]
    k_values:       [1, 2, 3]
    trials:         50000
    per_dim_energy: 1.0
    sigma2:         1.0
    p_fa_max:       0.001
    tau_points:     512
    tau_min:        0.0
    tau_max:        null      # 1 + mu of each design
    master_seed:    null      # drawn from entropy and recorded
    workers:        1

Design sources:
    etf:pairs=<v>           Steiner ETF from the (2,2,v) system, Sylvester Hadamard
    etf:incidence=<path>    Steiner ETF from an incidence file
    orthogonal:<N>          identity
    simplex:<N>             regular simplex with N + 1 users
    file:<path>             design matrix file

Relative paths resolve against the directory of the config file.
"""

import dataclasses
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from etf_fingerprinting.core.designs import (
    etf_from_incidence,
    orthogonal_design,
    simplex_design,
    steiner_pairs_incidence,
)
from etf_fingerprinting.core.errors import ParseError, ValidationError
from etf_fingerprinting.core.formats import load_design, load_steiner_incidence
from etf_fingerprinting.core.validators import (
    require_finite_inputs,
    require_int,
    require_positive,
)
from etf_fingerprinting.experiment.seeding import MASK64

logger = logging.getLogger(__name__)

_CONFIGS_DIR = Path(__file__).resolve().parent.parent / "configs"

DESIGN_SOURCE_KINDS = ("etf", "orthogonal", "simplex", "file")


# =============================================================================
# Design sources
# =============================================================================

@dataclass(frozen=True)
class DesignSource:
    kind: str
    argument: str
    text: str


def parse_design_source(text):
    """Split ``kind:argument`` and check the argument's shape."""
    if not isinstance(text, str):
        raise ParseError(f"design source must be a string, got {type(text).__name__}")
    kind, sep, argument = text.strip().partition(":")
    if not sep or not argument:
        raise ParseError(f"design source {text!r} must look like '<kind>:<argument>'")
    if kind not in DESIGN_SOURCE_KINDS:
        raise ParseError(f"unknown design source kind {kind!r}, expected one of {DESIGN_SOURCE_KINDS}")
    if kind == "etf":
        key, eq, value = argument.partition("=")
        if not eq or key not in ("pairs", "incidence") or not value:
            raise ParseError(f"etf source {text!r} must be 'etf:pairs=<v>' or 'etf:incidence=<path>'")
        if key == "pairs" and not value.isdigit():
            raise ParseError(f"etf:pairs needs an integer point count, got {value!r}")
    elif kind in ("orthogonal", "simplex") and not argument.isdigit():
        raise ParseError(f"{kind} source needs an integer dimension, got {argument!r}")
    return DesignSource(kind=kind, argument=argument, text=text.strip())


def _resolve(path, base_dir):
    path = Path(path)
    if not path.is_absolute() and base_dir is not None:
        path = Path(base_dir) / path
    return path


def source_inputs(source, base_dir=None):
    """Files a design source reads (for manifest digests)."""
    if source.kind == "file":
        return [_resolve(source.argument, base_dir)]
    if source.kind == "etf" and source.argument.startswith("incidence="):
        return [_resolve(source.argument.partition("=")[2], base_dir)]
    return []


def build_design(source, base_dir=None):
    """Construct or load the DesignMatrix a source describes."""
    if isinstance(source, str):
        source = parse_design_source(source)
    if source.kind == "orthogonal":
        return orthogonal_design(int(source.argument))
    if source.kind == "simplex":
        return simplex_design(int(source.argument))
    if source.kind == "file":
        return load_design(_resolve(source.argument, base_dir))
    key, _, value = source.argument.partition("=")
    if key == "pairs":
        incidence = steiner_pairs_incidence(int(value))
    else:
        incidence = load_steiner_incidence(_resolve(value, base_dir))
    return etf_from_incidence(incidence)


# =============================================================================
# Experiment config
# =============================================================================

@dataclass(frozen=True)
class ExperimentConfig:
    designs: tuple
    k_values: tuple
    trials: int = 50_000
    per_dim_energy: float = 1.0
    sigma2: float = 1.0
    p_fa_max: float = 1e-3
    tau_points: int = 512
    tau_min: float = 0.0
    tau_max: Optional[float] = None
    master_seed: Optional[int] = None
    workers: int = 1
    base_dir: Optional[Path] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        designs = self.designs
        if isinstance(designs, str) or not designs:
            raise ValidationError("designs must be a nonempty list of design sources")
        for text in designs:
            parse_design_source(text)
        object.__setattr__(self, "designs", tuple(str(d).strip() for d in designs))

        k_values = self.k_values
        if isinstance(k_values, (int, str)) or not k_values:
            raise ValidationError("k_values must be a nonempty list of coalition sizes")
        ks = sorted({require_int(k, "k_values entry", minimum=1) for k in k_values})
        object.__setattr__(self, "k_values", tuple(ks))

        object.__setattr__(self, "trials", require_int(self.trials, "trials", minimum=1))
        object.__setattr__(self, "per_dim_energy", require_positive(self.per_dim_energy, "per_dim_energy"))
        object.__setattr__(self, "sigma2", require_positive(self.sigma2, "sigma2", strict=False))
        p_fa_max = require_positive(self.p_fa_max, "p_fa_max")
        if p_fa_max > 1.0:
            raise ValidationError(f"p_fa_max must lie in (0, 1], got {p_fa_max}")
        object.__setattr__(self, "p_fa_max", p_fa_max)
        object.__setattr__(self, "tau_points", require_int(self.tau_points, "tau_points", minimum=1))
        require_finite_inputs({"tau_min": self.tau_min})
        object.__setattr__(self, "tau_min", float(self.tau_min))
        if self.tau_max is not None:
            require_finite_inputs({"tau_max": self.tau_max})
            object.__setattr__(self, "tau_max", float(self.tau_max))
            if self.tau_points > 1 and self.tau_max <= self.tau_min:
                raise ValidationError(
                    f"tau_max={self.tau_max} must exceed tau_min={self.tau_min}"
                )
        if self.master_seed is not None:
            object.__setattr__(self, "master_seed",
                               require_int(self.master_seed, "master_seed", minimum=0, maximum=MASK64))
        object.__setattr__(self, "workers", require_int(self.workers, "workers", minimum=1))

    def tau_grid(self, mu):
        """Evenly spaced thresholds over [tau_min, tau_max or 1 + mu]."""
        stop = self.tau_max if self.tau_max is not None else 1.0 + float(mu)
        if self.tau_points > 1 and stop <= self.tau_min:
            raise ValidationError(f"tau grid upper end {stop} must exceed tau_min={self.tau_min}")
        return np.linspace(self.tau_min, stop, self.tau_points)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        data = {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if f.name != "base_dir"}
        data["designs"] = list(self.designs)
        data["k_values"] = list(self.k_values)
        return data

    @classmethod
    def from_mapping(cls, data, base_dir=None):
        if not isinstance(data, dict):
            raise ParseError("experiment config must be a YAML mapping")
        known = {f.name for f in dataclasses.fields(cls)} - {"base_dir"}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError(f"unknown config keys: {', '.join(unknown)}")
        missing = [key for key in ("designs", "k_values") if key not in data]
        if missing:
            raise ValidationError(f"config is missing required keys: {', '.join(missing)}")
        return cls(**data, base_dir=base_dir)


# =============================================================================
# Loading and presets
# =============================================================================

def list_presets():
    """Names of the bundled config files."""
    return sorted(p.stem for p in _CONFIGS_DIR.glob("*.yaml"))


def preset_path(name):
    path = _CONFIGS_DIR / f"{name}.yaml"
    if not path.is_file():
        raise ValidationError(f"unknown preset {name!r}; available: {', '.join(list_presets())}")
    return path


def load_config(source):
    """
    Load a config from a YAML file path or a bundled preset name.

    Preset configs resolve relative paths against the caller's working
    directory; file configs against their own directory.
    """
    path = Path(source)
    if path.is_file():
        base_dir = path.resolve().parent
    else:
        path = preset_path(str(source))
        base_dir = None
    with open(path, "r", encoding="utf-8") as handle:
        try:
            data = yaml.safe_load(handle)
        except yaml.YAMLError as exc:
            raise ParseError(f"{path}: invalid YAML ({exc})")
    cfg = ExperimentConfig.from_mapping(data, base_dir=base_dir)
    logger.info("loaded config %s: %d designs, K=%s", path, len(cfg.designs), list(cfg.k_values))
    return cfg
