"""
Monte Carlo Threshold Sweep

For every coalition size K and trial t:
    1. seed a Generator from (master_seed, K, t)
    2. draw a uniform size-K coalition without replacement, then the noise
    3. z = (gamma / K) sum_k f_k + eps       (host fixed at 0; it cancels in z = y - s)
    4. T = F^T z / gamma
    5. for every tau on the grid: detected if some colluder has T >= tau,
       false alarm if some innocent has T >= tau

Trials are evaluated in fixed batches of consecutive indices (one GEMM
per batch). Only the largest colluder and largest innocent statistic of a
trial matter, so per-tau counts come from two sorted arrays per batch.

Batch boundaries sit at multiples of the batch size regardless of worker
count, and counts merge by integer addition, so serial and parallel runs
produce identical aggregates.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from etf_fingerprinting.core.channel import EmbeddingParams
from etf_fingerprinting.core.errors import DomainError, ValidationError
from etf_fingerprinting.core.validators import require_int, require_positive
from etf_fingerprinting.experiment.config import build_design
from etf_fingerprinting.experiment.seeding import resolve_master_seed, trial_generator

logger = logging.getLogger(__name__)

# Upper bound on entries of one B x M statistics block
_BLOCK_ENTRIES = 1 << 22
_MAX_BATCH = 1024


# =============================================================================
# Domain types
# =============================================================================

@dataclass(frozen=True, eq=False)
class SweepAggregate:
    """Detection and false-alarm counts per (K, tau) for one design."""

    design: str
    N: int
    M: int
    tau_grid: np.ndarray = field(repr=False)
    trials: dict
    detections: dict = field(repr=False)
    false_alarms: dict = field(repr=False)
    master_seed: int

    @property
    def k_values(self):
        return sorted(self.trials)

    def p_d(self, K):
        return self.detections[K] / self.trials[K]

    def p_fa(self, K):
        return self.false_alarms[K] / self.trials[K]

    def merge(self, other):
        """Add the counts of another aggregate over the same design and grid."""
        if (other.design, other.N, other.M) != (self.design, self.N, self.M):
            raise ValidationError("cannot merge aggregates of different designs")
        if not np.array_equal(other.tau_grid, self.tau_grid):
            raise ValidationError("cannot merge aggregates over different tau grids")
        trials = dict(self.trials)
        detections = {k: v.copy() for k, v in self.detections.items()}
        false_alarms = {k: v.copy() for k, v in self.false_alarms.items()}
        for K in other.trials:
            trials[K] = trials.get(K, 0) + other.trials[K]
            detections[K] = detections.get(K, 0) + other.detections[K]
            false_alarms[K] = false_alarms.get(K, 0) + other.false_alarms[K]
        return SweepAggregate(design=self.design, N=self.N, M=self.M, tau_grid=self.tau_grid,
                              trials=trials, detections=detections,
                              false_alarms=false_alarms, master_seed=self.master_seed)


@dataclass(frozen=True)
class CurvePoint:
    """Selected threshold for one K; tau and p_d are NaN when infeasible."""

    design: str
    N: int
    M: int
    K: int
    trials: int
    tau: float
    p_fa: float
    p_d: float
    seed: int
    feasible: bool


@dataclass(frozen=True)
class ExperimentCurve:
    design: str
    N: int
    M: int
    points: tuple

    def p_d(self):
        return [pt.p_d for pt in self.points]


@dataclass(frozen=True)
class PerUserRates:
    """Empirical per-user error rates with binomial standard errors."""

    innocent_rate: float
    innocent_stderr: float
    innocent_samples: int
    miss_rate: float
    miss_stderr: float
    trials: int


def binomial_stderr(p, n):
    """sqrt(p (1 - p) / n)."""
    n = require_int(n, "n", minimum=1)
    p = float(p)
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)


# =============================================================================
# Trial evaluation
# =============================================================================

def batch_size_for(M):
    return max(1, min(_MAX_BATCH, _BLOCK_ENTRIES // M))


def _draw_trials(master_seed, K, M, N, start, stop, noisy, fixed=None):
    """Coalitions (B x K) and standard normal noise (B x N) for trials [start, stop)."""
    count = stop - start
    coalitions = np.empty((count, K), dtype=np.intp)
    noise = np.zeros((count, N)) if noisy else None
    for i, t in enumerate(range(start, stop)):
        rng = trial_generator(master_seed, K, t)
        if fixed is None:
            coalitions[i] = rng.choice(M, size=K, replace=False)
        else:
            others = rng.choice(M - 1, size=K - 1, replace=False)
            coalitions[i, 0] = fixed
            coalitions[i, 1:] = others + (others >= fixed)
        if noisy:
            noise[i] = rng.standard_normal(N)
    return coalitions, noise


def _statistics(matrix, gamma, sigma, coalitions, noise):
    """B x M test statistics for uniformly averaged coalitions plus noise."""
    rows = matrix.T
    K = coalitions.shape[1]
    Z = rows[coalitions[:, 0]].copy()
    for j in range(1, K):
        Z += rows[coalitions[:, j]]
    Z *= gamma / K
    if noise is not None:
        Z += sigma * noise
    return Z @ matrix / gamma


def _count_at_least(values, tau_grid):
    """Number of entries of ``values`` that are >= each tau."""
    ordered = np.sort(values)
    return ordered.size - np.searchsorted(ordered, tau_grid, side="left")


def simulate_counts(matrix, gamma, sigma, K, master_seed, start, stop, tau_grid):
    """Detection and false-alarm counts for trials [start, stop) of size-K coalitions."""
    N, M = matrix.shape
    tau_grid = np.asarray(tau_grid, dtype=float)
    detections = np.zeros(tau_grid.size, dtype=np.int64)
    false_alarms = np.zeros(tau_grid.size, dtype=np.int64)
    batch = batch_size_for(M)
    lo = start
    while lo < stop:
        hi = min(stop, (lo // batch + 1) * batch)
        coalitions, noise = _draw_trials(master_seed, K, M, N, lo, hi, sigma > 0)
        T = _statistics(matrix, gamma, sigma, coalitions, noise)
        colluder_max = np.take_along_axis(T, coalitions, axis=1).max(axis=1)
        np.put_along_axis(T, coalitions, -np.inf, axis=1)
        innocent_max = T.max(axis=1)
        detections += _count_at_least(colluder_max, tau_grid)
        false_alarms += _count_at_least(innocent_max, tau_grid)
        lo = hi
    return detections, false_alarms


# =============================================================================
# Parallel chunks
# =============================================================================

def _chunks(trials, batch, pieces):
    """Split [0, trials) at batch multiples into at most ``pieces`` ranges."""
    n_batches = -(-trials // batch)
    per_chunk = max(1, -(-n_batches // pieces))
    for first in range(0, n_batches, per_chunk):
        yield first * batch, min(trials, (first + per_chunk) * batch)


# =============================================================================
# Sweep, threshold selection, experiment
# =============================================================================

def run_sweep(cfg, F, tau_grid=None, label=None):
    """
    Simulate cfg.trials attacks for every K in cfg.k_values against design F.

    Args:
        cfg: ExperimentConfig (master_seed None draws one from entropy)
        F: DesignMatrix
        tau_grid: Explicit thresholds; defaults to cfg.tau_grid(F.coherence)
        label: Design label recorded in the aggregate (defaults to F.kind)

    Raises:
        DomainError: some K exceeds M
    """
    for K in cfg.k_values:
        if K > F.M:
            raise DomainError(f"coalition size K={K} exceeds the {F.M} users of the design")
    master_seed = resolve_master_seed(cfg.master_seed)
    grid = cfg.tau_grid(F.coherence) if tau_grid is None else np.asarray(tau_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ValidationError("tau grid must be a nonempty strictly increasing sequence")

    gamma = EmbeddingParams.for_design(F, cfg.per_dim_energy).gamma
    sigma = math.sqrt(cfg.sigma2)
    label = label or F.kind
    logger.info("sweep %s N=%d M=%d K=%s trials=%d workers=%d",
                label, F.N, F.M, list(cfg.k_values), cfg.trials, cfg.workers)

    detections = {K: np.zeros(grid.size, dtype=np.int64) for K in cfg.k_values}
    false_alarms = {K: np.zeros(grid.size, dtype=np.int64) for K in cfg.k_values}
    trials = {K: 0 for K in cfg.k_values}

    if cfg.workers == 1:
        for K in cfg.k_values:
            det, fa = simulate_counts(F.matrix, gamma, sigma, K, master_seed, 0, cfg.trials, grid)
            detections[K] += det
            false_alarms[K] += fa
            trials[K] += cfg.trials
            logger.debug("%s K=%d done", label, K)
    else:
        batch = batch_size_for(F.M)
        ranges = [
            (K, start, stop)
            for K in cfg.k_values
            for start, stop in _chunks(cfg.trials, batch, 4 * cfg.workers)
        ]
        # large designs reach the workers as read-only memmaps
        results = Parallel(n_jobs=cfg.workers)(
            delayed(simulate_counts)(F.matrix, gamma, sigma, K, master_seed, start, stop, grid)
            for K, start, stop in ranges
        )
        for (K, start, stop), (det, fa) in zip(ranges, results):
            detections[K] += det
            false_alarms[K] += fa
            trials[K] += stop - start

    return SweepAggregate(design=label, N=F.N, M=F.M, tau_grid=grid, trials=trials,
                          detections=detections, false_alarms=false_alarms,
                          master_seed=master_seed)


def select_threshold(agg, K, p_fa_max):
    """
    Smallest grid tau whose empirical false-alarm rate is <= p_fa_max.

    When no grid point qualifies the point is flagged infeasible: tau and
    p_d are NaN and p_fa is the rate at the largest tau.

    Raises:
        DomainError: K was not simulated
    """
    if K not in agg.trials:
        raise DomainError(f"aggregate for {agg.design} has no K={K} (have {agg.k_values})")
    p_fa_max = require_positive(p_fa_max, "p_fa_max")
    p_fa = agg.p_fa(K)
    p_d = agg.p_d(K)
    qualifying = np.flatnonzero(p_fa <= p_fa_max)
    common = dict(design=agg.design, N=agg.N, M=agg.M, K=K,
                  trials=agg.trials[K], seed=agg.master_seed)
    if qualifying.size == 0:
        logger.warning("%s K=%d: no tau meets p_fa <= %g", agg.design, K, p_fa_max)
        return CurvePoint(tau=math.nan, p_fa=float(p_fa[-1]), p_d=math.nan,
                          feasible=False, **common)
    i = int(qualifying[0])
    return CurvePoint(tau=float(agg.tau_grid[i]), p_fa=float(p_fa[i]), p_d=float(p_d[i]),
                      feasible=True, **common)


def run_experiment(cfg):
    """
    Build every configured design, sweep it and select thresholds per K.

    The master seed is resolved once and shared by every design, so each
    design faces the same coalition draws for a given (K, trial).

    Returns:
        (list of ExperimentCurve in config order, resolved master seed)

    Raises:
        ValidationError: two designs share a label
    """
    master_seed = resolve_master_seed(cfg.master_seed)
    cfg = cfg.replace(master_seed=master_seed)
    curves = []
    seen = set()
    for text in cfg.designs:
        F = build_design(text, cfg.base_dir)
        label = F.kind
        if label in seen:
            raise ValidationError(f"design label {label!r} appears twice in the config")
        seen.add(label)
        agg = run_sweep(cfg, F, label=label)
        points = tuple(select_threshold(agg, K, cfg.p_fa_max) for K in cfg.k_values)
        curves.append(ExperimentCurve(design=label, N=F.N, M=F.M, points=points))
    return curves, master_seed


def per_user_error_rates(F, K, trials, tau, per_dim_energy=1.0, sigma2=1.0, seed=0, colluder=0):
    """
    Empirical per-user error rates for uniform coalitions containing ``colluder``.

    Each trial pairs the fixed colluder with K - 1 uniformly drawn others.
    The innocent rate averages accusations over every (trial, innocent)
    pair; the miss rate is the fraction of trials in which the fixed
    colluder's statistic falls below tau.
    """
    K = require_int(K, "K", minimum=1, maximum=F.M)
    trials = require_int(trials, "trials", minimum=1)
    colluder = require_int(colluder, "colluder", minimum=0, maximum=F.M - 1)
    seed = resolve_master_seed(seed)
    gamma = EmbeddingParams.for_design(F, per_dim_energy).gamma
    sigma = math.sqrt(require_positive(sigma2, "sigma2", strict=False))
    tau = float(tau)

    accusations = 0
    misses = 0
    batch = batch_size_for(F.M)
    for lo in range(0, trials, batch):
        hi = min(trials, lo + batch)
        coalitions, noise = _draw_trials(seed, K, F.M, F.N, lo, hi, sigma > 0, fixed=colluder)
        T = _statistics(F.matrix, gamma, sigma, coalitions, noise)
        misses += int(np.count_nonzero(T[:, colluder] < tau))
        np.put_along_axis(T, coalitions, -np.inf, axis=1)
        accusations += int(np.count_nonzero(T >= tau))

    samples = trials * (F.M - K)
    innocent_rate = accusations / samples if samples else 0.0
    miss_rate = misses / trials
    return PerUserRates(
        innocent_rate=innocent_rate,
        innocent_stderr=binomial_stderr(innocent_rate, samples) if samples else 0.0,
        innocent_samples=samples,
        miss_rate=miss_rate,
        miss_stderr=binomial_stderr(miss_rate, trials),
        trials=trials,
    )
