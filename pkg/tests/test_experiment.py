"""
Experiment Harness Tests

Seed derivation, config validation and presets, the Monte Carlo sweep,
threshold selection, serial/parallel agreement, results CSV and manifests.

Run with: python -m pytest tests/test_experiment.py -v
"""

import sys
import os
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import math

import pytest
import numpy as np
import yaml

from etf_fingerprinting.core.designs import (
    etf_from_incidence,
    orthogonal_design,
    simplex_design,
    steiner_pairs_incidence,
)
from etf_fingerprinting.core.errors import (
    DomainError,
    FingerprintError,
    ParseError,
    ValidationError,
)
from etf_fingerprinting.experiment.config import (
    ExperimentConfig,
    build_design,
    list_presets,
    load_config,
    parse_design_source,
    source_inputs,
)
from etf_fingerprinting.experiment.results import (
    CSV_HEADER,
    manifest_path,
    read_results_csv,
    results_csv_text,
    write_manifest,
    write_results_csv,
)
from etf_fingerprinting.experiment.seeding import (
    derive_trial_seed,
    resolve_master_seed,
    splitmix64,
)
from etf_fingerprinting.experiment.sweep import (
    CurvePoint,
    ExperimentCurve,
    SweepAggregate,
    batch_size_for,
    binomial_stderr,
    per_user_error_rates,
    run_experiment,
    run_sweep,
    select_threshold,
)


@pytest.fixture(scope="module")
def golden_etf():
    return etf_from_incidence(steiner_pairs_incidence(4))


def _config(**overrides):
    values = dict(designs=["etf:pairs=4"], k_values=[1, 2], trials=200,
                  per_dim_energy=1.0, sigma2=1.0, master_seed=7)
    values.update(overrides)
    return ExperimentConfig(**values)


def _aggregate(false_alarms, detections=None, trials=10000, K=2):
    grid = np.linspace(0.0, 1.0, len(false_alarms))
    detections = detections if detections is not None else [trials] * len(false_alarms)
    return SweepAggregate(
        design="etf", N=6, M=16, tau_grid=grid,
        trials={K: trials},
        detections={K: np.array(detections, dtype=np.int64)},
        false_alarms={K: np.array(false_alarms, dtype=np.int64)},
        master_seed=1,
    )


# =============================================================================
# Seeding
# =============================================================================

class TestSeeding:

    def test_splitmix_reference_output(self):
        assert splitmix64(0) == 0xE220A8397B1DCDAF

    def test_trial_seeds_distinct(self):
        seeds = {derive_trial_seed(42, K, t) for K in (1, 2, 3) for t in range(1000)}
        assert len(seeds) == 3000

    def test_seed_depends_on_master(self):
        assert derive_trial_seed(1, 2, 3) != derive_trial_seed(2, 2, 3)

    def test_seed_is_64_bit(self):
        assert 0 <= derive_trial_seed(2 ** 64 - 1, 12, 49999) < 2 ** 64

    def test_resolve_given(self):
        assert resolve_master_seed(123) == 123

    def test_resolve_from_entropy(self):
        seed = resolve_master_seed(None)
        assert 0 <= seed < 2 ** 64

    def test_resolve_rejects_negative(self):
        with pytest.raises(DomainError):
            resolve_master_seed(-1)


# =============================================================================
# Configuration
# =============================================================================

class TestDesignSources:

    @pytest.mark.parametrize("text, kind", [
        ("etf:pairs=16", "etf"),
        ("etf:incidence=a.txt", "etf"),
        ("orthogonal:120", "orthogonal"),
        ("simplex:120", "simplex"),
        ("file:design.txt", "file"),
    ])
    def test_parse(self, text, kind):
        assert parse_design_source(text).kind == kind

    @pytest.mark.parametrize("text", ["etf", "etf:v=4", "random:4", "simplex:abc", "etf:pairs=x"])
    def test_malformed(self, text):
        with pytest.raises(ParseError):
            parse_design_source(text)

    def test_build(self):
        F = build_design("simplex:3")
        assert (F.kind, F.N, F.M) == ("simplex", 3, 4)

    def test_inputs_relative_to_base(self, tmp_path):
        src = parse_design_source("file:d.txt")
        assert source_inputs(src, tmp_path) == [tmp_path / "d.txt"]
        assert source_inputs(parse_design_source("orthogonal:3")) == []


class TestExperimentConfig:

    def test_defaults(self):
        cfg = ExperimentConfig(designs=["orthogonal:8"], k_values=[3, 1, 3])
        assert cfg.k_values == (1, 3)
        assert cfg.trials == 50000
        assert cfg.p_fa_max == 1e-3
        assert cfg.tau_points == 512

    def test_default_grid_spans_one_plus_mu(self):
        grid = ExperimentConfig(designs=["orthogonal:8"], k_values=[1]).tau_grid(1 / 15)
        assert grid.size == 512
        assert grid[0] == 0.0
        assert np.isclose(grid[-1], 1 + 1 / 15)
        assert np.all(np.diff(grid) > 0)

    @pytest.mark.parametrize("changes", [
        {"trials": 0},
        {"p_fa_max": 0.0},
        {"p_fa_max": 1.5},
        {"k_values": []},
        {"designs": []},
        {"tau_min": 1.0, "tau_max": 0.5},
        {"workers": 0},
        {"master_seed": -3},
    ])
    def test_invalid(self, changes):
        with pytest.raises(FingerprintError):
            _config(**changes)

    def test_unknown_key(self):
        with pytest.raises(ValidationError, match="unknown config keys"):
            ExperimentConfig.from_mapping({"designs": ["orthogonal:4"], "k_values": [1], "seed": 3})

    def test_missing_key(self):
        with pytest.raises(ValidationError, match="k_values"):
            ExperimentConfig.from_mapping({"designs": ["orthogonal:4"]})

    def test_to_dict_round_trip(self):
        cfg = _config()
        assert ExperimentConfig.from_mapping(cfg.to_dict()) == cfg

    def test_presets_bundled(self):
        assert {"smoke", "desk", "bound_check", "etf_n8128"} <= set(list_presets())

    def test_load_preset(self):
        cfg = load_config("smoke")
        assert cfg.trials == 1
        assert cfg.designs == ("etf:pairs=4",)

    def test_load_file(self, tmp_path):
        path = tmp_path / "cfg.yaml"
        path.write_text(yaml.safe_dump({"designs": ["file:d.txt"], "k_values": [2]}))
        cfg = load_config(path)
        assert cfg.base_dir == tmp_path.resolve()

    def test_unknown_preset(self):
        with pytest.raises(ValidationError, match="unknown preset"):
            load_config("no-such-preset")


# =============================================================================
# Sweep
# =============================================================================

class TestRunSweep:

    def test_noiseless_single_colluder(self, golden_etf):
        cfg = _config(k_values=[1], trials=1, sigma2=0.0)
        agg = run_sweep(cfg, golden_etf, tau_grid=[0.5])
        assert agg.detections[1].tolist() == [1]
        assert agg.false_alarms[1].tolist() == [0]
        assert agg.trials == {1: 1}

    def test_everyone_accused_at_minus_one(self, golden_etf):
        cfg = _config(k_values=[2], trials=500)
        agg = run_sweep(cfg, golden_etf, tau_grid=[-1.0, 0.0, 0.5])
        assert agg.detections[2][0] == 500
        assert agg.false_alarms[2][0] == 500

    def test_counts_non_increasing(self, golden_etf):
        cfg = _config(k_values=[2], trials=10000)
        agg = run_sweep(cfg, golden_etf)
        assert np.all(np.diff(agg.detections[2]) <= 0)
        assert np.all(np.diff(agg.false_alarms[2]) <= 0)
        assert agg.detections[2].max() <= 10000

    def test_same_seed_same_counts(self, golden_etf):
        cfg = _config(trials=700)
        a, b = run_sweep(cfg, golden_etf), run_sweep(cfg, golden_etf)
        for K in cfg.k_values:
            assert np.array_equal(a.detections[K], b.detections[K])
            assert np.array_equal(a.false_alarms[K], b.false_alarms[K])

    def test_parallel_matches_serial(self, golden_etf):
        cfg = _config(trials=2500)
        serial = run_sweep(cfg, golden_etf)
        parallel = run_sweep(cfg.replace(workers=2), golden_etf)
        for K in cfg.k_values:
            assert np.array_equal(serial.detections[K], parallel.detections[K])
            assert np.array_equal(serial.false_alarms[K], parallel.false_alarms[K])
            assert parallel.trials[K] == 2500

    def test_merge_commutes(self, golden_etf):
        a = run_sweep(_config(trials=300, master_seed=1), golden_etf)
        b = run_sweep(_config(trials=400, master_seed=2), golden_etf)
        ab, ba = a.merge(b), b.merge(a)
        for K in (1, 2):
            assert ab.trials[K] == ba.trials[K] == 700
            assert np.array_equal(ab.detections[K], ba.detections[K])
            assert np.array_equal(ab.false_alarms[K], ba.false_alarms[K])

    def test_merge_rejects_other_design(self, golden_etf):
        a = run_sweep(_config(trials=10), golden_etf)
        b = run_sweep(_config(trials=10, k_values=[1]), orthogonal_design(6), tau_grid=a.tau_grid)
        with pytest.raises(ValidationError):
            a.merge(b)

    def test_k_above_m(self):
        with pytest.raises(DomainError):
            run_sweep(_config(k_values=[5]), orthogonal_design(4))

    def test_grid_must_increase(self, golden_etf):
        with pytest.raises(ValidationError):
            run_sweep(_config(), golden_etf, tau_grid=[0.5, 0.2])

    def test_batch_size(self):
        assert batch_size_for(16) == 1024
        assert batch_size_for(16384) == 256
        assert batch_size_for(1 << 23) == 1


class TestSelectThreshold:

    def test_third_grid_point(self):
        # P_fa = 0.01, 0.002, 0.0008, 0
        agg = _aggregate([100, 20, 8, 0], detections=[10000, 9000, 8000, 7000])
        pt = select_threshold(agg, 2, 1e-3)
        assert pt.tau == agg.tau_grid[2]
        assert pt.p_fa == 0.0008
        assert pt.p_d == 0.8
        assert pt.feasible

    def test_zero_false_alarms_first_point(self):
        pt = select_threshold(_aggregate([0, 0, 0]), 2, 1e-3)
        assert pt.tau == 0.0

    def test_unconstrained(self):
        pt = select_threshold(_aggregate([10000, 5000, 10]), 2, 1.0)
        assert pt.tau == 0.0

    def test_infeasible(self):
        pt = select_threshold(_aggregate([500, 400, 300]), 2, 1e-3)
        assert not pt.feasible
        assert math.isnan(pt.tau) and math.isnan(pt.p_d)
        assert pt.p_fa == 0.03

    def test_missing_k(self):
        with pytest.raises(DomainError):
            select_threshold(_aggregate([0]), 3, 1e-3)


class TestRunExperiment:

    def test_single_colluder_always_detected(self):
        cfg = ExperimentConfig(designs=["etf:pairs=16"], k_values=[1], trials=2000, master_seed=3)
        curves, seed = run_experiment(cfg)
        assert seed == 3
        (pt,) = curves[0].points
        assert pt.feasible
        assert pt.p_d == 1.0
        assert pt.p_fa <= 1e-3

    def test_deterministic(self):
        cfg = _config(designs=["etf:pairs=4", "orthogonal:6"], trials=300)
        first, _ = run_experiment(cfg)
        second, _ = run_experiment(cfg)
        assert results_csv_text(first) == results_csv_text(second)

    def test_seed_recorded_when_drawn(self):
        curves, seed = run_experiment(_config(trials=5, master_seed=None))
        assert all(pt.seed == seed for pt in curves[0].points)

    def test_duplicate_labels(self):
        with pytest.raises(ValidationError, match="twice"):
            run_experiment(_config(designs=["orthogonal:4", "orthogonal:5"], k_values=[1], trials=2))

    def test_simplex_full_coalition_is_noise_only(self):
        cfg = _config(designs=["simplex:3"], k_values=[4], trials=2000, p_fa_max=1.0)
        agg = run_sweep(cfg, simplex_design(3), tau_grid=[0.9])
        # no innocents, so no false alarms; detection relies on noise alone
        assert agg.false_alarms[4][0] == 0
        assert agg.detections[4][0] < 2000


class TestPerUserRates:

    def test_noiseless_exact_rates(self, golden_etf):
        # six of the fifteen other columns have inner product +1/3 with column 0
        rates = per_user_error_rates(golden_etf, K=1, trials=10, tau=0.2, sigma2=0.0)
        assert rates.miss_rate == 0.0
        assert rates.innocent_rate == pytest.approx(6 / 15)
        assert rates.innocent_samples == 150

    def test_stderr(self):
        assert binomial_stderr(0.5, 100) == pytest.approx(0.05)
        assert binomial_stderr(0.0, 10) == 0.0


# =============================================================================
# Results CSV and manifests
# =============================================================================

def _curve(points):
    return ExperimentCurve(design="etf", N=6, M=16, points=tuple(points))


def _point(K, tau, p_fa, p_d, feasible=True):
    return CurvePoint(design="etf", N=6, M=16, K=K, trials=50000, tau=tau, p_fa=p_fa,
                      p_d=p_d, seed=99, feasible=feasible)


class TestResultsCsv:

    def test_text_layout(self):
        text = results_csv_text([_curve([_point(2, 0.123456789, 0.0008, 0.95),
                                         _point(1, 0.5, 0.0, 1.0)])])
        lines = text.splitlines()
        assert lines[0] == ",".join(CSV_HEADER)
        assert lines[1] == "etf,6,16,1,50000,0.5,0,1,99"
        assert lines[2] == "etf,6,16,2,50000,0.123457,0.0008,0.95,99"

    def test_infeasible_row(self):
        text = results_csv_text([_curve([_point(3, math.nan, 0.002, math.nan, feasible=False)])])
        assert text.splitlines()[1] == "etf,6,16,3,50000,nan,0.002,nan,99"

    def test_write_then_read(self, tmp_path):
        path = tmp_path / "r.csv"
        write_results_csv([_curve([_point(1, 0.5, 0.0, 1.0), _point(2, 0.25, 0.001, 0.5)])], path)
        rows = read_results_csv(path)
        assert [r["K"] for r in rows] == [1, 2]
        assert rows[1]["p_d"] == 0.5
        assert isinstance(rows[0]["trials"], int)

    def test_wrong_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("design,K,p_d\netf,1,1\n")
        with pytest.raises(ParseError, match="header"):
            read_results_csv(path)

    def test_malformed_value(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(",".join(CSV_HEADER) + "\netf,6,16,x,1,0.5,0,1,1\n")
        with pytest.raises(ParseError):
            read_results_csv(path)


class TestManifest:

    def test_path(self, tmp_path):
        assert manifest_path(tmp_path / "out.csv").name == "out.csv.manifest.yaml"

    def test_contents(self, tmp_path):
        design_file = tmp_path / "d.txt"
        design_file.write_text("x")
        output = tmp_path / "out.csv"
        path = write_manifest(output, "etf-fingerprinting experiment", {"trials": 5},
                              inputs=[design_file], master_seed=12, version="9.9")
        data = yaml.safe_load(path.read_text())
        assert data["command"] == "etf-fingerprinting experiment"
        assert data["config"] == {"trials": 5}
        assert data["master_seed"] == 12
        assert data["version"] == "9.9"
        assert list(data["inputs"].values())[0] == (
            "2d711642b726b04401627ca9fbac32f5c8530fb1903cc4db02258717921a4881"
        )
        assert "timestamp" in data
