"""Experiment plans, sweep estimator, scaling fits, and output files."""

import json

import numpy as np
import pytest

import fountain_id as fid
from fountain_id import harness
from fountain_id.errors import ConfigError
from fountain_id.harness import (
    DataMode,
    DataSpec,
    ExperimentPlan,
    ScalingResult,
    _fit_loglog_slope,
    candidate_grid,
    consistency_sweep,
    grid_probability_table,
    run_experiment,
    sweep_estimator,
    true_probabilities,
)
from fountain_id.optimizer import DescentConfig
from fountain_id.oracle import source_exit_probability


def _tiny_plan(layout, seed=0, **overrides):
    defaults = dict(
        name="tiny",
        process=fid.DiffusionSpec(drift=np.zeros(2), eta=0.5, dt=5e-3),
        true_source=fid.SourceSpec(np.array([-0.4, 0.1]), 0.15, fid.Profile.BUMP),
        layout=layout,
        data=DataSpec(DataMode.ORACLE_EXACT),
        descent=DescentConfig(
            theta_init=np.array([0.2, 0.0]), beta=0.15, steps=5,
            step_sizes=0.1, ensemble_sizes=300,
        ),
        replicates=2,
        master_seed=seed,
    )
    defaults.update(overrides)
    return ExperimentPlan(**defaults)


class TestDataSpec:
    def test_multinomial_needs_n(self):
        with pytest.raises(ConfigError):
            DataSpec(DataMode.MULTINOMIAL)

    def test_fountain_needs_rate_and_window(self):
        with pytest.raises(ConfigError):
            DataSpec(DataMode.FOUNTAIN, lambda_=0.0, window=1.0)

    def test_dict_forms(self):
        assert DataSpec(DataMode.ORACLE_EXACT).to_dict() == {"mode": "oracle_exact"}
        assert DataSpec(DataMode.MULTINOMIAL, n=100).to_dict() == {
            "mode": "multinomial", "n": 100,
        }


class TestPlanValidation:
    def test_rejects_empty_name(self, layout5):
        with pytest.raises(ConfigError):
            _tiny_plan(layout5, name="")

    def test_rejects_zero_replicates(self, layout5):
        with pytest.raises(ConfigError):
            _tiny_plan(layout5, replicates=0)

    def test_spec_hash_ignores_seed(self, layout5):
        assert _tiny_plan(layout5, seed=1).spec_hash == _tiny_plan(layout5, seed=2).spec_hash


class TestSlopeFit:
    def test_exact_power_law_recovered(self):
        sizes = np.array([100, 300, 1000, 3000])
        errors = 2.7 * sizes ** (-0.5)
        slope, se = _fit_loglog_slope(sizes, errors)
        assert slope == pytest.approx(-0.5, abs=1e-12)
        assert se == pytest.approx(0.0, abs=1e-12)

    def test_se_reflects_scatter(self):
        rng = np.random.default_rng(0)
        sizes = np.array([100, 300, 1000, 3000])
        errors = sizes ** (-0.5) * np.exp(rng.normal(0, 0.2, 4))
        _, se = _fit_loglog_slope(sizes, errors)
        assert se > 0.0


class TestScalingResult:
    def test_requires_sorted_grid(self):
        with pytest.raises(ConfigError):
            ScalingResult(
                grid=[(100, 0.1, 0.01, 5), (50, 0.2, 0.01, 5)],
                fitted_slope=-0.5, slope_se=0.1,
            )

    def test_dict_roundtrip(self):
        r = ScalingResult(
            grid=[(10, 0.3, 0.01, 5), (100, 0.1, 0.01, 5)],
            fitted_slope=-0.48, slope_se=0.02,
        )
        d = r.to_dict()
        assert d["fitted_slope"] == -0.48
        assert d["grid"][0] == [10, 0.3, 0.01, 5]


class TestTrueProbabilities:
    def test_driftless_uses_closed_form(self, layout5, bump_source):
        proc = fid.DiffusionSpec(drift=np.zeros(2), eta=0.5, dt=5e-3)
        table = true_probabilities(proc, bump_source, layout5)
        assert table.method == "poisson_kernel"
        np.testing.assert_allclose(
            table.p, source_exit_probability(bump_source, layout5), atol=1e-10
        )

    def test_drifted_uses_mc_reference(self, tmp_path, layout5, bump_source):
        proc = fid.DiffusionSpec(drift=np.array([1.0, 0.0]), eta=0.5, dt=5e-3)
        table = true_probabilities(
            proc, bump_source, layout5, cache_dir=tmp_path, reference_budget=2000
        )
        assert table.method == "high_budget_mc"
        assert table.budget == 2000


class TestRunExperiment:
    def test_oracle_mode_files_and_determinism(self, tmp_path, layout5):
        plan = _tiny_plan(layout5, seed=42)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        res = run_experiment(plan, out_dir=out_a)
        run_experiment(plan, out_dir=out_b)
        assert len(res.traces) == 2
        for sub in ("tiny_summary.csv", "tiny_summary.json",
                    "tiny_rep0_trace.csv", "tiny_rep1_trace.csv"):
            assert (out_a / sub).exists()
            assert (out_a / sub).read_bytes() == (out_b / sub).read_bytes()
        # CSV floats are plain decimal literals, not numpy reprs
        assert "np.float64" not in (out_a / "tiny_summary.csv").read_text()
        assert "np.float64" not in (out_a / "tiny_rep0_trace.csv").read_text()

    def test_summary_rows_fields(self, layout5):
        plan = _tiny_plan(layout5)
        res = run_experiment(plan)
        rows = res.summary_rows()
        assert len(rows) == 2
        assert set(harness.SUMMARY_COLUMNS) <= set(rows[0])
        assert rows[0]["name"] == "tiny"
        assert rows[0]["error"] >= 0.0

    def test_multinomial_mode_draws_differ_per_replicate(self, layout5):
        plan = _tiny_plan(
            layout5, data=DataSpec(DataMode.MULTINOMIAL, n=2000), replicates=2
        )
        res = run_experiment(plan)
        assert np.any(res.p_data[0] != res.p_data[1])
        # each replicate's p_hat comes from integer counts over n draws
        np.testing.assert_allclose(
            np.round(res.p_data * 2000), res.p_data * 2000, atol=1e-9
        )

    def test_fountain_mode_runs(self, layout5):
        plan = _tiny_plan(
            layout5,
            data=DataSpec(DataMode.FOUNTAIN, lambda_=100.0, window=1.0),
            replicates=1,
        )
        res = run_experiment(plan)
        assert res.p_data.shape == (1, layout5.count)
        assert np.all(res.p_data >= 0)


class TestSweepEstimator:
    def test_recovers_truth_from_exact_data(self, layout5, bump_source):
        grid = candidate_grid(bump_source.theta, half_width=0.1, per_side=21)
        grid_p = grid_probability_table(
            grid, bump_source.beta, bump_source.profile, layout5
        )
        p_true = source_exit_probability(bump_source, layout5)
        theta_hat = sweep_estimator(grid, grid_p, p_true)
        # truth is a grid node (center of the box): exact recovery
        np.testing.assert_allclose(theta_hat, bump_source.theta, atol=1e-12)

    def test_tie_breaks_to_lowest_index(self):
        grid = np.array([[0.0, 0.0], [1.0, 1.0]])
        grid_p = np.array([[0.5, 0.5], [0.5, 0.5]])
        np.testing.assert_array_equal(
            sweep_estimator(grid, grid_p, np.array([0.4, 0.6])), grid[0]
        )

    def test_grid_table_matches_refined_quadrature(self, layout5, bump_source):
        grid = np.array([bump_source.theta, [0.1, 0.2]])
        table = grid_probability_table(
            grid, bump_source.beta, bump_source.profile, layout5
        )
        for i, theta in enumerate(grid):
            src = fid.SourceSpec(theta, bump_source.beta, bump_source.profile)
            np.testing.assert_allclose(
                table[i], source_exit_probability(src, layout5), atol=1e-6
            )


class TestConsistencySweep:
    def test_enforces_minimum_replicates(self, layout5, bump_source):
        with pytest.raises(ConfigError):
            consistency_sweep(bump_source, layout5, replicates=5)

    def test_small_sweep_scales_down(self, layout5, bump_source):
        grid = candidate_grid(bump_source.theta, half_width=0.2, per_side=41)
        grid_p = grid_probability_table(
            grid, bump_source.beta, bump_source.profile, layout5
        )
        result, samples = consistency_sweep(
            bump_source, layout5, n_grid=(500, 5000), replicates=40,
            master_seed=1, grid=grid, grid_p=grid_p,
        )
        assert set(samples) == {500, 5000}
        assert all(len(s) == 40 for s in samples.values())
        # 10x more data gives a clearly smaller mean error
        assert result.grid[1][1] < result.grid[0][1]
        assert result.fitted_slope < -0.2


class TestMFluctuationStudy:
    def test_smoke_structure_and_determinism(self, tmp_path, layout5, bump_source):
        proc = fid.DiffusionSpec(drift=np.zeros(2), eta=0.5, dt=5e-3)
        kwargs = dict(
            m_grid=(100, 300), burn_in=3, trailing=4, step_size=0.1,
            replicates=2, data_n=1000, master_seed=7, cache_dir=tmp_path,
            reference_budget=20_000,
        )
        result, clouds = harness.m_fluctuation_study(
            proc, bump_source, layout5, **kwargs
        )
        assert [row[0] for row in result.grid] == [100, 300]
        assert all(row[3] == 2 * 4 for row in result.grid)
        assert all(c.shape == (8, 2) for c in clouds.values())
        again, _ = harness.m_fluctuation_study(proc, bump_source, layout5, **kwargs)
        assert again.grid == result.grid

    def test_exact_data_mode(self, tmp_path, layout5, bump_source):
        proc = fid.DiffusionSpec(drift=np.zeros(2), eta=0.5, dt=5e-3)
        result, _ = harness.m_fluctuation_study(
            proc, bump_source, layout5, m_grid=(100, 300), burn_in=2,
            trailing=3, replicates=1, data_n=None, master_seed=7,
            cache_dir=tmp_path, reference_budget=20_000,
        )
        assert len(result.grid) == 2

    def test_rejects_zero_replicates(self, layout5, bump_source):
        proc = fid.DiffusionSpec(drift=np.zeros(2), eta=0.5, dt=5e-3)
        with pytest.raises(ConfigError):
            harness.m_fluctuation_study(
                proc, bump_source, layout5, replicates=0
            )


class TestExperimentFactories:
    def test_standard_experiments_unique_names(self):
        plans = harness.standard_experiments(master_seed=5)
        names = [p.name for p in plans]
        assert len(names) == len(set(names)) == 5
        assert all(p.master_seed == 5 for p in plans)

    def test_experiment_one_is_pinned(self):
        plan = harness.experiment_one()
        assert plan.data.mode is DataMode.ORACLE_EXACT
        assert plan.descent.steps == 1000
        assert plan.descent.step_size(0) == 0.01
        assert plan.descent.ensemble_size(0) == 10_000
        np.testing.assert_allclose(plan.descent.theta_init, [0.5, -0.05])
        np.testing.assert_allclose(plan.true_source.theta, [-0.4, 0.1])
        assert plan.true_source.beta == 0.15
