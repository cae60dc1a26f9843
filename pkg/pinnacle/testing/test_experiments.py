import math

import numpy as np
import pandas as pd
import pytest

from pinnacle.experiments.checks import batch_means, check_equilibration, check_tile_relation, pyramid_start
from pinnacle.experiments.config import load_config, parse_config
from pinnacle.experiments.runner import best_pair, fit_tail, run_experiment, tail_shape
from pinnacle.models.chain import ChainSpec
from pinnacle.models.experiment import ExperimentConfig, ExperimentKind
from pinnacle.models.lattice import ModelParams
from pinnacle.models.tail import TailEstimate
from pinnacle.utils.errors import ConfigError, DomainError
from pinnacle.utils.storage import Storage


def _config(tmp_path, text):
    path = tmp_path / 'experiment.env'
    path.write_text(text)
    return load_config(path)


class TestConfig:
    def test_reads_key_value_file(self, tmp_path):
        config = _config(tmp_path, 'experiment = max_height\np = 2\nbeta = 1.5\nL = 16, 32\ntrials = 3\n')
        assert config.experiment == ExperimentKind.MAX_HEIGHT
        assert config.L_values == (16, 32)
        assert config.trials == 3
        assert not config.params.floor

    def test_floor_defaults_on_for_plateau(self, tmp_path):
        config = _config(tmp_path, 'experiment = FLOOR_PLATEAU\np = 2\nbeta = 1\nL = 16\n')
        assert config.params.floor

    def test_rsos_exponent(self, tmp_path):
        config = _config(tmp_path, 'experiment = TILE_RELATION\np = inf\nbeta = 2\n')
        assert math.isinf(config.params.p)
        assert config.L_values == (64,)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / 'nope.env')

    @pytest.mark.parametrize('values', [
        {'experiment': 'MAX_HEIGHT', 'p': '2'},
        {'experiment': 'MAX_HEIGHT', 'p': '2', 'beta': '1', 'L': '16', 'colour': 'red'},
        {'experiment': 'SOMETHING', 'p': '2', 'beta': '1', 'L': '16'},
        {'experiment': 'MAX_HEIGHT', 'p': '2', 'beta': '1'},
        {'experiment': 'MAX_HEIGHT', 'p': '0.5', 'beta': '1', 'L': '16'},
        {'experiment': 'MAX_HEIGHT', 'p': '2', 'beta': '-1', 'L': '16'},
        {'experiment': 'MAX_HEIGHT', 'p': '2', 'beta': '1', 'L': '4'},
        {'experiment': 'MAX_HEIGHT', 'p': '2', 'beta': '1', 'L': '16', 'trials': 'many'},
        {'experiment': 'MAX_HEIGHT', 'p': '2', 'beta': '1', 'L': '16', 'schedule': 'RANDOM'},
        {'experiment': 'MAX_HEIGHT', 'p': '2', 'beta': '1', 'L': '16', 'h_min': '5', 'h_max': '2'},
    ])
    def test_rejects_bad_values(self, values):
        with pytest.raises(ConfigError):
            parse_config(values)

    def test_trial_seeds_are_distinct_and_stable(self, dg):
        config = ExperimentConfig(experiment='MAX_HEIGHT', params=dg, L_values=(16,), seed=5)
        seeds = {config.trial_seed(16, t) for t in range(20)}
        assert len(seeds) == 20
        assert config.trial_seed(16, 3) == ExperimentConfig(experiment='MAX_HEIGHT', params=dg,
                                                            L_values=(16,), seed=5).trial_seed(16, 3)


class TestBestPair:
    def test_picks_heaviest_consecutive_pair(self):
        assert best_pair(pd.Series([1, 5, 4, 8], index=[0, 1, 2, 3])) == (2, 12 / 18)

    def test_gap_counts_as_zero(self):
        low, mass = best_pair(pd.Series([3, 3], index=[0, 5]))
        assert low == 0 and mass == pytest.approx(0.5)

    def test_ties_go_to_the_lowest(self):
        assert best_pair(pd.Series([2, 2, 2], index=[4, 5, 6]))[0] == 4

    def test_empty(self):
        with pytest.raises(DomainError):
            best_pair(pd.Series([], dtype=np.int64))


class TestTileRelation:
    def test_window_from_tail(self):
        tail = TailEstimate.from_frame(pd.DataFrame({'h': [1], 'tail': [0.1]}), ModelParams(p=1, beta=1.0))
        row = check_tile_relation(1.0, [1], tail).iloc[0]
        assert row['l_min'] == pytest.approx(60)
        assert row['l_max'] == pytest.approx(80)
        assert row['log_l_min'] == pytest.approx(math.log(60))

    def test_vanishing_tail(self):
        tail = TailEstimate.from_frame(pd.DataFrame({'h': [1, 2], 'tail': [0.1, 0.0]}), ModelParams(p=1, beta=1.0))
        with pytest.raises(DomainError):
            check_tile_relation(1.0, [2], tail)

    def test_missing_level(self):
        tail = TailEstimate.from_frame(pd.DataFrame({'h': [1], 'tail': [0.1]}), ModelParams(p=1, beta=1.0))
        with pytest.raises(DomainError):
            check_tile_relation(1.0, [3], tail)

    def test_analytic_experiment(self, dg):
        config = ExperimentConfig(experiment='TILE_RELATION', params=dg, L_values=(64,), h_min=2, h_max=5)
        report = run_experiment(config)
        assert list(report.trials['h']) == [2, 3, 4, 5]
        assert report.trials['log_l_min'].is_monotonic_increasing
        assert report.summary['n_levels'].iloc[0] == 4


class TestMaxExperiment:
    def test_flat_chain_without_sweeps(self, dg):
        config = ExperimentConfig(experiment='MAX_HEIGHT', params=dg, L_values=(8,), trials=2, burnin=0)
        report = run_experiment(config)
        assert list(report.trials['max_height']) == [0, 0]
        summary = report.summary.iloc[0]
        assert summary['mode'] == 0 and summary['best_pair_mass'] == 1.0

    def test_reproducible(self, dg):
        config = ExperimentConfig(experiment='MAX_HEIGHT', params=dg, L_values=(8, 10), trials=2, burnin=30)
        a, b = run_experiment(config), run_experiment(config)
        pd.testing.assert_frame_equal(a.trials, b.trials)
        assert list(zip(a.trials['L'], a.trials['trial'])) == [(8, 0), (8, 1), (10, 0), (10, 1)]

    def test_rejects_floor(self):
        params = ModelParams(p=2, beta=1.0, floor=True)
        with pytest.raises(ConfigError):
            run_experiment(ExperimentConfig(experiment='MAX_HEIGHT', params=params, L_values=(8,)))

    @pytest.mark.slow
    def test_maximum_concentrates_on_two_values(self):
        params = ModelParams(p=2, beta=1.5)
        config = ExperimentConfig(experiment='MAX_HEIGHT', params=params, L_values=(128,), trials=20)
        assert run_experiment(config).summary['best_pair_mass'].iloc[0] >= 0.6


class TestFloorExperiment:
    def test_small_coupled_run(self):
        params = ModelParams(p=2, beta=1.0, floor=True)
        config = ExperimentConfig(experiment='FLOOR_PLATEAU', params=params, L_values=(8,), trials=2,
                                  burnin=20, h_min=1, h_max=2, coupled=True)
        report = run_experiment(config)
        assert (report.trials['floored_max'] >= 0).all()
        assert report.trials['unfloored_mean'].notna().all()
        assert (report.trials['mean_height'] >= report.trials['unfloored_mean']).all()
        assert set(report.tables['levels']['h']) == {1, 2}
        assert report.tables['histogram']['count'].sum() == 2 * 64

    def test_needs_floor(self, dg):
        with pytest.raises(ConfigError):
            run_experiment(ExperimentConfig(experiment='FLOOR_PLATEAU', params=dg, L_values=(8,)))

    @pytest.mark.slow
    def test_floor_raises_mean_height(self):
        params = ModelParams(p=2, beta=1.5, floor=True)
        config = ExperimentConfig(experiment='FLOOR_PLATEAU', params=params, L_values=(128,), trials=2,
                                  sweeps=200, coupled=True)
        summary = run_experiment(config).summary.iloc[0]
        assert summary['mean_height'] > summary['unfloored_mean']

    @pytest.mark.slow
    def test_modal_level_grows_with_box(self):
        params = ModelParams(p=2, beta=1.5, floor=True)
        config = ExperimentConfig(experiment='FLOOR_PLATEAU', params=params, L_values=(32, 64, 128, 256), trials=2)
        modal = list(run_experiment(config).summary['modal_level'])
        assert all(a <= b for a, b in zip(modal, modal[1:]))

    @pytest.mark.slow
    def test_two_levels_hold_the_mass_at_low_temperature(self):
        params = ModelParams(p=2, beta=10.0, floor=True)
        config = ExperimentConfig(experiment='FLOOR_PLATEAU', params=params, L_values=(32,), trials=4)
        assert run_experiment(config).summary['modal_fraction'].iloc[0] >= 0.9



class TestLdpTail:
    def test_rejects_small_box(self, dg):
        config = ExperimentConfig(experiment='LDP_TAIL', params=dg, L_values=(32,), sweeps=10)
        with pytest.raises(ConfigError):
            run_experiment(config)

    def test_rejects_no_samples(self, dg):
        config = ExperimentConfig(experiment='LDP_TAIL', params=dg, L_values=(64,), sweeps=0)
        with pytest.raises(ConfigError):
            run_experiment(config)

    def test_fit_recovers_coefficient(self):
        h = np.arange(1, 6)
        table = pd.DataFrame({'h': h, 'neg_log_tail': 3.0 * h ** 2, 'neg_log_se': np.full(5, 0.1)})
        fit = fit_tail(table, math.inf)
        assert fit['coefficient'] == pytest.approx(3.0)
        assert fit['ci_low'] < 3.0 < fit['ci_high']

    def test_gaussian_shape_skips_h1(self):
        assert tail_shape(2, [2])[0] == pytest.approx(4 / math.log(2))
        table = pd.DataFrame({'h': [1], 'neg_log_tail': [1.0], 'neg_log_se': [0.1]})
        assert math.isnan(fit_tail(table, 2)['coefficient'])

    @pytest.mark.slow
    def test_sos_tail(self):
        params = ModelParams(p=1, beta=1.0)
        config = ExperimentConfig(experiment='LDP_TAIL', params=params, L_values=(64,), trials=1,
                                  burnin=2000, sweeps=20_000, h_min=1, h_max=4)
        report = run_experiment(config)
        summary = report.summary.iloc[0]
        assert summary['reference'] == 4.0
        assert summary['coefficient'] > 0


class TestEquilibration:
    def test_pyramid_start(self):
        start = pyramid_start(6, 1, 2)
        assert start.heights[0, 0] == 2 and start.heights[2, 2] == 3
        assert start.boundary_height == 1

    def test_batch_means(self):
        mean, se = batch_means(np.arange(40, dtype=float), n_batches=4)
        assert mean == pytest.approx(19.5)
        assert se == pytest.approx(np.std([4.5, 14.5, 24.5, 34.5], ddof=1) / 2)

    def test_hot_and_cold_agree(self):
        spec = ChainSpec(params=ModelParams(p=2, beta=1.5), L=8, seed=4, sweeps_burnin=200, sweeps_sample=400)
        check = check_equilibration(spec)
        assert check.agree
        assert check.observable == 'mean_height'

    def test_needs_samples(self, dg):
        with pytest.raises(DomainError):
            check_equilibration(ChainSpec(params=dg, L=8, sweeps_sample=1))


class TestReportWrite:
    def test_tables_written(self, dg, out_dir):
        config = ExperimentConfig(experiment='MAX_HEIGHT', params=dg, L_values=(8,), trials=1, burnin=0)
        report = run_experiment(config)
        with Storage(out_dir) as storage:
            paths = report.write(storage)
        assert {p.name for p in paths} == {'max_height_trials.csv', 'max_height_summary.csv',
                                           'max_height_histogram.csv'}
        assert pd.read_csv(out_dir / 'max_height_trials.csv')['max_height'].tolist() == [0]
