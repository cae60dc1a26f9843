import numpy as np
import pandas as pd
import pytest

from pinnacle.cli import main
from pinnacle.lattice.snapshots import write_snapshot
from pinnacle.models.lattice import HeightConfig, ModelParams


@pytest.fixture
def snapshot_file(tmp_path):
    heights = np.zeros((8, 8), dtype=np.int64)
    heights[2:6, 2:6] = 1
    heights[3:5, 3:5] = 2
    path = tmp_path / 'plateau.txt'
    write_snapshot(HeightConfig(heights=heights), ModelParams(p=2, beta=1.0), path)
    return path


@pytest.fixture
def tail_csv(tmp_path):
    path = tmp_path / 'tail.csv'
    pd.DataFrame({'h': [1, 2, 3], 'tail': [1.0, 0.5, 0.1]}).to_csv(path, index=False)
    return path


class TestMain:
    def test_asm_counts(self, out_dir):
        assert main(['--out-dir', str(out_dir), 'asm', '--h-max', '4']) == 0
        counts = pd.read_csv(out_dir / 'asm_counts.csv')
        assert len(counts) == 12
        assert set(counts.loc[counts['h'] == 4, 'count']) == {42}

    def test_oracle_budget_exit_code(self, out_dir):
        assert main(['--out-dir', str(out_dir), 'oracle', '--beta', '1', '--L', '4', '--K', '5']) == 4

    def test_oracle_tiny_box(self, out_dir):
        assert main(['--out-dir', str(out_dir), 'oracle', '--beta', '1', '--L', '1', '--K', '2']) == 0
        marginals = pd.read_csv(out_dir / 'marginals.csv')
        assert marginals['tail'].iloc[0] == pytest.approx(1.0)

    def test_bad_experiment_file(self, tmp_path, out_dir):
        path = tmp_path / 'bad.env'
        path.write_text('experiment = MAX_HEIGHT\np = 2\n')
        assert main(['--out-dir', str(out_dir), 'experiment', str(path)]) == 2

    def test_experiment_file(self, tmp_path, out_dir):
        path = tmp_path / 'tile.env'
        path.write_text('experiment = TILE_RELATION\np = 2\nbeta = 1\nh_min = 2\nh_max = 4\n')
        assert main(['--out-dir', str(out_dir), 'experiment', str(path)]) == 0
        assert len(pd.read_csv(out_dir / 'tile_relation_trials.csv')) == 3

    def test_domain_error_exit_code(self, out_dir):
        assert main(['--out-dir', str(out_dir), 'simulate', '--beta', '-1', '--L', '4']) == 2

    def test_simulate_then_analyze(self, out_dir):
        args = ['--out-dir', str(out_dir), 'simulate', '--beta', '1', '--L', '8', '--burnin', '5', '--sweeps', '6',
                '--thin', '2', '--snapshots']
        assert main(args) == 0
        assert len(pd.read_csv(out_dir / 'samples.csv')) == 3
        assert len(list((out_dir / 'snapshots').glob('*.txt'))) == 3

        analyzed = out_dir / 'analyzed'
        assert main(['--out-dir', str(analyzed), 'analyze', str(out_dir / 'snapshots'), '--h-max', '2',
                     '--circuit-event', '1', '4']) == 0
        assert len(pd.read_csv(analyzed / 'snapshots.csv')) == 3
        assert len(pd.read_csv(analyzed / 'events.csv')) == 3

    def test_analyze_missing_target(self, tmp_path, out_dir):
        assert main(['--out-dir', str(out_dir), 'analyze', str(tmp_path / 'missing')]) == 2

    def test_predict(self, out_dir):
        assert main(['--out-dir', str(out_dir), 'predict', '--beta', '1', '--L', '100,1000']) == 0
        assert len(pd.read_csv(out_dir / 'predict.csv')) == 2
        assert (out_dir / 'asymptotes.csv').exists()

    def test_dirichlet(self, out_dir):
        assert main(['--out-dir', str(out_dir), 'dirichlet', '--r', '5']) == 0
        assert (out_dir / 'profile.csv').exists()

    def test_nested_rectangles(self, out_dir):
        assert main(['--out-dir', str(out_dir), 'nested-probe', '--p', '3', '--h', '2,3']) == 0
        assert len(pd.read_csv(out_dir / 'nested_probe.csv')) == 2

    def test_missing_required_argument(self):
        with pytest.raises(SystemExit):
            main(['kernel'])


class TestSimulateFlags:
    def test_out_csv_and_snapshot_every(self, tmp_path):
        out = tmp_path / 'runs' / 'chain.csv'
        snaps = tmp_path / 'snaps'
        args = ['simulate', '--beta', '1', '--L', '8', '--burnin', '5', '--sweeps', '6', '--thin', '2',
                '--snapshot-every', '4', '--snapshot-dir', str(snaps), '--out', str(out)]
        assert main(args) == 0
        samples = pd.read_csv(out)
        assert list(samples.columns[:4]) == ['sweep_index', 'max_height', 'mean_height', 'center_height']
        assert list(samples['sweep_index']) == [2, 4, 6]
        assert [p.name for p in snaps.glob('*.txt')] == ['000004.txt']
        assert (out.parent / 'final.txt').exists()

    def test_snapshot_every_must_divide_into_thinning(self, out_dir):
        args = ['--out-dir', str(out_dir), 'simulate', '--beta', '1', '--L', '8', '--sweeps', '6', '--thin', '2',
                '--snapshot-every', '3']
        assert main(args) == 2


class TestAsmFlags:
    def test_h_and_modes(self, tmp_path):
        out = tmp_path / 'counts.csv'
        assert main(['asm', '--h', '5', '--mode', 'enumerate', '--mode', 'sixvertex', '--out', str(out)]) == 0
        counts = pd.read_csv(out)
        assert set(counts['mode']) == {'enumerate', 'sixvertex'}
        assert set(counts.loc[counts['h'] == 5, 'count']) == {429}

    def test_old_mode_names(self, out_dir):
        assert main(['--out-dir', str(out_dir), 'asm', '--h', '3', '--mode', 'paths']) == 0
        assert set(pd.read_csv(out_dir / 'asm_counts.csv')['mode']) == {'enumerate'}

    def test_dump_bijection_directory(self, tmp_path, out_dir):
        dump = tmp_path / 'bijection'
        assert main(['--out-dir', str(out_dir), 'asm', '--h', '3', '--mode', 'formula',
                     '--dump-bijection', str(dump)]) == 0
        for name in ('paths_h3.txt', 'six_vertex_h3.txt', 'asm_h3.txt'):
            assert (dump / name).read_text().count('# family') == 7


class TestAnalyzeFlags:
    def test_snapshot_and_levels(self, snapshot_file, tmp_path):
        out = tmp_path / 'levels.csv'
        assert main(['analyze', '--snapshot', str(snapshot_file), '--levels', '1..2', '--out', str(out)]) == 0
        levels = pd.read_csv(out)
        assert list(levels['h']) == [1, 2]
        assert {'n_contours', 'n_macroscopic', 'max_area', 'total_area',
                'has_negative_macroscopic'} <= set(levels.columns)
        assert list(levels['max_area']) == [16, 4]

    def test_single_level(self, snapshot_file, out_dir):
        assert main(['--out-dir', str(out_dir), 'analyze', '--snapshot', str(snapshot_file), '--levels', '2']) == 0
        assert list(pd.read_csv(out_dir / 'levels.csv')['h']) == [2]

    def test_needs_exactly_one_target(self, snapshot_file, out_dir):
        assert main(['--out-dir', str(out_dir), 'analyze']) == 2
        assert main(['--out-dir', str(out_dir), 'analyze', str(snapshot_file), '--snapshot', str(snapshot_file)]) == 2

    def test_rejects_reversed_levels(self, snapshot_file):
        with pytest.raises(SystemExit):
            main(['analyze', '--snapshot', str(snapshot_file), '--levels', '3..1'])


class TestPredictFlags:
    def test_empirical_backend(self, tail_csv, tmp_path):
        out = tmp_path / 'pred' / 'm.csv'
        args = ['predict', '--beta', '1', '--L', '100', '--backend', 'empirical', '--tail-csv', str(tail_csv),
                '--out', str(out)]
        assert main(args) == 0
        assert len(pd.read_csv(out)) == 1
        assert not (out.parent / 'asymptotes.csv').exists()

    def test_tail_alias_implies_empirical(self, tail_csv, out_dir):
        assert main(['--out-dir', str(out_dir), 'predict', '--beta', '1', '--L', '100', '--tail', str(tail_csv)]) == 0
        assert not (out_dir / 'asymptotes.csv').exists()

    def test_empirical_needs_tail(self, out_dir):
        assert main(['--out-dir', str(out_dir), 'predict', '--beta', '1', '--L', '100', '--backend', 'EMPIRICAL']) == 2

    def test_analytic_rejects_tail(self, tail_csv, out_dir):
        args = ['--out-dir', str(out_dir), 'predict', '--beta', '1', '--L', '100', '--backend', 'ANALYTIC',
                '--tail-csv', str(tail_csv)]
        assert main(args) == 2


class TestOutFlag:
    @pytest.mark.parametrize('args', [
        ['oracle', '--beta', '1', '--L', '1', '--K', '2'],
        ['dirichlet', '--r', '3'],
        ['kernel', '--R', '8'],
        ['pvar', '--p', '2', '--R', '4'],
        ['nested-probe', '--p', '3', '--h', '2'],
    ])
    def test_main_table_goes_to_out(self, args, tmp_path):
        out = tmp_path / 'tables' / 'main.csv'
        assert main([*args, '--out', str(out)]) == 0
        assert len(pd.read_csv(out)) > 0
