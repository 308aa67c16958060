"""
Tests for the command line entry point
"""

import numpy as np
import pytest
import yaml

from main import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, build_parser, main
from scenario import TrajectoryRecord
from scenario.validation import SCENARIO_DIR
from test_scenario import _synthetic_record


@pytest.fixture
def tiny_scenario(tmp_path):
    data = yaml.safe_load((SCENARIO_DIR / 'rest.yaml').read_text())
    data['arm'].update({'n_tm_rings': 4, 'elements_per_rod': 10})
    data['simulation']['duration'] = 2e-4
    data['output'].update({'trajectory_stride': 5, 'csv': True})
    path = tmp_path / 'tiny.yaml'
    path.write_text(yaml.safe_dump(data))
    return path


class TestParser:

    def test_requires_a_command(self):
        with pytest.raises(SystemExit) as info:
            build_parser().parse_args([])
        assert info.value.code == 2

    def test_sweep_angles(self):
        args = build_parser().parse_args(['sweep', '--config', 'x.yaml', '--angles', '60', '70'])
        assert args.angles == [60.0, 70.0]
        assert args.workers is None

    def test_analyze_choices(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(['analyze', 'run.npz', '--what', 'energy'])


class TestCommands:

    def test_run_writes_trajectory_and_csv(self, tiny_scenario, tmp_path):
        out = tmp_path / 'tiny.npz'
        assert main(['run', '--config', str(tiny_scenario), '--out', str(out), '--threads', '1']) == EXIT_OK
        record = TrajectoryRecord.read(out)
        assert record.status == 'complete'
        assert record.header['scenario'] == 'rest'
        assert out.with_suffix('.csv').exists()

    def test_run_stride_override(self, tiny_scenario, tmp_path):
        out = tmp_path / 'strided.npz'
        assert main(['run', '--config', str(tiny_scenario), '--out', str(out), '--stride', '1']) == EXIT_OK
        record = TrajectoryRecord.read(out)
        assert record.n_frames == record.footer['steps'] + 1

    def test_missing_config_is_a_usage_error(self, tmp_path):
        assert main(['run', '--config', str(tmp_path / 'absent.yaml'), '--out', str(tmp_path / 'x.npz')]) \
            == EXIT_USAGE

    def test_invalid_config_is_a_usage_error(self, tmp_path, capsys):
        path = tmp_path / 'bad.yaml'
        path.write_text(yaml.safe_dump({'schema_version': 1, 'simulation': {'duration': -1.0}}))
        assert main(['run', '--config', str(path), '--out', str(tmp_path / 'x.npz')]) == EXIT_USAGE
        assert 'simulation.duration' in capsys.readouterr().err

    def test_validate(self, capsys):
        assert main(['validate', '--suite', 'crossing']) == EXIT_OK
        assert 'crossing.frame' in capsys.readouterr().out

    def test_unknown_suite(self):
        assert main(['validate', '--suite', 'nonexistent']) == EXIT_USAGE

    def test_analyze(self, tmp_path, capsys):
        path = _synthetic_record().write(tmp_path / 'synthetic.npz')
        out = tmp_path / 'bend.csv'
        assert main(['analyze', str(path), '--what', 'bend', '--out', str(out)]) == EXIT_OK
        assert 's_bend' in capsys.readouterr().out
        rows = np.loadtxt(out, delimiter=',', skiprows=1)
        assert rows.shape == (3, 3)

    def test_analyze_missing_trajectory(self, tmp_path):
        assert main(['analyze', str(tmp_path / 'absent.npz'), '--what', 'knot']) == EXIT_USAGE

    def test_analyze_corrupt_trajectory(self, tmp_path):
        path = tmp_path / 'corrupt.npz'
        path.write_bytes(b'\x00' * 64)
        assert main(['analyze', str(path), '--what', 'knot']) == EXIT_USAGE

    def test_failed_sweep_rows(self, tiny_scenario, monkeypatch):
        import main as cli
        from scenario import SweepResult, SweepRow

        monkeypatch.setattr(cli, 'sweep_winding_angle',
                            lambda *args, **kwargs: SweepResult([SweepRow(60.0, float('nan'), 'failed', 'x')]))
        assert main(['sweep', '--config', str(tiny_scenario), '--angles', '60']) == EXIT_FAILURE
