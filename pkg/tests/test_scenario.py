"""
Tests for trajectory records, the scenario runner, post-run analysis and validation
"""

import math

import numpy as np
import pytest

from core.errors import ConfigurationError, TrajectoryFormatError
from core.rod import RodState
from core.rotations import rotation_about_axis
from scenario import (SweepResult, SweepRow, TrajectoryRecord, TrajectoryRecorder, analyze, available_suites,
                      bend_is_monotone, find_crossing_events, run, single_global_maximum, steady_state_twist,
                      sweep_winding_angle, tip_deflection, validate)
from scenario.analysis import bend_onset, bend_point
from scenario.validation import shipped_scenario, strand_passage_series

TINY_ARM = {'arm.n_tm_rings': 4, 'arm.elements_per_rod': 10}


def _synthetic_record(kinks=(5, 8, 12), n_elements=20) -> TrajectoryRecord:
    """Straight ANC whose frames carry a single director kink that moves distally"""
    state = RodState.straight(n_elements, 1.0, 0.01, name='ANC', group='ANC')
    rest = state.directors.copy()
    recorder = TrajectoryRecorder({'scenario': 'synthetic', 'config_hash': 'abc'}, state)
    bend = rotation_about_axis(np.array([1.0, 0.0, 0.0]), 0.3)
    for k, kink in enumerate(kinks):
        state.directors[:] = rest
        for e in range(kink, n_elements):
            state.directors[:, :, e] = rest[:, :, e] @ bend.T
        recorder.capture(0.1 * k, state, np.zeros(n_elements))
    return recorder.finish({'status': 'complete'})


@pytest.fixture(scope='module')
def rest_record():
    config = shipped_scenario('rest', {**TINY_ARM, 'simulation.duration': 5e-4, 'output.trajectory_stride': 1})
    return run(config, threads=1)


class TestTrajectoryRecord:

    def test_header_describes_layout(self):
        record = _synthetic_record()
        assert record.header['format_version'] == 1
        assert record.header['n_nodes'] == 21
        assert record.rod('ANC').nodes == slice(0, 21)
        assert record.n_frames == 3
        assert record.footer['n_frames'] == 3
        assert record.footer['peak_rss_bytes'] > 0

    def test_round_trip(self, tmp_path):
        record = _synthetic_record()
        loaded = TrajectoryRecord.read(record.write(tmp_path / 'run.npz'))
        assert loaded.header == record.header
        assert loaded.footer == record.footer
        np.testing.assert_array_equal(loaded.directors, record.directors)
        assert loaded.knots is None
        assert loaded.matches('abc')

    def test_unknown_rod(self):
        with pytest.raises(KeyError):
            _synthetic_record().rod('LM_0')

    def test_csv_export(self, tmp_path):
        path = _synthetic_record().to_csv(tmp_path / 'run.csv')
        lines = path.read_text().splitlines()
        assert lines[0] == 'frame,time,rod,node,x,y,z,vx,vy,vz'
        assert len(lines) == 1 + 3 * 21

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            TrajectoryRecord.read(tmp_path / 'absent.npz')

    def test_unreadable_file(self, tmp_path):
        path = tmp_path / 'garbage.npz'
        path.write_bytes(b'not a zip archive')
        with pytest.raises(TrajectoryFormatError) as info:
            TrajectoryRecord.read(path)
        assert info.value.frame_index is None

    def test_missing_array(self, tmp_path):
        path = tmp_path / 'partial.npz'
        np.savez(path, header=np.array('{}'), times=np.zeros(1))
        with pytest.raises(TrajectoryFormatError, match='missing array'):
            TrajectoryRecord.read(path)

    def test_times_must_increase(self):
        record = _synthetic_record()
        record.times[2] = record.times[1]
        with pytest.raises(TrajectoryFormatError) as info:
            record.validate()
        assert info.value.frame_index == 2

    def test_non_finite_positions_name_the_frame(self):
        record = _synthetic_record()
        record.positions[1, 0, 4] = np.nan
        with pytest.raises(TrajectoryFormatError) as info:
            record.validate()
        assert info.value.frame_index == 1

    def test_frame_count_mismatch(self):
        record = _synthetic_record()
        record.radii = record.radii[:2]
        with pytest.raises(TrajectoryFormatError) as info:
            record.validate()
        assert info.value.frame_index == 2


class TestAnalysis:

    def test_crossing_events(self):
        times = np.linspace(0.0, 1.0, 11)
        writhe_series = np.where(times >= 0.5, -2.0, 2.0) + 0.01 * times
        link_series = np.where(times >= 0.5, -2.0, 2.0)
        events = find_crossing_events(times, link_series, writhe_series)
        assert len(events) == 1
        assert events[0].frame == 5
        assert events[0].time == pytest.approx(0.5)
        assert events[0].delta_writhe == pytest.approx(-4.0, abs=0.01)
        assert events[0].delta_link == pytest.approx(-4.0)

    def test_no_events_for_smooth_series(self):
        times = np.linspace(0.0, 1.0, 50)
        assert find_crossing_events(times, np.zeros(50), np.sin(times)) == []

    def test_strand_passage_is_one_event(self):
        link_series, writhe_series = strand_passage_series([0.05, 0.005, -0.005, -0.05])
        events = find_crossing_events(np.arange(4.0), link_series, writhe_series)
        assert len(events) == 1
        assert events[0].frame == 2
        assert abs(events[0].delta_writhe) == pytest.approx(2.0, abs=0.15)
        assert events[0].delta_link == pytest.approx(events[0].delta_writhe, abs=0.15)

    def test_bend_point(self):
        s = np.array([0.0, 1.0, 2.0, 3.0])
        assert bend_point(s, np.array([0.0, 1.0, 0.0, 0.0])) == pytest.approx(1.0)
        assert bend_point(s, np.array([0.0, 1.0, 1.0, 0.0])) == pytest.approx(1.5)
        assert bend_point(s, np.array([3.0, 1.0, 0.0, 0.0])) == 0.0
        assert bend_point(s, np.zeros(4)) == 0.0

    def test_bend_point_ignores_secondary_lobes(self):
        s = np.linspace(0.0, 0.9, 10)
        magnitude = np.array([0.0, 0.9, 0.0, 0.0, 0.0, 0.0, 0.5, 1.0, 0.5, 0.0])
        assert bend_point(s, magnitude) == pytest.approx(0.7)

    def test_bend_onset(self):
        assert bend_onset([0.0, 0.01, 0.2, 1.0, 0.9]) == 2
        assert bend_onset([0.0, 0.0]) == 0
        assert bend_onset([]) == 0

    def test_bend_table_follows_kink(self):
        table = analyze(_synthetic_record(), 'bend')
        np.testing.assert_allclose(table.column('s_bend'), [0.25, 0.4, 0.6], atol=1e-9)
        np.testing.assert_allclose(table.column('v_bend'), [1.5, 1.75, 2.0], atol=1e-6)
        np.testing.assert_allclose(table.column('kappa_peak'), 6.0, rtol=1e-9)
        assert bend_is_monotone(table.column('s_bend'))

    def test_knot_table_of_straight_rod(self):
        table = analyze(_synthetic_record(kinks=(20, 20)), 'knot')
        assert table.columns == ('t', 'Lk', 'Wr', 'Tw', 'residual')
        np.testing.assert_allclose(table.rows[:, 1:], 0.0, atol=1e-9)
        assert table.events == []
        assert 'Lk' in table.render()

    def test_analysis_table_csv(self, tmp_path):
        table = analyze(_synthetic_record(), 'bend', stride=2)
        table.to_csv(tmp_path / 'bend.csv')
        lines = (tmp_path / 'bend.csv').read_text().splitlines()
        assert lines[0] == 't,s_bend,v_bend,kappa_peak'
        assert len(lines) == 3

    def test_invalid_requests(self):
        record = _synthetic_record()
        with pytest.raises(ConfigurationError) as info:
            analyze(record, 'energy')
        assert info.value.field == 'what'
        with pytest.raises(ConfigurationError):
            analyze(record, 'bend', stride=0)

    def test_property_checks(self):
        assert bend_is_monotone([0.1, 0.2, 0.2, 0.5])
        assert not bend_is_monotone([0.1, 0.3, 0.2])
        assert single_global_maximum([0.0, 1.0, 0.99, 0.2])
        assert not single_global_maximum([1.0, 0.2, 1.0])
        assert not single_global_maximum([])

    def test_tip_deflection(self):
        record = _synthetic_record()
        record.positions[-1, 1, 20] += 0.2
        deflection = tip_deflection(record, direction=(0.0, 1.0))
        assert deflection['along'] == pytest.approx(0.2)
        assert deflection['across'] == pytest.approx(0.0)
        assert deflection['axial'] == pytest.approx(0.0)


class TestRunner:

    def test_rest_run_stays_at_rest(self, rest_record):
        assert rest_record.status == 'complete'
        assert rest_record.n_frames == rest_record.footer['steps'] + 1
        assert rest_record.footer['steps'] > 0
        drift = np.max(np.abs(rest_record.positions[-1] - rest_record.positions[0]))
        assert drift < 1e-9
        assert rest_record.footer['max_penetration_ratio'] < 1e-6

    def test_header_records_provenance(self, rest_record):
        header = rest_record.header
        assert header['scenario'] == 'rest'
        assert header['threads'] == 1
        assert header['plugins'] == ['connections', 'rod_contact', 'pressure', 'drag']
        assert [note['parameter'] for note in header['provenance']] == ['arm.youngs_modulus']
        assert len(header['config_hash']) == 64

    def test_activations_are_recorded(self, rest_record):
        assert rest_record.activations.shape == (rest_record.n_frames, rest_record.header['n_elements'])
        assert np.all(rest_record.activations == 0.0)

    def test_explicit_dt_above_bound(self):
        config = shipped_scenario('rest', {**TINY_ARM, 'simulation.dt': 1.0})
        with pytest.raises(ConfigurationError) as info:
            run(config, threads=1)
        assert info.value.field == 'simulation.dt'

    def test_steady_state_twist_of_rest_run(self, rest_record):
        assert steady_state_twist(rest_record) == pytest.approx(0.0, abs=1e-9)


class TestSweep:

    def test_argmax_skips_failed_rows(self):
        result = SweepResult([SweepRow(60.0, 0.4, 'complete'), SweepRow(70.0, math.nan, 'failed', 'boom'),
                              SweepRow(75.0, 0.5, 'complete')])
        assert result.argmax == 75.0
        assert 'angle_deg' in result.as_table()
        assert SweepResult([SweepRow(70.0, math.nan, 'unstable')]).argmax is None

    def test_csv(self, tmp_path):
        path = SweepResult([SweepRow(60.0, 0.4, 'complete')]).to_csv(tmp_path / 'sweep.csv')
        assert path.read_text().splitlines() == ['angle_deg,steady_abs_twist,status,error', '60.0,0.4,complete,']

    def test_rejects_angles_outside_range(self):
        with pytest.raises(ConfigurationError) as info:
            sweep_winding_angle(shipped_scenario('rest'), [60.0, 95.0])
        assert info.value.field == 'sweep.angles'


class TestValidation:

    def test_suites_are_registered(self):
        suites = available_suites()
        for name in ('muscle', 'cfw', 'writhe', 'helix', 'topology-invariants', 'crossing', 'rod',
                     'primitives', 'penetration', 'winding', 'bend', 'determinism'):
            assert name in suites

    def test_unknown_suite(self):
        with pytest.raises(ConfigurationError) as info:
            validate('nonexistent')
        assert info.value.field == 'suite'
        with pytest.raises(ConfigurationError):
            validate('')

    def test_crossing_suite_passes(self):
        report = validate('crossing')
        assert report.passed
        assert {row.test_id for row in report.rows} >= {'crossing.event_count', 'crossing.frame'}
        assert 'PASS' in report.render(color=False)

    def test_muscle_suite_passes(self):
        report = validate('muscle')
        assert report.passed, report.render(color=False)
        assert all(set(row) == {'test_id', 'measured', 'bound', 'passed'} for row in report.as_dicts())

    def test_empty_report_does_not_pass(self):
        from scenario.validation import ValidationReport
        assert not ValidationReport('empty').passed

    @pytest.mark.slow
    def test_cantilever(self):
        assert validate('rod').passed

    @pytest.mark.slow
    @pytest.mark.parametrize('name', ['primitives', 'bend', 'penetration', 'winding'])
    def test_simulation_suite_passes(self, name):
        report = validate(name)
        assert report.passed, report.render(color=False)
