"""
Scenario running, trajectory records, analysis and validation suites
"""

from .analysis import (AnalysisTable, CrossingEvent, analyze, bend_is_monotone, find_crossing_events,
                       single_global_maximum, tip_deflection, tip_displacement)
from .runner import SweepResult, SweepRow, prepare, run, steady_state_twist, sweep_winding_angle
from .trajectory import TrajectoryRecord, TrajectoryRecorder
from .validation import ValidationReport, ValidationRow, available_suites, validate

__all__ = ['AnalysisTable', 'CrossingEvent', 'SweepResult', 'SweepRow', 'TrajectoryRecord',
           'TrajectoryRecorder', 'ValidationReport', 'ValidationRow', 'analyze', 'available_suites',
           'bend_is_monotone', 'find_crossing_events', 'prepare', 'run', 'single_global_maximum',
           'steady_state_twist', 'sweep_winding_angle', 'tip_deflection', 'tip_displacement', 'validate']
