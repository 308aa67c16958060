"""
Post-run analysis of trajectory records: knot quantities, bend tracking and
strand-passage events
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np
from tabulate import tabulate

from core.errors import ConfigurationError
from core.logger import logger
from core.rotations import batch_matmul, batch_norm, log_map
from topology import RibbonFrame, knot_quantities

from .trajectory import TrajectoryRecord

_log = logger.get_logger('analysis')

ANALYSES = ('knot', 'bend')
# Bend tracking ignores the proximal fraction of the arm
PROXIMAL_EXCLUSION = 0.1
# A bend counts as formed once its peak |kappa_1| reaches this fraction of the run maximum
BEND_ONSET_FRACTION = 0.25
# |dWr| between consecutive samples above this marks a strand passage
CROSSING_THRESHOLD = 1.0


@dataclass
class CrossingEvent:
    frame: int
    time: float
    delta_writhe: float
    delta_link: float


@dataclass
class AnalysisTable:
    columns: Tuple[str, ...]
    rows: np.ndarray
    events: List[CrossingEvent] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.columns.index(name)]

    def render(self) -> str:
        table = tabulate(self.rows.tolist(), headers=list(self.columns), floatfmt='.8g')
        if self.events:
            events = tabulate([(e.frame, e.time, e.delta_writhe, e.delta_link) for e in self.events],
                              headers=['frame', 't', 'dWr', 'dLk'], floatfmt='.6g')
            table += "\n\nstrand passages:\n" + events
        return table

    def to_csv(self, path) -> None:
        np.savetxt(path, self.rows, delimiter=',', header=','.join(self.columns), comments='', fmt='%.17g')


def find_crossing_events(times: Sequence[float], link: Sequence[float], writhe: Sequence[float],
                         threshold: float = CROSSING_THRESHOLD) -> List[CrossingEvent]:
    """Frames where writhe jumps by more than ``threshold`` since the previous sample"""
    times = np.asarray(times, dtype=float)
    dwr = np.diff(np.asarray(writhe, dtype=float))
    dlk = np.diff(np.asarray(link, dtype=float))
    return [CrossingEvent(int(i + 1), float(times[i + 1]), float(dwr[i]), float(dlk[i]))
            for i in np.flatnonzero(np.abs(dwr) > threshold)]


def knot_table(record: TrajectoryRecord, stride: int = 1, rod: str = 'ANC') -> AnalysisTable:
    rows = []
    for frame in range(0, record.n_frames, stride):
        q = knot_quantities(RibbonFrame.from_trajectory_frame(record, frame, rod))
        rows.append((record.times[frame], *q.as_row()))
    rows = np.asarray(rows, dtype=float).reshape(-1, 5)
    events = find_crossing_events(rows[:, 0], rows[:, 1], rows[:, 2])
    for event in events:
        _log.info(f"Strand passage near t={event.time:.4g}: dWr={event.delta_writhe:+.3f}, "
                  f"dLk={event.delta_link:+.3f}")
    return AnalysisTable(('t', 'Lk', 'Wr', 'Tw', 'residual'), rows, events)


def rod_bending_curvature(record: TrajectoryRecord, frame: int,
                          rod: str = 'ANC') -> Tuple[np.ndarray, np.ndarray, float]:
    """Rest arc length of the interior nodes, kappa_1 there and the rest rod length"""
    r = record.rod(rod)
    q = record.directors[frame][:, :, r.elements]
    rest = batch_norm(np.diff(record.positions[0][:, r.nodes], axis=1))
    voronoi = 0.5 * (rest[:-1] + rest[1:])
    relative = batch_matmul(q[:, :, :-1], np.transpose(q[:, :, 1:], (1, 0, 2)))
    kappa = log_map(relative) / voronoi
    s = np.cumsum(rest)[:-1]
    return s, kappa[0], float(np.sum(rest))


def bend_point(s: np.ndarray, magnitude: np.ndarray) -> float:
    """Centroid of the contiguous half-maximum lobe around the peak of ``magnitude``"""
    i = int(np.argmax(magnitude))
    half = 0.5 * magnitude[i]
    lo, hi = i, i
    while lo > 0 and magnitude[lo - 1] >= half:
        lo -= 1
    while hi < magnitude.size - 1 and magnitude[hi + 1] >= half:
        hi += 1
    weights = magnitude[lo:hi + 1]
    total = float(np.sum(weights))
    if total <= 0.0:
        return float(s[i])
    return float(np.sum(weights * s[lo:hi + 1]) / total)


def bend_table(record: TrajectoryRecord, stride: int = 1, rod: str = 'ANC') -> AnalysisTable:
    """Bend point (peak |kappa_1| over the distal part), its velocity and the peak itself per frame"""
    frames = list(range(0, record.n_frames, stride))
    positions, peaks = [], []
    for frame in frames:
        s, kappa, length = rod_bending_curvature(record, frame, rod)
        distal = s >= PROXIMAL_EXCLUSION * length
        magnitude = np.abs(kappa[distal])
        positions.append(bend_point(s[distal], magnitude))
        peaks.append(float(np.max(magnitude)))
    t = record.times[frames]
    s_bend = np.asarray(positions, dtype=float)
    v_bend = np.gradient(s_bend, t) if len(frames) > 1 else np.zeros_like(s_bend)
    return AnalysisTable(('t', 's_bend', 'v_bend', 'kappa_peak'),
                         np.column_stack([t, s_bend, v_bend, np.asarray(peaks, dtype=float)]))


def bend_onset(kappa_peak: Sequence[float], fraction: float = BEND_ONSET_FRACTION) -> int:
    """First row whose peak curvature reaches ``fraction`` of the largest peak"""
    kappa_peak = np.asarray(kappa_peak, dtype=float)
    if kappa_peak.size == 0 or np.max(kappa_peak) <= 0.0:
        return 0
    return int(np.argmax(kappa_peak >= fraction * np.max(kappa_peak)))


def analyze(record: TrajectoryRecord, what: str, stride: int = 1) -> AnalysisTable:
    if what not in ANALYSES:
        raise ConfigurationError('what', f"unknown analysis {what!r}; available: {list(ANALYSES)}")
    if not isinstance(stride, int) or stride < 1:
        raise ConfigurationError('stride', "must be an integer >= 1")
    if what == 'knot':
        return knot_table(record, stride)
    return bend_table(record, stride)


# -- property checks ---------------------------------------------------------

def bend_is_monotone(s_bend: Sequence[float], tolerance: float = 0.0) -> bool:
    """Bend position never moves back towards the base by more than ``tolerance``"""
    return bool(np.all(np.diff(np.asarray(s_bend, dtype=float)) >= -tolerance))


def single_global_maximum(values: Sequence[float], tolerance: float = 0.05) -> bool:
    """Samples within ``tolerance`` of the maximum form one contiguous run"""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return False
    peak = np.max(values)
    near = np.flatnonzero(values >= peak - tolerance * abs(peak))
    return bool(near[-1] - near[0] + 1 == near.size)


def tip_displacement(record: TrajectoryRecord, frame: int = -1, rod: str = 'ANC') -> np.ndarray:
    """Tip position of ``rod`` at ``frame`` minus its position in the first frame"""
    tip = record.rod(rod).nodes.stop - 1
    return record.positions[frame][:, tip] - record.positions[0][:, tip]


def tip_deflection(record: TrajectoryRecord, direction: Sequence[float], frame: int = -1,
                   rod: str = 'ANC') -> Dict[str, Any]:
    """Lateral tip displacement split along and across the horizontal ``direction``"""
    d = np.asarray(direction, dtype=float)
    d = np.array([d[0], d[1], 0.0]) / np.hypot(d[0], d[1])
    across_axis = np.array([-d[1], d[0], 0.0])
    displacement = tip_displacement(record, frame, rod)
    return {
        'along': float(displacement @ d),
        'across': float(displacement @ across_axis),
        'axial': float(displacement[2]),
    }
