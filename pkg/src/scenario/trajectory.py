"""
Trajectory records: a JSON header, stacked frame arrays and a JSON footer in one .npz
"""

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import psutil

from core.errors import TrajectoryFormatError
from core.rod import RodSlice, RodState

FORMAT_VERSION = 1
UNITS = {'length': 'm', 'time': 's', 'velocity': 'm/s', 'angular_velocity': 'rad/s', 'stress': 'Pa'}

# name -> (trailing shape in terms of N nodes / E elements)
FRAME_ARRAYS = {
    'positions': ('3', 'N'),
    'directors': ('3', '3', 'E'),
    'velocities': ('3', 'N'),
    'omegas': ('3', 'E'),
    'radii': ('E',),
    'activations': ('E',),
}
CSV_COLUMNS = ('frame', 'time', 'rod', 'node', 'x', 'y', 'z', 'vx', 'vy', 'vz')


def _slice_to_json(s: slice) -> List[int]:
    return [int(s.start), int(s.stop)]


def rods_to_header(rods: List[RodSlice]) -> List[Dict[str, Any]]:
    return [{'name': r.name, 'group': r.group, 'nodes': _slice_to_json(r.nodes),
             'elements': _slice_to_json(r.elements), 'voronoi': _slice_to_json(r.voronoi),
             'closed': bool(r.closed)} for r in rods]


def _finite_or_none(value: float) -> Optional[float]:
    return float(value) if math.isfinite(value) else None


def _to_builtin(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    return str(value)


@dataclass
class TrajectoryRecord:
    """Frames of one run. Frame arrays are stacked along a leading frame axis."""
    header: Dict[str, Any]
    times: np.ndarray
    positions: np.ndarray
    directors: np.ndarray
    velocities: np.ndarray
    omegas: np.ndarray
    radii: np.ndarray
    activations: np.ndarray
    footer: Dict[str, Any] = field(default_factory=dict)
    knots: Optional[np.ndarray] = None

    @property
    def n_frames(self) -> int:
        return int(self.times.shape[0])

    @property
    def status(self) -> str:
        return str(self.footer.get('status', 'complete'))

    @property
    def rods(self) -> List[RodSlice]:
        return [RodSlice(r['name'], r['group'], slice(*r['nodes']), slice(*r['elements']),
                         slice(*r['voronoi']), r['closed']) for r in self.header['rods']]

    def rod(self, name: str) -> RodSlice:
        for rod in self.rods:
            if rod.name == name:
                return rod
        raise KeyError(f"no rod named {name!r} in trajectory")

    def rods_in_group(self, group: str) -> List[RodSlice]:
        return [rod for rod in self.rods if rod.group == group]

    def matches(self, config_hash: str) -> bool:
        return self.header.get('config_hash') == config_hash

    # -- persistence --------------------------------------------------------

    def write(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        arrays = {name: getattr(self, name) for name in FRAME_ARRAYS}
        if self.knots is not None:
            arrays['knots'] = self.knots
        with open(path, 'wb') as f:
            np.savez(f, header=np.array(json.dumps(self.header, sort_keys=True, default=_to_builtin)),
                     footer=np.array(json.dumps(self.footer, sort_keys=True, default=_to_builtin)),
                     times=self.times, **arrays)
        return path

    @classmethod
    def read(cls, path: Union[str, Path]) -> "TrajectoryRecord":
        """Load and validate a record; every inconsistency names the first bad frame"""
        path = Path(path)
        try:
            with np.load(path, allow_pickle=False) as data:
                contents = {key: data[key] for key in data.files}
        except FileNotFoundError:
            raise
        except Exception as e:
            raise TrajectoryFormatError(None, f"unreadable trajectory {path}: {e}") from e

        for key in ('header', 'footer', 'times', *FRAME_ARRAYS):
            if key not in contents:
                raise TrajectoryFormatError(None, f"missing array '{key}'")
        try:
            header = json.loads(str(contents['header']))
            footer = json.loads(str(contents['footer']))
        except ValueError as e:
            raise TrajectoryFormatError(None, f"header/footer is not JSON: {e}") from e

        record = cls(header=header, footer=footer, times=contents['times'],
                     knots=contents.get('knots'),
                     **{name: contents[name] for name in FRAME_ARRAYS})
        record.validate()
        return record

    def validate(self) -> None:
        for key in ('format_version', 'n_nodes', 'n_elements', 'rods'):
            if key not in self.header:
                raise TrajectoryFormatError(None, f"header lacks '{key}'")
        if self.header['format_version'] != FORMAT_VERSION:
            raise TrajectoryFormatError(None, f"unsupported format version {self.header['format_version']}")

        sizes = {'3': 3, 'N': int(self.header['n_nodes']), 'E': int(self.header['n_elements'])}
        if self.times.ndim != 1:
            raise TrajectoryFormatError(None, "times must be one-dimensional")
        n_frames = self.n_frames
        for name, trailing in FRAME_ARRAYS.items():
            array = getattr(self, name)
            expected = tuple(sizes[s] for s in trailing)
            if array.shape[1:] != expected:
                raise TrajectoryFormatError(0, f"'{name}' has frame shape {array.shape[1:]}, expected {expected}")
            if array.shape[0] != n_frames:
                raise TrajectoryFormatError(min(array.shape[0], n_frames),
                                            f"'{name}' holds {array.shape[0]} frames, times hold {n_frames}")

        steps = np.diff(self.times)
        if np.any(~(steps > 0.0)):
            raise TrajectoryFormatError(int(np.argmax(~(steps > 0.0))) + 1, "times are not increasing")
        bad = ~np.all(np.isfinite(self.positions.reshape(n_frames, -1)), axis=1)
        if np.any(bad):
            raise TrajectoryFormatError(int(np.argmax(bad)), "non-finite node positions")

    def to_csv(self, path: Union[str, Path], stride: int = 1) -> Path:
        """One row per node per frame"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        rods = self.rods
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(CSV_COLUMNS)
            for frame in range(0, self.n_frames, stride):
                x = self.positions[frame]
                v = self.velocities[frame]
                for rod in rods:
                    for local, node in enumerate(range(rod.nodes.start, rod.nodes.stop)):
                        writer.writerow([frame, repr(float(self.times[frame])), rod.name, local,
                                         *(repr(float(c)) for c in x[:, node]),
                                         *(repr(float(c)) for c in v[:, node])])
        return path


class TrajectoryRecorder:
    """Collects frames of a running simulation into a :class:`TrajectoryRecord`"""

    def __init__(self, header: Dict[str, Any], state: RodState):
        self.header = dict(header)
        self.header.update({
            'format_version': FORMAT_VERSION,
            'units': UNITS,
            'n_nodes': state.n_nodes,
            'n_elements': state.n_elements,
            'rods': rods_to_header(state.rods),
        })
        self.frames: Dict[str, List[np.ndarray]] = {name: [] for name in FRAME_ARRAYS}
        self.times: List[float] = []
        self.knots: List[np.ndarray] = []
        self.process = psutil.Process()
        self.peak_rss = self.process.memory_info().rss

    @property
    def n_frames(self) -> int:
        return len(self.times)

    def capture(self, time: float, state: RodState, activation: np.ndarray) -> None:
        self.times.append(float(time))
        self.frames['positions'].append(state.node_positions.copy())
        self.frames['directors'].append(state.directors.copy())
        self.frames['velocities'].append(state.node_velocities.copy())
        self.frames['omegas'].append(state.angular_velocities.copy())
        self.frames['radii'].append(state.current_radii.copy())
        self.frames['activations'].append(np.asarray(activation, dtype=float).copy())
        self.peak_rss = max(self.peak_rss, self.process.memory_info().rss)

    def capture_knots(self, time: float, quantities) -> None:
        self.knots.append(np.array([time, *quantities.as_row()]))

    def finish(self, footer: Dict[str, Any]) -> TrajectoryRecord:
        footer = dict(footer)
        footer['peak_rss_bytes'] = int(self.peak_rss)
        footer['n_frames'] = self.n_frames
        footer['energy'] = {k: _finite_or_none(v) for k, v in footer.get('energy', {}).items()}

        def stack(name: str, trailing) -> np.ndarray:
            if self.frames[name]:
                return np.stack(self.frames[name])
            sizes = {'3': 3, 'N': self.header['n_nodes'], 'E': self.header['n_elements']}
            return np.zeros((0, *(sizes[s] for s in trailing)))

        return TrajectoryRecord(
            header=self.header,
            footer=footer,
            times=np.asarray(self.times, dtype=float),
            knots=np.stack(self.knots) if self.knots else None,
            **{name: stack(name, trailing) for name, trailing in FRAME_ARRAYS.items()},
        )
