"""
Activation templates f_a(s, t)
"""

from dataclasses import dataclass, fields
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit

from core.errors import ConfigurationError

TEMPLATES = ('ramp', 'traveling_wave', 'sigmoid_wavefront')
# OM drives both hands; OM_L / OM_R select one
ACTIVATION_GROUPS = ('LM', 'TM', 'OM', 'OM_L', 'OM_R')

# Peak slope of the smoothstep ramp, relative to amplitude / ramp_duration. One step
# changes f_a by at most 1.5 amplitude dt / ramp_duration; amplitude / ramp_duration
# is only the mean slope.
RAMP_PEAK_SLOPE = 1.5

ArrayLike = Union[float, np.ndarray]


def smoothstep(x: ArrayLike) -> ArrayLike:
    x = np.clip(x, 0.0, 1.0)
    return x * x * (3.0 - 2.0 * x)


@dataclass(frozen=True)
class ActivationSchedule:
    template: str
    group: str
    amplitude: float = 1.0
    onset: float = 0.0
    ramp_duration: float = 0.1
    s_start: float = 0.0
    s_end: float = 1.0
    speed: float = 0.0
    width: float = 0.2
    steepness: float = 40.0
    normalized: bool = True
    rods: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        if self.template not in TEMPLATES:
            raise ConfigurationError('template', f"unknown template {self.template!r}; known: {list(TEMPLATES)}")
        if self.group not in ACTIVATION_GROUPS:
            raise ConfigurationError('group', f"unknown muscle group {self.group!r}; known: {list(ACTIVATION_GROUPS)}")
        if not 0.0 <= self.amplitude <= 1.0:
            raise ConfigurationError('amplitude', f"must lie in [0, 1], got {self.amplitude}")
        if not self.ramp_duration > 0:
            raise ConfigurationError('ramp_duration', "must be > 0")
        if not self.width > 0:
            raise ConfigurationError('width', "must be > 0")
        if self.steepness < 0:
            raise ConfigurationError('steepness', "must be >= 0")
        if self.s_end < self.s_start:
            raise ConfigurationError('s_end', "must be >= s_start")
        if self.onset < 0:
            raise ConfigurationError('onset', "must be >= 0")

    def max_step_change(self, dt: float) -> float:
        """Largest change of f_a over one step of the time ramp"""
        return RAMP_PEAK_SLOPE * self.amplitude * dt / self.ramp_duration


def evaluate_activation(schedule: ActivationSchedule, s: ArrayLike, t: float) -> ArrayLike:
    """f_a in [0, 1] at arc-length ``s`` (in the schedule's units) and time ``t``"""
    s = np.asarray(s, dtype=float)
    if t < schedule.onset:
        return np.zeros_like(s)
    elapsed = t - schedule.onset
    ramp = smoothstep(elapsed / schedule.ramp_duration)

    if schedule.template == 'ramp':
        inside = (s >= schedule.s_start) & (s <= schedule.s_end)
        value = np.where(inside, schedule.amplitude * ramp, 0.0)

    elif schedule.template == 'traveling_wave':
        half = 0.5 * schedule.width
        center = schedule.s_start - half + schedule.speed * elapsed
        offset = s - center
        bump = 0.5 * (1.0 + np.cos(np.pi * offset / half))
        inside = (np.abs(offset) < half) & (s >= schedule.s_start) & (s <= schedule.s_end)
        value = np.where(inside, schedule.amplitude * bump, 0.0)

    else:
        front = schedule.s_start + schedule.speed * elapsed
        value = schedule.amplitude * ramp * expit(-schedule.steepness * (s - front))

    return np.clip(value, 0.0, 1.0)


def combine_activations(values: Sequence[np.ndarray]) -> np.ndarray:
    """Overlapping schedules combine by maximum"""
    return np.clip(np.max(np.stack(values), axis=0), 0.0, 1.0)


_FIELDS = {f.name for f in fields(ActivationSchedule)}


def schedule_from_dict(entry: Dict[str, Any], index: int = 0) -> ActivationSchedule:
    prefix = f"activations[{index}]"
    if not isinstance(entry, dict):
        raise ConfigurationError(prefix, "expected a mapping")
    for key in entry:
        if key not in _FIELDS:
            raise ConfigurationError(f"{prefix}.{key}", "unknown field")
    for key in ('template', 'group'):
        if key not in entry:
            raise ConfigurationError(f"{prefix}.{key}", "missing required value")

    kwargs = dict(entry)
    if kwargs.get('rods') is not None:
        try:
            kwargs['rods'] = tuple(int(r) for r in kwargs['rods'])
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"{prefix}.rods", "expected a list of rod indices") from e
    for key in ('amplitude', 'onset', 'ramp_duration', 's_start', 's_end', 'speed', 'width', 'steepness'):
        if key in kwargs:
            try:
                kwargs[key] = float(kwargs[key])
            except (TypeError, ValueError) as e:
                raise ConfigurationError(f"{prefix}.{key}", f"not a number: {kwargs[key]!r}") from e
    try:
        return ActivationSchedule(**kwargs)
    except ConfigurationError as e:
        raise ConfigurationError(f"{prefix}.{e.field}", e.message) from e


def schedules_from_config(entries: List[Dict[str, Any]]) -> List[ActivationSchedule]:
    if not isinstance(entries, list):
        raise ConfigurationError('activations', "expected a list")
    return [schedule_from_dict(entry, i) for i, entry in enumerate(entries)]
