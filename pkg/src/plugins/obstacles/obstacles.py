"""
Fixed rigid cylinders: penalty contact with damping and Coulomb-capped friction
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from core.errors import ConfigurationError
from core.logger import logger
from core.plugin import InteractionPlugin
from core.rotations import batch_dot, batch_norm

# Slip below this speed is treated as stick
STICK_SPEED = 1e-6
ENGINE_DEFAULT = "engine default, not paper value"


@dataclass(frozen=True)
class RigidCylinder:
    start: np.ndarray
    end: np.ndarray
    radius: float
    n_elements: int = 10
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    name: str = "obstacle"

    def __post_init__(self):
        object.__setattr__(self, 'start', np.asarray(self.start, dtype=float).reshape(3))
        object.__setattr__(self, 'end', np.asarray(self.end, dtype=float).reshape(3))
        object.__setattr__(self, 'velocity', np.asarray(self.velocity, dtype=float).reshape(3))
        if not self.radius > 0:
            raise ConfigurationError('radius', "must be > 0")
        if not isinstance(self.n_elements, int) or self.n_elements < 1:
            raise ConfigurationError('n_elements', "must be an integer >= 1")
        if np.linalg.norm(self.end - self.start) == 0.0:
            raise ConfigurationError('end', "cylinder axis has zero length")

    def element_endpoints(self) -> Tuple[np.ndarray, np.ndarray]:
        """Axis segments of the discretised cylinder, each (3, n_elements)"""
        t = np.linspace(0.0, 1.0, self.n_elements + 1)
        points = self.start[:, None] + (self.end - self.start)[:, None] * t
        return points[:, :-1], points[:, 1:]

    def nearest_axis_points(self, points: np.ndarray) -> np.ndarray:
        """Closest point on any axis element to each of ``points`` (3, n), by linear scan"""
        seg_a, seg_b = self.element_endpoints()
        best = np.zeros_like(points)
        best_distance = np.full(points.shape[1], np.inf)
        for k in range(self.n_elements):
            a, b = seg_a[:, k:k + 1], seg_b[:, k:k + 1]
            axis = b - a
            t = np.clip(batch_dot(points - a, np.broadcast_to(axis, points.shape)) / float(axis[:, 0] @ axis[:, 0]),
                        0.0, 1.0)
            candidate = a + axis * t
            distance = batch_norm(points - candidate)
            closer = distance < best_distance
            best[:, closer] = candidate[:, closer]
            best_distance[closer] = distance[closer]
        return best


@dataclass(frozen=True)
class ContactParams:
    stiffness: float = 1e4
    damping: float = 0.1
    friction_coefficient: float = 0.5
    friction_damping: float = 0.1
    provenance: str = ENGINE_DEFAULT

    def __post_init__(self):
        for name in ('stiffness', 'damping', 'friction_coefficient', 'friction_damping'):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"interactions.obstacles.{name}", "must be >= 0")

    @classmethod
    def from_config(cls, section: Dict[str, Any]) -> "ContactParams":
        section = dict(section or {})
        values = {}
        for name in ('stiffness', 'damping', 'friction_coefficient', 'friction_damping'):
            if name in section:
                try:
                    values[name] = float(section[name])
                except (TypeError, ValueError) as e:
                    raise ConfigurationError(f"interactions.obstacles.{name}", "not a number") from e
        if values:
            values['provenance'] = str(section.get('provenance', 'scenario value'))
        return cls(**values)


def obstacle_normal_force(center: np.ndarray, velocity: np.ndarray, radius: np.ndarray,
                          axis_point: np.ndarray, cylinder: RigidCylinder,
                          params: ContactParams) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """F = H(eps)(-k_r eps - g_r v.d_hat) d_hat, with d_hat from rod element to obstacle axis.

    ``velocity`` is the rod element velocity; the obstacle's own velocity is
    subtracted. Returns (force, overlap, d_hat), all per element.
    """
    delta = axis_point - center
    distance = batch_norm(delta)
    direction = delta / np.where(distance > 0.0, distance, 1.0)
    overlap = radius + cylinder.radius - distance
    relative = velocity - cylinder.velocity[:, None]
    normal_speed = batch_dot(relative, direction)
    magnitude = -params.stiffness * overlap - params.damping * normal_speed
    force = np.where(overlap > 0.0, magnitude, 0.0) * direction
    return force, overlap, direction


def obstacle_friction_force(velocity: np.ndarray, direction: np.ndarray, normal_force: np.ndarray,
                            cylinder: RigidCylinder, params: ContactParams) -> np.ndarray:
    """F_f = -min(g_f |v_s|, mu |F_r|) v_s / |v_s|; zero below the stick speed"""
    relative = velocity - cylinder.velocity[:, None]
    slip = relative - batch_dot(relative, direction) * direction
    slip_speed = batch_norm(slip)
    cap = params.friction_coefficient * batch_norm(normal_force)
    magnitude = np.minimum(params.friction_damping * slip_speed, cap)
    sliding = slip_speed >= STICK_SPEED
    unit = slip / np.where(sliding, slip_speed, 1.0)
    return np.where(sliding, -magnitude, 0.0) * unit


def obstacles_from_config(entries: List[Dict[str, Any]]) -> List[RigidCylinder]:
    if not isinstance(entries, list):
        raise ConfigurationError('obstacles', "expected a list")
    cylinders = []
    for k, entry in enumerate(entries):
        prefix = f"obstacles[{k}]"
        if not isinstance(entry, dict):
            raise ConfigurationError(prefix, "expected a mapping")
        for key in ('start', 'end', 'radius'):
            if key not in entry:
                raise ConfigurationError(f"{prefix}.{key}", "missing required value")
        try:
            cylinders.append(RigidCylinder(
                start=np.asarray(entry['start'], dtype=float),
                end=np.asarray(entry['end'], dtype=float),
                radius=float(entry['radius']),
                n_elements=int(entry.get('n_elements', 10)),
                name=str(entry.get('name', f"obstacle_{k}")),
            ))
        except ConfigurationError as e:
            raise ConfigurationError(f"{prefix}.{e.field}", e.message) from e
        except (TypeError, ValueError) as e:
            raise ConfigurationError(prefix, f"bad value: {e}") from e
    return cylinders


class ObstaclesPlugin(InteractionPlugin):
    """Contact and friction between selected rod groups and fixed cylinders"""

    def __init__(self, name: str, config: Dict[str, Any]):
        super().__init__(name, config)
        self.params = ContactParams.from_config(config)
        self.groups: Sequence[str] = tuple(config.get('groups', ('OM_L', 'OM_R', 'TM')))
        self.elements = np.zeros(0, dtype=int)
        self.contacts = 0

    def setup(self, assembly) -> None:
        self.elements = np.flatnonzero(np.isin(assembly.element_group, self.groups))
        if self.params.provenance == ENGINE_DEFAULT:
            logger.log_event('provenance', {'parameter': 'interactions.obstacles',
                                            'value': self.params.__dict__, 'provenance': ENGINE_DEFAULT})
            self.logger.info(f"Obstacle contact parameters are {ENGINE_DEFAULT}")

    def apply(self, assembly, time: float, buffers) -> None:
        if self.elements.size == 0 or not assembly.obstacles:
            return
        state = assembly.state
        e = self.elements
        centers = state.element_centers()[:, e]
        velocities = state.element_velocities()[:, e]
        radii = state.current_radii[e]
        for cylinder in assembly.obstacles:
            axis_points = cylinder.nearest_axis_points(centers)
            normal, overlap, direction = obstacle_normal_force(centers, velocities, radii, axis_points,
                                                               cylinder, self.params)
            active = overlap > 0.0
            if not np.any(active):
                continue
            friction = obstacle_friction_force(velocities, direction, normal, cylinder, self.params)
            friction[:, ~active] = 0.0
            buffers.add_element_forces(e, normal + friction)

            relative = velocities - cylinder.velocity[:, None]
            normal_speed = batch_dot(relative, direction)
            power = self.params.damping * normal_speed ** 2 - batch_dot(friction, relative)
            buffers.add_dissipation(float(np.sum(power[active])))
            self.contacts += int(np.count_nonzero(active))
        self.calls += 1

    def get_status(self) -> Dict[str, Any]:
        status = super().get_status()
        status['contacts'] = self.contacts
        return status
