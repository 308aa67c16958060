"""
Anisotropic quadratic drag per element
"""

from dataclasses import dataclass
from typing import Any, Dict, Sequence, Tuple

import numpy as np

from core.errors import ConfigurationError
from core.plugin import InteractionPlugin
from core.rotations import batch_dot, batch_norm


@dataclass(frozen=True)
class DragParams:
    water_density: float = 1022.0
    tangential_coefficient: float = 0.0256
    perpendicular_coefficient: float = 1.01

    def __post_init__(self):
        for name in ('water_density', 'tangential_coefficient', 'perpendicular_coefficient'):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"interactions.drag.{name}", "must be >= 0")

    @classmethod
    def from_config(cls, section: Dict[str, Any]) -> "DragParams":
        values = {}
        for name in ('water_density', 'tangential_coefficient', 'perpendicular_coefficient'):
            if name in (section or {}):
                try:
                    values[name] = float(section[name])
                except (TypeError, ValueError) as e:
                    raise ConfigurationError(f"interactions.drag.{name}", "not a number") from e
        return cls(**values)


def drag_forces(tangent: np.ndarray, velocity: np.ndarray, radius: np.ndarray, length: np.ndarray,
                params: DragParams) -> Tuple[np.ndarray, np.ndarray]:
    """Tangential and perpendicular drag, F = -0.5 rho_w A C |v| v per component.

    A_t = 2 pi r l, A_p = 2 r l. ``tangent`` need not be normalised.
    """
    unit = tangent / batch_norm(tangent)
    v_t = batch_dot(velocity, unit) * unit
    v_p = velocity - v_t
    area_t = 2.0 * np.pi * radius * length
    area_p = 2.0 * radius * length
    f_t = -0.5 * params.water_density * area_t * params.tangential_coefficient * batch_norm(v_t) * v_t
    f_p = -0.5 * params.water_density * area_p * params.perpendicular_coefficient * batch_norm(v_p) * v_p
    return f_t, f_p


class DragPlugin(InteractionPlugin):
    """Element-wise drag on selected rod groups"""

    def __init__(self, name: str, config: Dict[str, Any]):
        super().__init__(name, config)
        self.params = DragParams.from_config(config)
        self.groups: Sequence[str] = tuple(config.get('groups', ('OM_L', 'OM_R')))
        self.elements = np.zeros(0, dtype=int)

    def setup(self, assembly) -> None:
        self.elements = np.flatnonzero(np.isin(assembly.element_group, self.groups))
        self.logger.info(f"Drag on {self.elements.size} elements of {list(self.groups)}")

    def apply(self, assembly, time: float, buffers) -> None:
        if self.elements.size == 0:
            return
        state = assembly.state
        e = self.elements
        velocity = state.element_velocities()[:, e]
        f_t, f_p = drag_forces(state.element_vectors()[:, e], velocity, state.current_radii[e],
                               state.element_lengths()[e], self.params)
        force = f_t + f_p
        buffers.add_element_forces(e, force)
        buffers.add_dissipation(float(-np.sum(batch_dot(force, velocity))))
        self.calls += 1
