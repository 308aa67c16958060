"""
Elastic connections between neighbouring rod elements
"""

from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from core.plugin import InteractionPlugin
from core.rod import RodState
from core.rotations import batch_cross, batch_matTvec, batch_matvec


@dataclass
class Connection:
    """One connected element pair; surface directions are element-local"""
    element_i: int
    element_j: int
    direction_i: np.ndarray
    direction_j: np.ndarray
    stiffness: float
    scale: float = 1.0
    radius_scale: float = 1.0


@dataclass
class ConnectionSet:
    """Connections packed as arrays over C pairs"""
    element_i: np.ndarray
    element_j: np.ndarray
    direction_i: np.ndarray
    direction_j: np.ndarray
    stiffness: np.ndarray
    scale: np.ndarray
    radius_scale: np.ndarray

    @classmethod
    def empty(cls) -> "ConnectionSet":
        return cls(np.zeros(0, dtype=int), np.zeros(0, dtype=int), np.zeros((3, 0)), np.zeros((3, 0)),
                   np.zeros(0), np.zeros(0), np.zeros(0))

    @classmethod
    def from_rest(cls, state: RodState, element_i: np.ndarray, element_j: np.ndarray,
                  youngs_modulus: np.ndarray, scale: float = 1.0) -> "ConnectionSet":
        """Connections whose surface points coincide in ``state``.

        The surface direction is the unit centre-to-centre vector, so
        s_j = -s_i at rest; attachment radii are scaled by d / (r_i + r_j).
        """
        element_i = np.asarray(element_i, dtype=int)
        element_j = np.asarray(element_j, dtype=int)
        centers = state.element_centers()
        delta = centers[:, element_j] - centers[:, element_i]
        distance = np.linalg.norm(delta, axis=0)
        unit = delta / distance
        radii = state.current_radii
        lengths = state.reference_lengths
        return cls(
            element_i=element_i,
            element_j=element_j,
            direction_i=batch_matvec(state.directors[:, :, element_i], unit),
            direction_j=batch_matvec(state.directors[:, :, element_j], -unit),
            stiffness=0.5 * (youngs_modulus[element_i] + youngs_modulus[element_j])
            * np.minimum(lengths[element_i], lengths[element_j]),
            scale=np.full(element_i.size, float(scale)),
            radius_scale=distance / (radii[element_i] + radii[element_j]),
        )

    def __len__(self) -> int:
        return int(self.element_i.size)

    def __getitem__(self, k: int) -> Connection:
        return Connection(int(self.element_i[k]), int(self.element_j[k]), self.direction_i[:, k],
                          self.direction_j[:, k], float(self.stiffness[k]), float(self.scale[k]),
                          float(self.radius_scale[k]))

    def involving(self, element: int) -> np.ndarray:
        return np.flatnonzero((self.element_i == element) | (self.element_j == element))


def connection_loads(connections: ConnectionSet, state: RodState):
    """Forces and lab-frame couples on both elements of every connection.

    Returns ``(force_i, couple_i, force_j, couple_j)``, each (3, C), with
    force_j = -force_i.
    """
    i, j = connections.element_i, connections.element_j
    centers = state.element_centers()
    arm_i = connections.radius_scale * state.current_radii[i] * batch_matTvec(
        state.directors[:, :, i], connections.direction_i)
    arm_j = connections.radius_scale * state.current_radii[j] * batch_matTvec(
        state.directors[:, :, j], connections.direction_j)
    gap = (centers[:, j] + arm_j) - (centers[:, i] + arm_i)
    force_i = connections.scale * connections.stiffness * gap
    force_j = -force_i
    return force_i, batch_cross(arm_i, force_i), force_j, batch_cross(arm_j, force_j)


def connection_timestep(connections: ConnectionSet, state: RodState, elasticity, safety: float) -> float:
    """safety * 2 / omega_max of the stiffest connection spring"""
    if len(connections) == 0:
        return float('inf')
    i, j = connections.element_i, connections.element_j
    element_mass = elasticity.density * elasticity.area * state.reference_lengths
    node_share = 0.5 * element_mass
    k = connections.scale * connections.stiffness
    translational = 1.0 / node_share[i] + 1.0 / node_share[j]
    lever_i = (connections.radius_scale * state.rest_radii[i]) ** 2 / elasticity.mass_second_moment[0, i]
    lever_j = (connections.radius_scale * state.rest_radii[j]) ** 2 / elasticity.mass_second_moment[0, j]
    omega = np.sqrt(np.max(k * np.maximum(translational, lever_i + lever_j)))
    return float(safety * 2.0 / omega) if omega > 0 else float('inf')


class ConnectionsPlugin(InteractionPlugin):
    """Applies the assembly's elastic connections"""

    def setup(self, assembly) -> None:
        self.logger.info(f"{len(assembly.connections)} connections")

    def apply(self, assembly, time: float, buffers) -> None:
        connections = assembly.connections
        if len(connections) == 0:
            return
        force_i, couple_i, force_j, couple_j = connection_loads(connections, assembly.state)
        buffers.add_element_forces(connections.element_i, force_i)
        buffers.add_element_forces(connections.element_j, force_j)
        buffers.add_element_couples(connections.element_i, couple_i)
        buffers.add_element_couples(connections.element_j, couple_j)
        self.calls += 1

    def stable_timestep(self, assembly, safety: float) -> float:
        return connection_timestep(assembly.connections, assembly.state, assembly.elasticity, safety)

    def get_status(self) -> Dict[str, Any]:
        status = super().get_status()
        status['type'] = 'connections'
        return status
