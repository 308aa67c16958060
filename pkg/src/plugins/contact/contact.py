"""
Hertzian repulsion between neighbouring rod elements
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from core.plugin import InteractionPlugin
from core.rod import RodState
from core.rotations import batch_norm

ArrayLike = Union[float, np.ndarray]


def hertz_stiffness(modulus_i, modulus_j, radius_i, radius_j):
    """k_c = (4/3) E* sqrt(R*) with E* = E1 E2 / (E1 + E2), R* = r1 r2 / (r1 + r2)"""
    effective_modulus = modulus_i * modulus_j / (modulus_i + modulus_j)
    effective_radius = radius_i * radius_j / (radius_i + radius_j)
    return 4.0 / 3.0 * effective_modulus * np.sqrt(effective_radius)


@dataclass
class ContactPair:
    element_i: int
    element_j: int
    stiffness: float
    scale: float = 1.0


@dataclass
class ContactPairSet:
    """Static contact candidates packed over P pairs.

    ``radius_scale`` shrinks the contact radii of pairs that overlap at
    rest so the rest configuration carries no contact force.
    ``rest_direction`` is the unit i -> j centre vector at construction.
    """
    element_i: np.ndarray
    element_j: np.ndarray
    stiffness: np.ndarray
    scale: np.ndarray
    radius_scale: np.ndarray
    rest_direction: np.ndarray

    @classmethod
    def empty(cls) -> "ContactPairSet":
        return cls(np.zeros(0, dtype=int), np.zeros(0, dtype=int), np.zeros(0), np.zeros(0),
                   np.zeros(0), np.zeros((3, 0)))

    @classmethod
    def from_rest(cls, state: RodState, element_i, element_j, youngs_modulus: np.ndarray,
                  scale: float = 1.0) -> "ContactPairSet":
        element_i = np.asarray(element_i, dtype=int)
        element_j = np.asarray(element_j, dtype=int)
        centers = state.element_centers()
        delta = centers[:, element_j] - centers[:, element_i]
        distance = batch_norm(delta)
        radii = state.current_radii
        touching = radii[element_i] + radii[element_j]
        return cls(
            element_i=element_i,
            element_j=element_j,
            stiffness=hertz_stiffness(youngs_modulus[element_i], youngs_modulus[element_j],
                                      radii[element_i], radii[element_j]),
            scale=np.full(element_i.size, float(scale)),
            radius_scale=np.minimum(1.0, distance / touching),
            rest_direction=delta / np.where(distance > 0, distance, 1.0),
        )

    def __len__(self) -> int:
        return int(self.element_i.size)

    def __getitem__(self, k: int) -> ContactPair:
        return ContactPair(int(self.element_i[k]), int(self.element_j[k]),
                           float(self.stiffness[k]), float(self.scale[k]))


def rod_contact_force(center_i: np.ndarray, center_j: np.ndarray, radius_i: np.ndarray, radius_j: np.ndarray,
                      scaled_stiffness: np.ndarray, rest_direction: np.ndarray,
                      radius_scale: ArrayLike = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """Force on element i, F = -H(eps) a_c k_c eps^1.5 d_hat, and the overlap eps.

    ``d_hat`` points from i to j; coincident centres use ``rest_direction``.
    Element j receives -F.
    """
    delta = center_j - center_i
    distance = batch_norm(delta)
    coincident = distance == 0.0
    direction = np.where(coincident, rest_direction, delta / np.where(coincident, 1.0, distance))
    overlap = np.asarray(radius_scale) * (radius_i + radius_j) - distance
    magnitude = np.where(overlap > 0.0, scaled_stiffness * np.maximum(overlap, 0.0) ** 1.5, 0.0)
    return -magnitude * direction, overlap


def contact_forces(pairs: ContactPairSet, state: RodState) -> Tuple[np.ndarray, np.ndarray]:
    """Forces on ``element_i`` of every pair and the penetration ratio eps / (r_i + r_j)"""
    i, j = pairs.element_i, pairs.element_j
    centers = state.element_centers()
    radii = state.current_radii
    force, overlap = rod_contact_force(centers[:, i], centers[:, j], radii[i], radii[j],
                                       pairs.scale * pairs.stiffness, pairs.rest_direction,
                                       pairs.radius_scale)
    ratio = np.maximum(overlap, 0.0) / (radii[i] + radii[j])
    return force, ratio


def contact_timestep(pairs: ContactPairSet, state: RodState, elasticity, safety: float,
                     penetration_ratio: float = 0.15) -> float:
    """Step bound from the Hertz tangent stiffness at the allowed penetration"""
    if len(pairs) == 0:
        return float('inf')
    i, j = pairs.element_i, pairs.element_j
    element_mass = elasticity.density * elasticity.area * state.reference_lengths
    overlap = penetration_ratio * (state.rest_radii[i] + state.rest_radii[j])
    tangent = 1.5 * pairs.scale * pairs.stiffness * np.sqrt(overlap)
    omega = np.sqrt(np.max(tangent * (2.0 / element_mass[i] + 2.0 / element_mass[j])))
    return float(safety * 2.0 / omega) if omega > 0 else float('inf')


class RodContactPlugin(InteractionPlugin):
    """Applies rod-rod contact and logs forces for the pressure pathway"""

    def setup(self, assembly) -> None:
        self.logger.info(f"{len(assembly.contact_pairs)} contact pairs")

    def apply(self, assembly, time: float, buffers) -> None:
        pairs = assembly.contact_pairs
        if len(pairs) == 0:
            return
        force, ratio = contact_forces(pairs, assembly.state)
        buffers.add_element_forces(pairs.element_i, force)
        buffers.add_element_forces(pairs.element_j, -force)
        buffers.record_contacts(pairs.element_i, pairs.element_j, force)
        buffers.note_penetration(float(np.max(ratio)))
        self.calls += 1

    def stable_timestep(self, assembly, safety: float) -> float:
        return contact_timestep(assembly.contact_pairs, assembly.state, assembly.elasticity, safety)
