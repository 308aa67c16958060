"""
Intramuscular pressure: opposed radial contact forces become axial elongation
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from core.plugin import InteractionPlugin
from core.rod import RodState, scatter_add
from core.rotations import batch_norm


@dataclass
class PressureCoupling:
    element: int
    contributing_pairs: np.ndarray


@dataclass
class PressureCouplingSet:
    """Target elements and the contact pairs that load them"""
    elements: np.ndarray

    @classmethod
    def for_elements(cls, elements) -> "PressureCouplingSet":
        return cls(np.asarray(sorted(set(int(e) for e in elements)), dtype=int))

    def __len__(self) -> int:
        return int(self.elements.size)

    def coupling(self, k: int, contact_pairs) -> PressureCoupling:
        element = int(self.elements[k])
        pairs = np.flatnonzero((contact_pairs.element_i == element) | (contact_pairs.element_j == element))
        return PressureCoupling(element, pairs)


def cancelled_force(forces: np.ndarray) -> float:
    """Magnitude of the contact force that cancels out: (sum |F_k| - |sum F_k|) / 2"""
    forces = np.asarray(forces, dtype=float).reshape(3, -1)
    if forces.shape[1] == 0:
        return 0.0
    return 0.5 * max(float(np.sum(batch_norm(forces)) - np.linalg.norm(np.sum(forces, axis=1))), 0.0)


def patch_area(radius, length):
    """A_c = 2 r l, the lateral patch the radial stress acts on"""
    return 2.0 * np.asarray(radius, dtype=float) * np.asarray(length, dtype=float)


def radial_stress(cancelled: np.ndarray, radius: np.ndarray, length: np.ndarray) -> np.ndarray:
    """sigma_r: cancelled force over the patch area"""
    return cancelled / patch_area(radius, length)


def intramuscular_pressure_force(contact_forces: np.ndarray, radius: float, length: float,
                                 tangent: np.ndarray) -> Tuple[np.ndarray, float]:
    """F_a = -A_c sigma_r d3 for one element, with sigma_r >= 0.

    The same A_c normalises the stress and projects it back, so |F_a| is the
    cancelled contact force. The caller applies F_a to the proximal node and
    -F_a to the distal node.
    """
    sigma_r = float(radial_stress(cancelled_force(contact_forces), radius, length))
    area = float(patch_area(radius, length))
    return -area * sigma_r * np.asarray(tangent, dtype=float), sigma_r


class PressurePlugin(InteractionPlugin):
    """Converts the contact log of ANC and LM elements into axial node pairs"""

    def setup(self, assembly) -> None:
        self.logger.info(f"{len(assembly.pressure)} pressure couplings")
        self.max_stress = 0.0

    def apply(self, assembly, time: float, buffers) -> None:
        couplings = assembly.pressure
        if len(couplings) == 0 or buffers.contact_i.size == 0:
            return
        state: RodState = assembly.state
        n = state.n_elements

        magnitude = batch_norm(buffers.contact_force)
        total_magnitude = np.zeros(n)
        scatter_add(total_magnitude, buffers.contact_i, magnitude)
        scatter_add(total_magnitude, buffers.contact_j, magnitude)
        resultant = np.zeros((3, n))
        scatter_add(resultant, buffers.contact_i, buffers.contact_force)
        scatter_add(resultant, buffers.contact_j, -buffers.contact_force)

        e = couplings.elements
        cancelled = np.maximum(0.5 * (total_magnitude[e] - batch_norm(resultant[:, e])), 0.0)
        lengths = state.element_lengths()[e]
        area = patch_area(state.current_radii[e], lengths)
        sigma_r = cancelled / area
        axial = -area * sigma_r * state.directors[2][:, e]

        a, b = state.element_nodes[:, e]
        buffers.add_node_forces(a, axial)
        buffers.add_node_forces(b, -axial)
        self.max_stress = max(self.max_stress, float(np.max(sigma_r)))
        self.calls += 1

    def get_status(self):
        status = super().get_status()
        status['max_radial_stress'] = getattr(self, 'max_stress', 0.0)
        return status
