"""
Per-element binding of muscle materials and activation schedules
"""

from typing import Dict, List, Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

from core.rod import RodState
from core.rotations import batch_cross, batch_dot, batch_matTvec

from .activation import ActivationSchedule, combine_activations, evaluate_activation
from .material import MuscleMaterial, active_stress, axial_internal_force, force_velocity, passive_stress

# Rod group -> material group
GROUP_MATERIAL = {'ANC': 'ANC', 'LM': 'LM', 'TM': 'TM', 'OM_L': 'OM', 'OM_R': 'OM'}


def schedule_matches(schedule: ActivationSchedule, group: str) -> bool:
    if schedule.group == 'OM':
        return group in ('OM_L', 'OM_R')
    return schedule.group == group


def axial_strain_rate(state: RodState) -> np.ndarray:
    """d/dt of eps3 = d3 . dx / l0, with d3_dot = w_lab x d3"""
    a, b = state.element_nodes
    dx = state.element_vectors()
    dv = state.node_velocities[:, b] - state.node_velocities[:, a]
    d3 = state.directors[2]
    omega_lab = batch_matTvec(state.directors, state.angular_velocities)
    d3_dot = batch_cross(omega_lab, d3)
    return (batch_dot(d3_dot, dx) + batch_dot(d3, dv)) / state.reference_lengths


class MuscleField:
    """Evaluates n3 for every muscle element of a rod block.

    ``element_group`` names each element's rod group, ``element_rank`` the
    rod's index within its group (used by schedules restricted to ``rods``),
    ``arc_length`` the element's rest distance along the arm axis in metres.
    Elements whose group has no material keep the linear law (NaN override).
    """

    def __init__(self, element_group: np.ndarray, element_rank: np.ndarray, arc_length: np.ndarray,
                 total_length: float, materials: Dict[str, MuscleMaterial],
                 schedules: Sequence[ActivationSchedule] = ()):
        self.element_group = np.asarray(element_group)
        self.element_rank = np.asarray(element_rank, dtype=int)
        self.arc_length = np.asarray(arc_length, dtype=float)
        self.total_length = float(total_length)
        self.materials = materials
        self.schedules: List[ActivationSchedule] = list(schedules)

        self.group_masks: Dict[str, np.ndarray] = {}
        for group, material_group in GROUP_MATERIAL.items():
            mask = self.element_group == group
            if np.any(mask) and material_group in materials:
                self.group_masks[group] = mask
        self.muscle_mask = np.zeros(self.element_group.shape, dtype=bool)
        for mask in self.group_masks.values():
            self.muscle_mask |= mask

        self._schedule_masks = [self._mask_for(s) for s in self.schedules]

    def _mask_for(self, schedule: ActivationSchedule) -> np.ndarray:
        mask = np.zeros(self.element_group.shape, dtype=bool)
        for group in self.group_masks:
            if schedule_matches(schedule, group):
                mask |= self.element_group == group
        if schedule.rods is not None:
            mask &= np.isin(self.element_rank, schedule.rods)
        return mask

    def material_for(self, group: str) -> MuscleMaterial:
        return self.materials[GROUP_MATERIAL[group]]

    def activation(self, time: float) -> np.ndarray:
        if not self.schedules:
            return np.zeros(self.element_group.shape)
        s_normalized = self.arc_length / self.total_length
        values = []
        for schedule, mask in zip(self.schedules, self._schedule_masks):
            s = s_normalized if schedule.normalized else self.arc_length
            values.append(np.where(mask, evaluate_activation(schedule, s, time), 0.0))
        return combine_activations(values)

    def compression_modulus(self) -> np.ndarray:
        """Per-element E_c (0 outside muscle) for the time-step bound"""
        modulus = np.zeros(self.element_group.shape)
        for group, mask in self.group_masks.items():
            modulus[mask] = self.material_for(group).compression_modulus
        return modulus

    def axial_override(self, state: RodState, time: float,
                       activation: Optional[np.ndarray] = None) -> np.ndarray:
        override = np.full(state.n_elements, np.nan)
        if not self.group_masks:
            return override
        if activation is None:
            activation = self.activation(time)

        strain = batch_dot(state.directors[2], state.element_vectors()) / state.reference_lengths - 1.0
        rate = axial_strain_rate(state)
        area = np.pi * state.current_radii ** 2

        for group, mask in self.group_masks.items():
            material = self.material_for(group)
            sigma_a = active_stress(activation[mask], strain[mask], rate[mask], material)
            sigma_p = passive_stress(strain[mask], material)
            override[mask] = axial_internal_force(area[mask], sigma_a, sigma_p)
        return override

    def tangent_modulus_bound(self, strain_range: float = 0.5, samples: int = 201) -> np.ndarray:
        """Per-element upper estimate of d(sigma)/d(eps) over |eps| <= strain_range.

        Covers full activation at the lengthening plateau of f_v, so the
        time-step bound holds for any schedule.
        """
        modulus = np.zeros(self.element_group.shape)
        strain = np.linspace(-strain_range, strain_range, samples)
        for group, mask in self.group_masks.items():
            material = self.material_for(group)
            active_slope = np.max(np.abs(np.gradient(
                material.sigma_max * np.maximum(P.polyval(strain + 1.0, material.active_coeffs), 0.0), strain)))
            passive_slope = np.max(np.abs(np.gradient(passive_stress(strain, material), strain)))
            plateau = float(force_velocity(-10.0 * material.min_strain_rate, material))
            modulus[mask] = max(material.compression_modulus, plateau * active_slope + passive_slope)
        return modulus
