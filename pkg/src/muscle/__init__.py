"""
Muscle constitutive laws and activation schedules
"""

from .activation import ActivationSchedule, evaluate_activation, schedules_from_config
from .field import MuscleField
from .material import (MuscleMaterial, active_stress, axial_internal_force, force_length, force_velocity,
                       load_coefficient_file, passive_stress, resolve_materials, unit_material)

__all__ = ['ActivationSchedule', 'MuscleField', 'MuscleMaterial', 'active_stress', 'axial_internal_force',
           'evaluate_activation', 'force_length', 'force_velocity', 'load_coefficient_file',
           'passive_stress', 'resolve_materials', 'schedules_from_config', 'unit_material']
