"""
Intramuscular pressure
"""

from .pressure import (PressureCoupling, PressureCouplingSet, PressurePlugin, cancelled_force,
                       intramuscular_pressure_force, patch_area, radial_stress)

__all__ = ['PressureCoupling', 'PressureCouplingSet', 'PressurePlugin', 'cancelled_force',
           'intramuscular_pressure_force', 'patch_area', 'radial_stress']
