"""
Arm assembly: geometry, rod generation and coupling declarations
"""

from .assembly import ArmAssembly, LoadBuffers, gather_assembly_loads, rod_census
from .builder import arm_geometry, attach_muscles, build_arm, cross_section_audit, om_turns, om_winding_angle
from .spec import ArmSpec

__all__ = ['ArmAssembly', 'ArmSpec', 'LoadBuffers', 'arm_geometry', 'attach_muscles', 'build_arm',
           'cross_section_audit', 'gather_assembly_loads', 'om_turns', 'om_winding_angle', 'rod_census']
