"""
Rigid cylindrical obstacles
"""

from .obstacles import (ENGINE_DEFAULT, ContactParams, ObstaclesPlugin, RigidCylinder, obstacle_friction_force,
                        obstacle_normal_force, obstacles_from_config)

__all__ = ['ENGINE_DEFAULT', 'ContactParams', 'ObstaclesPlugin', 'RigidCylinder', 'obstacle_friction_force',
           'obstacle_normal_force', 'obstacles_from_config']
