"""
Rod-rod contact
"""

from .contact import (ContactPair, ContactPairSet, RodContactPlugin, contact_forces, contact_timestep,
                      hertz_stiffness, rod_contact_force)

__all__ = ['ContactPair', 'ContactPairSet', 'RodContactPlugin', 'contact_forces', 'contact_timestep',
           'hertz_stiffness', 'rod_contact_force']
