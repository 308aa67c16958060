"""
Elastic inter-rod connections
"""

from .connections import Connection, ConnectionSet, ConnectionsPlugin, connection_loads, connection_timestep

__all__ = ['Connection', 'ConnectionSet', 'ConnectionsPlugin', 'connection_loads', 'connection_timestep']
