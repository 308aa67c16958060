"""
Hydrostat core: rods, configuration, logging and the plugin registry
"""

__version__ = "0.1.0"
