"""
Hydrostat - active Cosserat-rod simulation of muscular-hydrostat arms
"""

__version__ = "0.1.0"
