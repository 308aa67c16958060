"""
Fluid drag
"""

from .drag import DragParams, DragPlugin, drag_forces

__all__ = ['DragParams', 'DragPlugin', 'drag_forces']
