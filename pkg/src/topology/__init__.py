"""
Link, writhe and twist of open ribbons
"""

from .knots import KnotQuantities, cfw_check, knot_quantities, link, segment_pair_solid_angle, set_threads, writhe
from .ribbon import DEFAULT_EXTENSION, RibbonFrame, extend_curve, node_tangents, segment_tangents, twist

__all__ = [
    'DEFAULT_EXTENSION',
    'KnotQuantities',
    'RibbonFrame',
    'cfw_check',
    'extend_curve',
    'knot_quantities',
    'link',
    'node_tangents',
    'segment_pair_solid_angle',
    'segment_tangents',
    'set_threads',
    'twist',
    'writhe',
]
