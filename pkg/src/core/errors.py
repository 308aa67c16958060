"""
Exception hierarchy for Hydrostat
"""

from typing import Optional


class HydrostatError(Exception):
    """Base class for all engine errors"""


class ConfigurationError(HydrostatError):
    """Invalid scenario, engine or coefficient configuration.

    ``field`` is the dotted path of the offending entry (``simulation.dt``,
    ``materials.coefficient_file``) and ``line`` the 1-based source line when
    the problem was found while parsing a file.
    """

    def __init__(self, field: str, message: str, line: Optional[int] = None):
        self.field = field
        self.message = message
        self.line = line
        location = f"{field} (line {line})" if line is not None else field
        super().__init__(f"{location}: {message}")


class SingularGeometryError(HydrostatError):
    """Zero-length element or undefined tangent"""

    def __init__(self, message: str, rod: Optional[str] = None, element: Optional[int] = None):
        self.rod = rod
        self.element = element
        where = ""
        if rod is not None:
            where = f" [rod {rod}" + (f", element {element}]" if element is not None else "]")
        elif element is not None:
            where = f" [element {element}]"
        super().__init__(message + where)


class InstabilityError(HydrostatError):
    """Non-finite state detected after a time step"""

    def __init__(self, rod: str, step: int, frame: Optional[int] = None):
        self.rod = rod
        self.step = step
        self.frame = frame
        super().__init__(f"non-finite state in rod '{rod}' at step {step}")


class ConstructionError(HydrostatError):
    """Arm assembly could not be built from the given spec"""


class TrajectoryFormatError(HydrostatError):
    """Corrupt or inconsistent trajectory file"""

    def __init__(self, frame_index: Optional[int], message: str):
        self.frame_index = frame_index
        where = f"frame {frame_index}: " if frame_index is not None else ""
        super().__init__(where + message)


class IllConditionedWarning(UserWarning):
    """Segments of two curves are closer than the solid-angle tolerance"""
