"""
Zero-displacement clamps
"""

from typing import Iterable

import numpy as np

from .rod import RodState


class Clamp:
    """Resets clamped nodes (and optionally element frames) to their rest values.

    Applied after every integration step, so clamped entries never drift.
    """

    def __init__(self, state: RodState, nodes: Iterable[int], elements: Iterable[int] = ()):
        self.nodes = np.asarray(sorted(set(int(n) for n in nodes)), dtype=int)
        self.elements = np.asarray(sorted(set(int(e) for e in elements)), dtype=int)
        self.rest_positions = state.node_positions[:, self.nodes].copy()
        self.rest_directors = state.directors[:, :, self.elements].copy()

    def apply(self, state: RodState) -> None:
        if self.nodes.size:
            state.node_positions[:, self.nodes] = self.rest_positions
            state.node_velocities[:, self.nodes] = 0.0
        if self.elements.size:
            state.directors[:, :, self.elements] = self.rest_directors
            state.angular_velocities[:, self.elements] = 0.0

    def __len__(self) -> int:
        return int(self.nodes.size + self.elements.size)
