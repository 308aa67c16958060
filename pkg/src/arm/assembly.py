"""
The assembled arm and the buffers interaction loads are gathered into
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from core.boundary import Clamp
from core.rod import RodElasticity, RodState
from core.simulator import LoadBuffers
from plugins.connections import ConnectionSet
from plugins.contact import ContactPairSet
from plugins.pressure import PressureCouplingSet

from .spec import ArmSpec


@dataclass
class ArmAssembly:
    """Packed rods of an arm with their coupling declarations.

    ``element_group`` holds the rod group of every element (ANC, LM, TM,
    OM_L, OM_R), ``element_rank`` the rod's index inside its group and
    ``arc_length`` the rest height of the element centre along the arm axis.
    """
    spec: ArmSpec
    state: RodState
    elasticity: RodElasticity
    element_group: np.ndarray
    element_rank: np.ndarray
    arc_length: np.ndarray
    connections: ConnectionSet
    contact_pairs: ContactPairSet
    pressure: PressureCouplingSet
    clamps: List[Clamp]
    muscle: Optional[object] = None
    obstacles: List[object] = field(default_factory=list)
    plugins: List[object] = field(default_factory=list)

    def new_buffers(self) -> LoadBuffers:
        return LoadBuffers(self.state)

    def axial_override(self, state: RodState, time: float) -> Optional[np.ndarray]:
        if self.muscle is None:
            return None
        return self.muscle.axial_override(state, time)

    def activation(self, time: float) -> np.ndarray:
        if self.muscle is None:
            return np.zeros(self.state.n_elements)
        return self.muscle.activation(time)

    def gather(self, time: float) -> LoadBuffers:
        return gather_assembly_loads(self, time, self.plugins)

    def rods_of(self, group: str):
        return self.state.rods_in_group(group)

    @property
    def anc(self):
        return self.state.rods_in_group('ANC')[0]

    def arm_length(self, state: Optional[RodState] = None) -> float:
        """Height of the ANC tip above the base"""
        state = self.state if state is None else state
        return float(state.node_positions[2, self.anc.nodes.stop - 1] - state.node_positions[2, self.anc.nodes.start])


def gather_assembly_loads(assembly: ArmAssembly, time: float, plugins) -> LoadBuffers:
    """Run every interaction plugin in pipeline order into one buffer"""
    buffers = assembly.new_buffers()
    for plugin in plugins:
        plugin.apply(assembly, time, buffers)
    return buffers


def rod_census(assembly: ArmAssembly) -> Dict[str, int]:
    census: Dict[str, int] = {}
    for rod in assembly.state.rods:
        census[rod.group] = census.get(rod.group, 0) + 1
    return census
