"""
Time stepping of a rod system with interaction loads and an energy ledger
"""

import time as _time
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from .boundary import Clamp
from .logger import logger
from .rod import (
    DampingConfig,
    RodElasticity,
    RodState,
    apply_damping,
    check_finite,
    drift,
    elastic_energy,
    internal_loads,
    kinetic_energy,
    reorthonormalize,
    scatter_add,
    stable_timestep,
    step_verlet,
)


class LoadBuffers:
    """Per-step accumulation of external loads on a rod block.

    Node forces and lab-frame element couples are summed with index-ordered
    scatters, so the result does not depend on thread count.
    """

    def __init__(self, state: RodState):
        self.state = state
        self.node_forces = np.zeros((3, state.n_nodes))
        self.element_couples = np.zeros((3, state.n_elements))
        self.contact_i = np.zeros(0, dtype=int)
        self.contact_j = np.zeros(0, dtype=int)
        self.contact_force = np.zeros((3, 0))
        self.max_penetration_ratio = 0.0
        self.dissipated_power = 0.0

    def add_node_forces(self, nodes: np.ndarray, forces: np.ndarray) -> None:
        scatter_add(self.node_forces, np.asarray(nodes, dtype=int), forces)

    def add_element_forces(self, elements: np.ndarray, forces: np.ndarray) -> None:
        """Element forces are split half and half onto the element's nodes"""
        a, b = self.state.element_nodes[:, elements]
        half = 0.5 * forces
        scatter_add(self.node_forces, a, half)
        scatter_add(self.node_forces, b, half)

    def add_element_couples(self, elements: np.ndarray, couples: np.ndarray) -> None:
        scatter_add(self.element_couples, np.asarray(elements, dtype=int), couples)

    def record_contacts(self, element_i: np.ndarray, element_j: np.ndarray, force_on_i: np.ndarray) -> None:
        self.contact_i = np.concatenate([self.contact_i, element_i])
        self.contact_j = np.concatenate([self.contact_j, element_j])
        self.contact_force = np.concatenate([self.contact_force, force_on_i], axis=1)

    def note_penetration(self, ratio: float) -> None:
        self.max_penetration_ratio = max(self.max_penetration_ratio, ratio)

    def add_dissipation(self, power: float) -> None:
        self.dissipated_power += power

    def is_zero(self, atol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.node_forces) <= atol)
                    and np.all(np.abs(self.element_couples) <= atol))


class RodSystem:
    """Rods with clamps and constant external loads, no interaction plugins"""

    def __init__(self, state: RodState, elasticity: RodElasticity, clamps: Sequence[Clamp] = (),
                 node_forces: Optional[np.ndarray] = None, element_couples: Optional[np.ndarray] = None):
        self.state = state
        self.elasticity = elasticity
        self.clamps: List[Clamp] = list(clamps)
        self.node_forces = node_forces
        self.element_couples = element_couples
        self.plugins: List[Any] = []

    def axial_override(self, state: RodState, time: float) -> Optional[np.ndarray]:
        return None

    def gather(self, time: float) -> LoadBuffers:
        buffers = LoadBuffers(self.state)
        if self.node_forces is not None:
            buffers.node_forces += self.node_forces
        if self.element_couples is not None:
            buffers.element_couples += self.element_couples
        return buffers


def system_timestep(system, safety: float = 0.3) -> float:
    """Smallest stable step over the rods and every interaction plugin"""
    bound = stable_timestep(system.state, system.elasticity, safety)
    for plugin in getattr(system, 'plugins', []):
        bound = min(bound, plugin.stable_timestep(system, safety))
    return bound


class Simulator:
    """Position-Verlet loop over a system.

    A system exposes ``state``, ``elasticity``, ``clamps``, ``plugins``,
    ``axial_override(state, t)`` and ``gather(t)`` returning
    :class:`LoadBuffers`. Loads are evaluated at the half step.
    """

    def __init__(self, system, dt: float, damping: Optional[DampingConfig] = None,
                 reorthonormalize_interval: int = 100, name: str = 'simulation'):
        if not dt > 0:
            raise ValueError(f"dt must be > 0, got {dt}")
        self.system = system
        self.dt = float(dt)
        self.damping = damping or DampingConfig()
        self.reorthonormalize_interval = reorthonormalize_interval
        self.name = name
        self.logger = logger.get_logger('simulator')

        self.step_count = 0
        self.time = 0.0
        self.max_penetration_ratio = 0.0
        self.dissipated = 0.0
        self.wall_time = 0.0
        self.running = False

    @property
    def state(self) -> RodState:
        return self.system.state

    def step(self) -> None:
        system = self.system
        state = system.state
        elasticity = system.elasticity
        dt = self.dt

        drift(state, 0.5 * dt, elasticity.mass_second_moment)
        t_mid = self.time + 0.5 * dt
        buffers = system.gather(t_mid)
        loads = internal_loads(state, elasticity, system.axial_override(state, t_mid))
        step_verlet(state, elasticity, loads, buffers.node_forces, buffers.element_couples, dt)
        for clamp in system.clamps:
            clamp.apply(state)

        damped = self.damping.rayleigh_coefficient > 0.0 or self.damping.laplacian_filter_strength > 0.0
        if damped:
            before = kinetic_energy(state, elasticity)
        apply_damping(state, self.damping, dt, self.step_count, elasticity.node_mass)
        if damped:
            self.dissipated += before - kinetic_energy(state, elasticity)
        self.dissipated += buffers.dissipated_power * dt
        self.max_penetration_ratio = max(self.max_penetration_ratio, buffers.max_penetration_ratio)

        self.step_count += 1
        self.time = self.step_count * dt
        check_finite(state, self.step_count)
        if self.step_count % self.reorthonormalize_interval == 0:
            reorthonormalize(state)

    def run(self, duration: float, callback: Optional[Callable[["Simulator"], None]] = None,
            stride: int = 1) -> None:
        """Advance by ``duration``; ``callback`` fires every ``stride`` steps"""
        n_steps = int(round(duration / self.dt))
        self.running = True
        started = _time.perf_counter()
        self.logger.info(f"{self.name}: {n_steps} steps of {self.dt:.3e} s")
        try:
            for _ in range(n_steps):
                self.step()
                if callback is not None and self.step_count % stride == 0:
                    callback(self)
        finally:
            self.running = False
            self.wall_time += _time.perf_counter() - started

    def energies(self) -> Dict[str, float]:
        state, elasticity = self.system.state, self.system.elasticity
        return {
            'kinetic': kinetic_energy(state, elasticity),
            'elastic': elastic_energy(state, elasticity),
            'dissipated': float(self.dissipated),
        }

    def get_status(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'time': self.time,
            'steps': self.step_count,
            'dt': self.dt,
            'max_penetration_ratio': self.max_penetration_ratio,
            'wall_time': self.wall_time,
            'running': self.running,
        }
