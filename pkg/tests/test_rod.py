"""
Tests for the discrete Cosserat rod: rotations, strains, stepping, damping
and the cantilever benchmark
"""

import numpy as np
import pytest

from core.boundary import Clamp
from core.errors import ConfigurationError, InstabilityError, SingularGeometryError
from core.rod import (
    DampingConfig,
    RodElasticity,
    RodState,
    compute_curvature,
    compute_shear_strain,
    director_orthonormality_error,
    drift,
    elastic_energy,
    internal_loads,
    kinetic_energy,
    laplacian_filter,
    linear_momentum,
    stable_timestep,
)
from core.rotations import (batch_cross, batch_matmul, batch_norm, exp_map, log_map, parallel_transport,
                            rotate_directors, rotation_about_axis)
from core.simulator import RodSystem, Simulator, system_timestep

LENGTH = 1.0
RADIUS = 0.01
N_ELEMENTS = 50
DENSITY = 1000.0
YOUNGS = 1e6


def _make_rod(n_elements: int = N_ELEMENTS, radius: float = RADIUS) -> RodState:
    return RodState.straight(n_elements, LENGTH, radius)


def _make_system(state: RodState, clamps=(), node_forces=None) -> RodSystem:
    elasticity = RodElasticity.for_state(state, DENSITY, YOUNGS)
    return RodSystem(state, elasticity, clamps, node_forces=node_forces)


def _total_energy(system: RodSystem) -> float:
    return kinetic_energy(system.state, system.elasticity) + elastic_energy(system.state, system.elasticity)


class TestRotations:

    def test_exp_is_orthonormal(self, rng):
        vectors = rng.uniform(-2.0, 2.0, size=(3, 40))
        R = exp_map(vectors)
        gram = batch_matmul(R, np.transpose(R, (1, 0, 2)))
        np.testing.assert_allclose(gram, np.repeat(np.eye(3)[:, :, None], 40, axis=2), atol=1e-12)

    def test_log_inverts_exp(self, rng):
        vectors = rng.normal(size=(3, 40))
        vectors *= rng.uniform(0.0, 2.5, size=40) / np.linalg.norm(vectors, axis=0)
        np.testing.assert_allclose(log_map(exp_map(vectors)), vectors, atol=1e-10)

    def test_small_angles_use_series(self):
        vectors = np.array([[1e-12, 0.0], [0.0, 0.0], [0.0, 0.0]])
        np.testing.assert_allclose(log_map(exp_map(vectors)), vectors, atol=1e-20)

    def test_rotation_about_axis_quarter_turn(self):
        R = rotation_about_axis([0.0, 0.0, 1.0], np.pi / 2)
        np.testing.assert_allclose(R @ np.array([1.0, 0.0, 0.0]), [0.0, 1.0, 0.0], atol=1e-15)

    def test_parallel_transport_maps_tangent(self):
        t0 = np.array([[0.0], [0.0], [1.0]])
        t1 = np.array([[0.0], [1.0], [0.0]])
        np.testing.assert_allclose(parallel_transport(t0, t0, t1), t1, atol=1e-15)
        np.testing.assert_allclose(parallel_transport(np.array([[1.0], [0.0], [0.0]]), t0, t1),
                                   [[1.0], [0.0], [0.0]], atol=1e-15)


class TestRodConstruction:

    def test_straight_rod_layout(self):
        rod = _make_rod()
        assert rod.node_positions.shape == (3, N_ELEMENTS + 1)
        assert rod.directors.shape == (3, 3, N_ELEMENTS)
        assert rod.n_voronoi == N_ELEMENTS - 1
        np.testing.assert_allclose(rod.reference_lengths, LENGTH / N_ELEMENTS)
        np.testing.assert_allclose(rod.directors[2], np.repeat([[0.0], [0.0], [1.0]], N_ELEMENTS, axis=1))
        np.testing.assert_allclose(rod.directors[0], np.repeat([[1.0], [0.0], [0.0]], N_ELEMENTS, axis=1))

    def test_single_element_is_rejected(self):
        with pytest.raises(ConfigurationError):
            RodState.straight(1, LENGTH, RADIUS)

    def test_zero_length_centerline_is_rejected(self):
        positions = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        with pytest.raises(SingularGeometryError):
            RodState.from_centerline(positions, RADIUS, [1.0, 0.0, 0.0])

    def test_collapsed_element_names_the_rod(self):
        rod = _make_rod(4)
        rod.node_positions[:, 2] = rod.node_positions[:, 1]
        with pytest.raises(SingularGeometryError) as info:
            compute_shear_strain(rod)
        assert info.value.rod == 'rod'
        assert info.value.element == 1

    def test_closed_ring_has_periodic_voronoi(self):
        theta = np.linspace(0.0, 2 * np.pi, 12, endpoint=False)
        ring = RodState.from_centerline(np.stack([np.cos(theta), np.sin(theta), np.zeros(12)]), 0.05,
                                        [0.0, 0.0, 1.0], closed=True)
        assert ring.n_elements == ring.n_nodes == 12
        assert ring.n_voronoi == 12
        assert ring.is_closed_topology()

    def test_elasticity_rejects_non_positive_density(self):
        with pytest.raises(ConfigurationError):
            RodElasticity.for_state(_make_rod(), 0.0, YOUNGS)


class TestStrains:

    def test_circle_curvature(self):
        theta = 2.0 * np.pi * np.arange(100) / 100
        ring = RodState.from_centerline(0.5 * np.stack([np.cos(theta), np.sin(theta), np.zeros(100)]), 0.01,
                                        [0.0, 0.0, 1.0], closed=True)
        bend = batch_norm(compute_curvature(ring))
        np.testing.assert_allclose(bend, 2.0, rtol=1e-2)

    def test_twist_rate(self):
        n = 50
        s = np.linspace(0.0, LENGTH, n + 1)
        centers = 0.5 * (s[:-1] + s[1:])
        normals = np.stack([np.cos(2.0 * np.pi * centers), np.sin(2.0 * np.pi * centers), np.zeros(n)])
        rod = RodState.from_centerline(np.stack([np.zeros(n + 1), np.zeros(n + 1), s]), RADIUS, normals)
        kappa = compute_curvature(rod)
        np.testing.assert_allclose(kappa[2], 2.0 * np.pi / LENGTH, rtol=1e-9)
        np.testing.assert_allclose(kappa[:2], 0.0, atol=1e-9)

    def test_stretch(self):
        rod = _make_rod(10)
        rod.node_positions[2] *= 1.5
        strain = compute_shear_strain(rod)
        np.testing.assert_allclose(strain[2], 0.5, rtol=1e-12)
        np.testing.assert_allclose(strain[:2], 0.0, atol=1e-15)


class TestInternalLoads:

    def test_axial_force_from_stretch(self):
        rod = RodState.straight(10, LENGTH, np.sqrt(1e-4 / np.pi))
        elasticity = RodElasticity.for_state(rod, DENSITY, 1e4)
        rod.node_positions[2] *= 1.1
        loads = internal_loads(rod, elasticity)
        np.testing.assert_allclose(loads.internal_force[2], 0.1, rtol=1e-9)
        np.testing.assert_allclose(loads.node_forces[2, 0], 0.1, rtol=1e-9)
        np.testing.assert_allclose(loads.node_forces[2, -1], -0.1, rtol=1e-9)

    def test_couples_are_the_energy_gradient(self, rng):
        rod = RodState.straight(6, LENGTH, 0.05)
        elasticity = RodElasticity.for_state(rod, DENSITY, YOUNGS)
        rod.directors = rotate_directors(rod.directors, 0.4 * rng.normal(size=(3, 6)))
        couples = internal_loads(rod, elasticity).element_couples

        step = 1e-6
        gradient = np.zeros_like(couples)
        for k in range(rod.n_elements):
            for j in range(3):
                turn = np.zeros((3, 1))
                turn[j] = step
                energies = []
                for sign in (1.0, -1.0):
                    moved = rod.copy()
                    moved.directors[:, :, k:k + 1] = rotate_directors(rod.directors[:, :, k:k + 1], sign * turn)
                    energies.append(elastic_energy(moved, elasticity))
                gradient[j, k] = (energies[0] - energies[1]) / (2.0 * step)
        np.testing.assert_allclose(couples, -gradient, atol=1e-6 * np.max(np.abs(couples)))

    def test_pure_bending_converges_at_second_order(self):
        # Uniform end moment: the polygon with equal turning angles is in equilibrium
        curvature = 1.0
        errors = []
        for n in (10, 20, 40):
            element = LENGTH / n
            angles = curvature * element * np.arange(n)
            chords = element * np.stack([np.sin(angles), np.zeros(n), np.cos(angles)])
            positions = np.concatenate([np.zeros((3, 1)), np.cumsum(chords, axis=1)], axis=1)
            bent = RodState.from_centerline(positions, RADIUS, [0.0, 1.0, 0.0])
            elasticity = RodElasticity.for_state(RodState.straight(n, LENGTH, RADIUS, normal=(0.0, 1.0, 0.0)),
                                                 DENSITY, YOUNGS)
            loads = internal_loads(bent, elasticity)
            moment = np.max(np.abs(loads.element_couples))
            np.testing.assert_allclose(loads.element_couples[:, 1:-1], 0.0, atol=1e-7 * moment)
            np.testing.assert_allclose(loads.node_forces, 0.0, atol=1e-7 * moment)

            exact = 2.0 * np.sin(0.5 * curvature * LENGTH) / curvature
            errors.append(abs(np.linalg.norm(positions[:, -1] - positions[:, 0]) - exact) / exact)
        orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
        assert np.all(orders >= 1.5)

    def test_rest_state_is_stress_free(self):
        rod = _make_rod()
        elasticity = RodElasticity.for_state(rod, DENSITY, YOUNGS)
        loads = internal_loads(rod, elasticity)
        assert np.all(loads.node_forces == 0.0)
        assert np.all(loads.element_couples == 0.0)

    def test_intrinsic_strains_make_curved_rods_stress_free(self):
        theta = np.linspace(0.0, np.pi, 21)
        arc = np.stack([np.cos(theta), np.sin(theta), np.zeros_like(theta)])
        rod = RodState.from_centerline(arc, 0.02, [0.0, 0.0, 1.0])
        elasticity = RodElasticity.for_state(rod, DENSITY, YOUNGS)
        assert np.any(np.abs(compute_curvature(rod)) > 0.5)
        loads = internal_loads(rod, elasticity)
        assert np.all(loads.node_forces == 0.0)

    def test_internal_forces_sum_to_zero(self, rng):
        rod = _make_rod()
        elasticity = RodElasticity.for_state(rod, DENSITY, YOUNGS)
        rod.node_positions += 1e-3 * rng.normal(size=rod.node_positions.shape)
        loads = internal_loads(rod, elasticity)
        np.testing.assert_allclose(loads.node_forces.sum(axis=1), 0.0, atol=1e-9)

    def test_axial_override_replaces_finite_entries_only(self):
        rod = _make_rod(4)
        elasticity = RodElasticity.for_state(rod, DENSITY, YOUNGS)
        override = np.array([np.nan, 2.0, np.nan, np.nan])
        loads = internal_loads(rod, elasticity, override)
        assert loads.internal_force[2, 1] == 2.0
        assert loads.internal_force[2, 0] == 0.0


class TestStepping:

    def test_rest_rod_does_not_move(self):
        system = _make_system(_make_rod())
        before = system.state.copy()
        simulator = Simulator(system, system_timestep(system))
        for _ in range(100):
            simulator.step()
        np.testing.assert_array_equal(system.state.node_positions, before.node_positions)
        np.testing.assert_array_equal(system.state.directors, before.directors)

    def test_axial_vibration_conserves_energy(self):
        system = _make_system(_make_rod())
        s = np.linspace(0.0, LENGTH, N_ELEMENTS + 1)
        system.state.node_velocities[2] = 1e-3 * np.cos(np.pi * s / LENGTH)
        initial = _total_energy(system)
        simulator = Simulator(system, system_timestep(system))
        simulator.run(200 * simulator.dt)
        assert _total_energy(system) == pytest.approx(initial, rel=1e-2)

    def test_uniform_velocity_translates_rigidly(self):
        system = _make_system(_make_rod(10))
        start = system.state.node_positions.copy()
        velocity = np.array([[0.1], [-0.05], [0.02]])
        system.state.node_velocities[:] = velocity
        simulator = Simulator(system, system_timestep(system))
        simulator.run(500 * simulator.dt)
        np.testing.assert_allclose(system.state.node_positions, start + velocity * simulator.time,
                                   rtol=1e-12, atol=1e-14)
        np.testing.assert_allclose(system.state.node_velocities, np.repeat(velocity, 11, axis=1), rtol=1e-12)

    def test_torque_free_drift_keeps_kinetic_energy(self, rng):
        rod = _make_rod(4, radius=0.05)
        elasticity = RodElasticity.for_state(rod, DENSITY, YOUNGS)
        rod.angular_velocities = rng.normal(size=(3, 4))
        before = rod.angular_velocities.copy()
        energy = kinetic_energy(rod, elasticity)
        dt = 1e-4
        drift(rod, dt, elasticity.mass_second_moment)

        assert kinetic_energy(rod, elasticity) == pytest.approx(energy, rel=1e-14)
        np.testing.assert_allclose(rod.angular_velocities[2], before[2], rtol=1e-15)
        J = elasticity.mass_second_moment
        euler = before + dt * batch_cross(J * before, before) / J
        np.testing.assert_allclose(rod.angular_velocities, euler, atol=1e-6)
        assert director_orthonormality_error(rod) < 1e-14

    def test_mirrored_start_mirrors_trajectory(self, rng):
        velocities = 1e-3 * rng.normal(size=(3, 21))
        runs = []
        for flip in (1.0, -1.0):
            rod = RodState.straight(20, LENGTH, RADIUS, normal=(0.0, 1.0, 0.0))
            rod.node_velocities = velocities * np.array([[flip], [1.0], [1.0]])
            system = _make_system(rod)
            simulator = Simulator(system, system_timestep(system))
            simulator.run(300 * simulator.dt)
            runs.append(rod)
        plain, mirrored = runs
        mirror = np.array([[-1.0], [1.0], [1.0]])
        np.testing.assert_allclose(mirrored.node_positions, mirror * plain.node_positions, atol=1e-13)
        np.testing.assert_allclose(mirrored.directors[0], mirror * plain.directors[0], atol=1e-12)
        np.testing.assert_allclose(mirrored.directors[2], mirror * plain.directors[2], atol=1e-12)

    def test_free_rod_conserves_momentum(self, rng):
        system = _make_system(_make_rod())
        system.state.node_positions += 1e-4 * rng.normal(size=system.state.node_positions.shape)
        simulator = Simulator(system, system_timestep(system))
        for _ in range(200):
            simulator.step()
        np.testing.assert_allclose(linear_momentum(system.state, system.elasticity), 0.0, atol=1e-10)

    def test_directors_stay_orthonormal(self, rng):
        system = _make_system(_make_rod())
        system.state.angular_velocities = rng.normal(size=(3, N_ELEMENTS))
        simulator = Simulator(system, system_timestep(system), DampingConfig(rayleigh_coefficient=5.0),
                              reorthonormalize_interval=10)
        simulator.run(50 * simulator.dt)
        assert director_orthonormality_error(system.state) < 1e-10

    def test_clamp_holds_base(self):
        rod = _make_rod(10)
        forces = np.zeros((3, rod.n_nodes))
        forces[0, -1] = 1e-3
        system = _make_system(rod, [Clamp(rod, [0], [0])], forces)
        base = rod.node_positions[:, 0].copy()
        simulator = Simulator(system, system_timestep(system))
        simulator.run(100 * simulator.dt)
        np.testing.assert_array_equal(rod.node_positions[:, 0], base)
        assert rod.node_positions[0, -1] > 0.0

    def test_non_finite_state_raises_instability(self):
        system = _make_system(_make_rod(10))
        system.state.node_velocities[1, 4] = np.nan
        simulator = Simulator(system, system_timestep(system))
        with pytest.raises(InstabilityError) as info:
            simulator.step()
        assert info.value.rod == 'rod'
        assert info.value.step == 1

    def test_non_positive_dt_is_rejected(self):
        with pytest.raises(ValueError):
            Simulator(_make_system(_make_rod()), 0.0)


class TestDamping:

    def test_config_validation(self):
        with pytest.raises(ConfigurationError):
            DampingConfig(laplacian_filter_strength=1.5)
        with pytest.raises(ConfigurationError):
            DampingConfig(laplacian_filter_interval=0)
        with pytest.raises(ConfigurationError):
            DampingConfig.from_config({'rayleigh': 1.0})

    def test_filter_conserves_momentum_and_dissipates(self, rng):
        rod = _make_rod(20)
        mass = rng.uniform(0.5, 2.0, size=rod.n_nodes)
        rod.node_velocities = rng.normal(size=rod.node_velocities.shape)
        momentum = rod.node_velocities @ mass
        energy = 0.5 * np.sum(mass * rod.node_velocities ** 2)
        laplacian_filter(rod, 0.8, mass)
        np.testing.assert_allclose(rod.node_velocities @ mass, momentum, atol=1e-12)
        assert 0.5 * np.sum(mass * rod.node_velocities ** 2) <= energy

    def test_uniform_filter_matches_stencil(self):
        rod = _make_rod(4)
        rod.node_velocities[0] = [0.0, 0.0, 1.0, 0.0, 0.0]
        laplacian_filter(rod, 0.4)
        np.testing.assert_allclose(rod.node_velocities[0], [0.0, 0.1, 0.8, 0.1, 0.0])

    def test_rayleigh_damping_records_dissipation(self):
        system = _make_system(_make_rod())
        system.state.node_velocities[0] = 1e-3
        simulator = Simulator(system, system_timestep(system), DampingConfig(rayleigh_coefficient=10.0))
        initial = kinetic_energy(system.state, system.elasticity)
        simulator.run(20 * simulator.dt)
        energies = simulator.energies()
        assert energies['dissipated'] > 0.0
        assert energies['kinetic'] < initial


class TestStableTimestep:

    def test_formula(self):
        rod = _make_rod()
        elasticity = RodElasticity.for_state(rod, DENSITY, YOUNGS)
        expected = 0.3 * min(LENGTH / N_ELEMENTS, RADIUS) * np.sqrt(DENSITY / YOUNGS)
        assert stable_timestep(rod, elasticity, 0.3) == pytest.approx(expected)

    def test_compression_modulus_tightens_bound(self):
        rod = _make_rod()
        elasticity = RodElasticity.for_state(rod, DENSITY, YOUNGS)
        loose = stable_timestep(rod, elasticity)
        elasticity.compression_modulus = np.full(rod.n_elements, 4.0 * YOUNGS)
        assert stable_timestep(rod, elasticity) == pytest.approx(0.5 * loose)

    def test_scale_is_the_shorter_of_length_and_radius(self):
        celerity = np.sqrt(DENSITY / YOUNGS)
        slender = _make_rod(10, radius=0.01)
        thick = _make_rod(10, radius=0.5)
        bound_slender = stable_timestep(slender, RodElasticity.for_state(slender, DENSITY, YOUNGS))
        bound_thick = stable_timestep(thick, RodElasticity.for_state(thick, DENSITY, YOUNGS))
        assert bound_slender == pytest.approx(0.3 * 0.01 * celerity)
        assert bound_thick == pytest.approx(0.3 * (LENGTH / 10) * celerity)


def _mean_energy(simulator: Simulator, steps: int) -> float:
    values = []
    for _ in range(steps):
        simulator.step()
        values.append(_total_energy(simulator.system))
    return float(np.mean(values))


def _first_mode_shape(xi: np.ndarray) -> np.ndarray:
    beta, sigma = 1.8751, 0.7341
    return (np.cosh(beta * xi) - np.cos(beta * xi)) - sigma * (np.sinh(beta * xi) - np.sin(beta * xi))


@pytest.mark.slow
class TestLongRuns:

    @pytest.mark.parametrize('excitation', ['positions', 'spins'])
    def test_energy_has_no_secular_drift(self, rng, excitation):
        system = _make_system(_make_rod())
        if excitation == 'positions':
            system.state.node_positions += 1e-6 * rng.normal(size=system.state.node_positions.shape)
        else:
            system.state.angular_velocities = 1e-2 * rng.normal(size=(3, N_ELEMENTS))
        simulator = Simulator(system, system_timestep(system))

        # Window means remove the bounded step-to-step oscillation of the discrete energy
        first = _mean_energy(simulator, 1000)
        simulator.run(8000 * simulator.dt)
        last = _mean_energy(simulator, 1000)
        assert simulator.step_count == 10000
        assert abs(last - first) <= 1e-3 * first

    def test_momentum_of_moving_rod_is_conserved(self, rng):
        system = _make_system(_make_rod())
        system.state.node_positions += 1e-6 * rng.normal(size=system.state.node_positions.shape)
        system.state.node_velocities[:] = np.array([[0.1], [0.05], [-0.2]])
        initial = linear_momentum(system.state, system.elasticity)
        simulator = Simulator(system, system_timestep(system))
        simulator.run(10000 * simulator.dt)
        drift_ratio = np.linalg.norm(linear_momentum(system.state, system.elasticity) - initial)
        assert drift_ratio / np.linalg.norm(initial) <= 1e-10

    def test_cantilever_first_frequency(self):
        n, length, radius = 100, 0.2, 0.01
        rod = RodState.straight(n, length, radius)
        system = RodSystem(rod, RodElasticity.for_state(rod, DENSITY, YOUNGS), [Clamp(rod, [0], [0])])
        element = length / n
        bending_length = length - 0.5 * element
        s = np.linspace(0.0, length, n + 1)
        shape = _first_mode_shape(np.clip(s - 0.5 * element, 0.0, None) / bending_length)
        rod.node_velocities[0] = 1e-3 * shape / shape[-1]

        simulator = Simulator(system, system_timestep(system))
        previous_time, previous_tip = 0.0, 0.0
        half_period = None
        for _ in range(40000):
            simulator.step()
            tip = float(rod.node_positions[0, -1])
            if previous_tip > 0.0 and tip <= 0.0:
                half_period = previous_time + simulator.dt * previous_tip / (previous_tip - tip)
                break
            previous_time, previous_tip = simulator.time, tip
        assert half_period is not None

        stiffness = YOUNGS * np.pi * radius ** 4 / 4.0
        line_density = DENSITY * np.pi * radius ** 2
        analytic = 1.8751 ** 2 * np.sqrt(stiffness / (line_density * bending_length ** 4))
        assert np.pi / half_period == pytest.approx(analytic, rel=0.02)

    def test_directors_stay_orthonormal_for_long_runs(self, rng):
        system = _make_system(_make_rod(10))
        system.state.angular_velocities = rng.normal(size=(3, 10))
        simulator = Simulator(system, system_timestep(system))
        worst = []
        simulator.run(100000 * simulator.dt,
                      callback=lambda sim: worst.append(director_orthonormality_error(sim.state)), stride=37)
        assert simulator.step_count == 100000
        assert max(worst) < 1e-10


@pytest.mark.slow
class TestCantilever:

    def test_tip_deflection_matches_timoshenko(self):
        from scenario.validation import cantilever_benchmark

        result = cantilever_benchmark()
        assert result['relative_error'] < 0.01
