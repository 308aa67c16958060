"""
Tests for arm geometry, census, couplings and the construction audits
"""

import math

import numpy as np
import pytest

from arm import ArmSpec, arm_geometry, build_arm, cross_section_audit, om_turns, om_winding_angle, rod_census
from arm.builder import _check_rest_overlap, helix_angle_integral
from core.errors import ConfigurationError, ConstructionError
from core.rod import RodState

SMALL_ARM = dict(total_length=0.1, base_diameter=0.02, tapered=False, n_lm=8, n_om_per_hand=2,
                 n_tm_rings=4, elements_per_rod=10, ring_elements=8, om_elements_per_turn=8,
                 contact_scale=10.0)


@pytest.fixture(scope='module')
def small_arm():
    return build_arm(ArmSpec(**SMALL_ARM))


class TestArmSpec:

    def test_defaults_are_valid(self):
        spec = ArmSpec()
        assert spec.n_rods() == 1 + 8 + 8 + 180
        assert sum(spec.cross_section_fractions.values()) == pytest.approx(1.0)

    def test_partial_fractions_keep_defaults(self):
        spec = ArmSpec(cross_section_fractions={'ANC': 0.05})
        assert spec.cross_section_fractions == {'ANC': 0.05, 'LM': 0.5, 'TM': 0.2, 'OM': 0.2}

    @pytest.mark.parametrize('overrides, field', [
        ({'ring_elements': 12}, 'arm.ring_elements'),
        ({'oblique_winding_angle': 90.0}, 'arm.oblique_winding_angle'),
        ({'cross_section_fractions': {'ANC': 0.4}}, 'arm.cross_section_fractions'),
        ({'cross_section_fractions': {'XM': 0.1}}, 'arm.cross_section_fractions'),
        ({'tip_radius_ratio': 0.01}, 'arm.tip_radius_ratio'),
        ({'n_lm': 2}, 'arm.n_lm'),
        ({'elements_per_rod': 2.5}, 'arm.elements_per_rod'),
        ({'total_length': 0.0}, 'arm.total_length'),
        ({'contact_reach': 0.5}, 'arm.contact_reach'),
    ])
    def test_invalid_values_name_the_field(self, overrides, field):
        with pytest.raises(ConfigurationError) as info:
            ArmSpec(**overrides)
        assert info.value.field == field

    def test_unknown_config_field(self):
        with pytest.raises(ConfigurationError) as info:
            ArmSpec.from_config({'total_length': 0.1, 'colour': 'red'})
        assert info.value.field == 'arm.colour'

    def test_taper(self):
        spec = ArmSpec(total_length=0.2, tapered=True, tip_radius_ratio=0.5)
        assert spec.taper(0.0) == pytest.approx(1.0)
        assert spec.taper(0.1) == pytest.approx(0.75)
        assert spec.taper(0.2) == pytest.approx(0.5)
        expected = math.degrees(math.atan2(spec.base_radius * 0.5, 0.2))
        assert spec.surface_angle() == pytest.approx(expected)

    def test_untapered_arms_have_unit_tip_ratio(self):
        assert ArmSpec(tapered=False).tip_ratio == 1.0
        assert ArmSpec(tapered=True, taper_angle=90.0).tip_ratio == 1.0
        assert ArmSpec(tapered=False).surface_angle() == 0.0


class TestGeometry:

    def test_desk_radii(self):
        geometry = arm_geometry(ArmSpec(**SMALL_ARM))
        assert geometry.anc_radius == pytest.approx(3.16e-3, rel=1e-3)
        assert geometry.lm_radius == pytest.approx(2.5e-3, rel=1e-6)
        assert geometry.lm_offset == pytest.approx(geometry.anc_radius + geometry.lm_radius)
        assert geometry.tm_radius == pytest.approx(5.72e-4, rel=5e-3)
        assert geometry.ring_radius == pytest.approx(8.73e-3, rel=1e-3)
        assert geometry.om_radius == pytest.approx(1.17e-3, rel=5e-3)
        assert geometry.om_right_offset - geometry.om_left_offset == pytest.approx(2.0 * geometry.om_radius)

    def test_tm_ring_area(self):
        spec = ArmSpec(**SMALL_ARM)
        g = arm_geometry(spec)
        area = 4.0 * math.pi * g.ring_radius * g.tm_radius
        assert area / (math.pi * spec.base_radius ** 2) == pytest.approx(0.2, rel=1e-10)

    def test_om_turns_untapered(self):
        spec = ArmSpec(**SMALL_ARM)
        expected = math.tan(math.radians(74.0)) * 0.1 / (2.0 * math.pi * 0.01)
        assert om_turns(spec, 0.01) == pytest.approx(expected)

    def test_tapered_helix_winds_further(self):
        spec = ArmSpec(total_length=0.1, tapered=True, tip_radius_ratio=0.5)
        assert float(helix_angle_integral(spec, 0.01, 0.1)) == pytest.approx(-math.log(0.5) / (0.5 / 0.1 * 0.01))
        assert float(helix_angle_integral(spec, 0.01, 0.1)) > 0.1 / 0.01


class TestBuildArm:

    def test_census(self, small_arm):
        assert rod_census(small_arm) == {'ANC': 1, 'LM': 8, 'OM_L': 2, 'OM_R': 2, 'TM': 4}
        names = [rod.name for rod in small_arm.state.rods]
        assert names[:3] == ['ANC', 'LM_0', 'LM_1']
        assert 'OM_R_1' in names and 'TM_3' in names

    def test_rings_are_closed(self, small_arm):
        for ring in small_arm.rods_of('TM'):
            assert ring.closed
            assert ring.n_elements == 8

    def test_om_resolution(self, small_arm):
        spec = small_arm.spec
        for group, offset in (('OM_L', arm_geometry(spec).om_left_offset),
                              ('OM_R', arm_geometry(spec).om_right_offset)):
            expected = math.ceil(om_turns(spec, offset) * spec.om_elements_per_turn)
            for rod in small_arm.rods_of(group):
                assert rod.n_elements == max(spec.elements_per_rod, expected)

    def test_base_clamp(self, small_arm):
        assert len(small_arm.clamps) == 1
        clamped = small_arm.clamps[0].nodes
        assert clamped.size == 9
        np.testing.assert_allclose(small_arm.state.node_positions[2, clamped], 0.0)

    def test_arm_length(self, small_arm):
        assert small_arm.arm_length() == pytest.approx(0.1)

    def test_element_labels(self, small_arm):
        lm = small_arm.rods_of('LM')[3]
        assert set(small_arm.element_group[lm.elements]) == {'LM'}
        assert set(small_arm.element_rank[lm.elements]) == {3}
        np.testing.assert_allclose(small_arm.arc_length[lm.elements], (np.arange(10) + 0.5) * 0.01)

    def test_cross_section_audit(self, small_arm):
        fractions = cross_section_audit(small_arm)
        assert fractions['ANC'] == pytest.approx(0.1, rel=1e-9)
        assert fractions['LM'] == pytest.approx(0.5, rel=1e-9)
        assert fractions['TM'] == pytest.approx(0.2, rel=1e-6)
        assert fractions['OM'] == pytest.approx(0.2, rel=0.05)

    def test_winding_angle_audit(self, small_arm):
        assert om_winding_angle(small_arm, 'OM_L') == pytest.approx(74.0, abs=1.0)
        assert om_winding_angle(small_arm, 'OM_R') == pytest.approx(74.0, abs=1.0)

    def test_couplings_generated(self, small_arm):
        assert len(small_arm.connections) > 0
        assert len(small_arm.contact_pairs) > 0
        pressure_groups = set(small_arm.element_group[small_arm.pressure.elements])
        assert pressure_groups == {'ANC', 'LM'}

    def test_contact_pairs_join_different_rods(self, small_arm):
        state = small_arm.state
        for i, j in zip(small_arm.contact_pairs.element_i, small_arm.contact_pairs.element_j):
            assert i < j
            assert state.locate_element(int(i))[0] != state.locate_element(int(j))[0]

    def test_tapered_arm_builds(self):
        spec = ArmSpec(**{**SMALL_ARM, 'tapered': True, 'tip_radius_ratio': 0.5})
        assembly = build_arm(spec)
        anc = assembly.anc
        radii = assembly.state.rest_radii[anc.elements]
        assert np.all(np.diff(radii) < 0.0)
        assert radii[-1] / radii[0] == pytest.approx(spec.taper(0.095) / spec.taper(0.005))


class TestRestOverlap:

    @staticmethod
    def _two_rods(gap: float) -> RodState:
        a = RodState.straight(2, 1.0, 0.1, name='A', group='LM')
        b = RodState.straight(2, 1.0, 0.1, start=(gap, 0.0, 0.0), name='B', group='LM')
        return RodState.concatenate([a, b])

    def test_deep_overlap_is_rejected(self):
        state = self._two_rods(0.1)
        spec = ArmSpec(overlap_tolerance=0.15)
        with pytest.raises(ConstructionError, match='A\\[0\\]'):
            _check_rest_overlap(spec, state, np.array([0]), np.array([2]), set(), np.array([0, 0, 1, 1]))

    def test_connected_rods_are_exempt(self):
        state = self._two_rods(0.1)
        _check_rest_overlap(ArmSpec(), state, np.array([0]), np.array([2]), {(0, 1)}, np.array([0, 0, 1, 1]))

    def test_overlap_within_tolerance(self):
        state = self._two_rods(0.18)
        _check_rest_overlap(ArmSpec(), state, np.array([0]), np.array([2]), set(), np.array([0, 0, 1, 1]))
