import math

import numpy as np
import pytest

from erspin_sim import geometry
from erspin_sim.constants import BOHR_MAGNETON, HBAR, PLANCK


def random_unit_vectors(n, seed=7):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


class TestEffectiveG:
    def test_isotropic_tensor_gives_scalar(self):
        gt = geometry.GTensor(2.0 * np.eye(3))
        for d in random_unit_vectors(20):
            assert geometry.effective_g(gt, d) == pytest.approx(2.0, abs=1e-12)

    def test_diagonal_axis_components(self):
        gt = geometry.GTensor(np.diag([10.5, 1.6, 3.0]))
        assert geometry.effective_g(gt, [1, 0, 0]) == pytest.approx(10.5, abs=1e-12)
        assert geometry.effective_g(gt, [0, 1, 0]) == pytest.approx(1.6, abs=1e-12)
        assert geometry.effective_g(gt, [0, 0, 1]) == pytest.approx(3.0, abs=1e-12)

    def test_quadratic_form_between_axes(self):
        gt = geometry.GTensor(np.diag([10.5, 1.6, 3.0]))
        d = np.array([1.0, 1.0, 0.0]) / math.sqrt(2.0)
        expected = math.sqrt((10.5**2 + 1.6**2) / 2.0)
        assert geometry.effective_g(gt, d) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(7.51, abs=5e-3)

    def test_direction_sign_invariance(self):
        rng = np.random.default_rng(11)
        m = rng.standard_normal((3, 3))
        gt = geometry.GTensor(m @ m.T)  # symmetric PSD
        for d in random_unit_vectors(20, seed=3):
            assert geometry.effective_g(gt, d) == pytest.approx(
                geometry.effective_g(gt, -d), rel=1e-12
            )

    def test_non_unit_direction_rejected(self):
        gt = geometry.GTensor(np.eye(3))
        with pytest.raises(ValueError):
            geometry.effective_g(gt, [1.0, 1.0, 0.0])

    def test_tensor_invariants(self):
        bad = np.eye(3)
        bad[0, 1] = 1e-6
        with pytest.raises(ValueError):
            geometry.GTensor(bad)
        with pytest.raises(ValueError):
            geometry.GTensor(np.diag([1.0, -0.5, 1.0]))


class TestZeemanSplitting:
    def test_matches_constants_arithmetic(self):
        b = 21.23e-3
        expected = 10.5 * BOHR_MAGNETON * b / PLANCK
        assert geometry.zeeman_splitting(10.5, b) == pytest.approx(expected, rel=1e-15)
        assert expected == pytest.approx(3.12e9, abs=1e6)

    def test_field_for_splitting_inverts(self):
        b = geometry.field_for_splitting(10.5, 3.12e9)
        assert b == pytest.approx(21.23e-3, abs=0.01e-3)
        assert geometry.zeeman_splitting(10.5, b) == pytest.approx(3.12e9, rel=1e-12)
        # consistent with a static field of roughly 0.02 T
        assert 0.015 < b < 0.025

    def test_zeros(self):
        assert geometry.zeeman_splitting(0.0, 1.0) == 0.0
        assert geometry.zeeman_splitting(10.5, 0.0) == 0.0

    def test_linearity_in_field(self):
        base = geometry.zeeman_splitting(10.5, 1e-3)
        for k in (2.0, 5.0, 17.0):
            assert geometry.zeeman_splitting(10.5, k * 1e-3) == pytest.approx(
                k * base, rel=1e-12
            )

    def test_negative_field_rejected(self):
        with pytest.raises(ValueError):
            geometry.zeeman_splitting(10.5, -1e-3)


class TestRabiFrequency:
    def test_inverts_to_known_field(self):
        omega = 2.0 * math.pi * 14.9e6
        b1 = 2.0 * HBAR * omega / (1.6 * BOHR_MAGNETON)
        assert b1 == pytest.approx(1.33e-3, abs=0.01e-3)
        assert geometry.rabi_frequency(1.6, b1) == pytest.approx(omega, rel=1e-15)

    def test_zero_field(self):
        assert geometry.rabi_frequency(1.6, 0.0) == 0.0

    def test_linear_scaling_in_g(self):
        b1 = 1.33e-3
        lo = geometry.rabi_frequency(0.95, b1)
        hi = geometry.rabi_frequency(1.6, b1)
        assert lo / hi == pytest.approx(0.95 / 1.6, rel=1e-15)
        # at the ground-config drive field this lands near 2 pi x 8.85 MHz
        b1_ground = 2.0 * HBAR * (2.0 * math.pi * 14.9e6) / (1.6 * BOHR_MAGNETON)
        assert geometry.rabi_frequency(0.95, b1_ground) / (2.0 * math.pi) == pytest.approx(
            14.9e6 * 0.95 / 1.6, rel=1e-12
        )

    def test_linearity_in_field(self):
        base = geometry.rabi_frequency(1.6, 1e-4)
        for k in (3.0, 7.0, 21.0):
            assert geometry.rabi_frequency(1.6, k * 1e-4) == pytest.approx(k * base, rel=1e-12)

    def test_negative_field_rejected(self):
        with pytest.raises(ValueError):
            geometry.rabi_frequency(1.6, -1.0)


class TestPresets:
    def test_ground_config_orientations(self):
        fc = geometry.preset_field_config(geometry.GROUND_CONFIG)
        assert np.allclose(fc.b_static_dir, [0, 1, 0])
        assert np.allclose(fc.b_mw_dir, [0, 0, 1])
        assert fc.b_static_mag == pytest.approx(21.23e-3, abs=0.01e-3)

    def test_excited_config_orientations(self):
        fc = geometry.preset_field_config(geometry.EXCITED_CONFIG)
        assert np.allclose(fc.b_static_dir, [0, 0, 1])
        assert np.allclose(fc.b_mw_dir, [0, 1, 0])
        assert geometry.zeeman_splitting(10.0, fc.b_static_mag) == pytest.approx(
            3.12e9, rel=1e-12
        )

    def test_preset_g_factors(self):
        g = geometry.preset_g_factors(geometry.GROUND_CONFIG)
        assert (g.g_parallel, g.g_mw) == (10.5, 1.6)
        e = geometry.preset_g_factors(geometry.EXCITED_CONFIG)
        assert (e.g_parallel, e.g_mw) == (10.0, 0.95)
        with pytest.raises(ValueError):
            geometry.preset_g_factors("sideways-config")

    def test_preset_tensors_reproduce_scalars(self):
        ground = geometry.preset_g_tensor("ground")
        fc = geometry.preset_field_config(geometry.GROUND_CONFIG)
        assert geometry.effective_g(ground, fc.b_static_dir) == pytest.approx(10.5)
        assert geometry.effective_g(ground, fc.b_mw_dir) == pytest.approx(1.6)
        excited = geometry.preset_g_tensor("excited")
        fce = geometry.preset_field_config(geometry.EXCITED_CONFIG)
        assert geometry.effective_g(excited, fce.b_static_dir) == pytest.approx(10.0)
        assert geometry.effective_g(excited, fce.b_mw_dir) == pytest.approx(0.95)

    def test_implied_excited_g_left_free(self):
        # a 2 GHz splitting at the ground-config field corresponds to an
        # effective g near 6.7; the package only provides the conversion
        fc = geometry.preset_field_config(geometry.GROUND_CONFIG)
        g = geometry.implied_g(2e9, fc.b_static_mag)
        assert g == pytest.approx(10.5 * 2.0 / 3.12, rel=1e-12)
        assert 6.5 < g < 7.0

    def test_field_config_validates_unit_norm(self):
        with pytest.raises(ValueError):
            geometry.FieldConfig(
                b_static_dir=np.array([1.0, 1.0, 0.0]),
                b_static_mag=0.02,
                b_mw_dir=np.array([0.0, 0.0, 1.0]),
            )
