"""Tests for the exact reference graphs.

Height values are frozen from an independent Simpson integration with
doubling refinement (no scipy), reproduced here by ``_simpson_height``
so the table can be audited in-tree.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cmclab.barrier import (
    HemisphereSolution,
    UnduloidBarrier,
    radii,
    slope_is_infinite,
)
from cmclab.errors import DomainError, ParameterError
from cmclab.geometry import Point2

H0, T0 = 0.5, 0.25
R1 = 0.2928932188134524
R2 = 1.7071067811865475
RSTAR = 0.7071067811865476

# radius -> height for H=0.5, t=0.25, normalized to 0 at r=1
HEIGHT_TABLE = {
    R1: -0.95005105108282,
    0.35: -0.73121319293713,
    0.5: -0.52168999560255,
    RSTAR: -0.30651395122168,
    0.85: -0.16190272103750,
    1.0: 0.0,
    1.2: 0.24827577851906,
    1.5: 0.76815365866332,
    1.65: 1.22861808036613,
    R2: 1.75123671101256,
}
TOTAL_RISE = 2.70128776209538


def _simpson_height(r, n=8192):
    """Independent integrator for the frozen table above."""

    def g(rad):
        return H0 * rad + T0 / rad

    def psi_lower(s):
        rad = R1 + s * s
        return 2.0 * g(rad) * math.sqrt(rad / (H0 * (1.0 + g(rad)) * (R2 - rad)))

    def psi_upper(s):
        rad = R2 - s * s
        return 2.0 * g(rad) * math.sqrt(rad / (H0 * (1.0 + g(rad)) * (rad - R1)))

    mid = 1.0 / (2.0 * H0)
    if r <= mid:
        a, b, fn, sign = math.sqrt(max(r - R1, 0.0)), math.sqrt(mid - R1), psi_lower, -1.0
    else:
        a, b, fn, sign = math.sqrt(max(R2 - r, 0.0)), math.sqrt(R2 - mid), psi_upper, 1.0
    h = (b - a) / n
    acc = 0.0
    for k in range(n):
        s = a + k * h
        acc += h * (fn(s) + 4.0 * fn(s + 0.5 * h) + fn(s + h)) / 6.0
    return sign * acc


class TestRadii:
    def test_closed_form_example(self):
        r1, r2 = radii(0.25, 0.5)
        assert r1 == pytest.approx(R1, abs=1e-14)
        assert r2 == pytest.approx(R2, abs=1e-14)
        assert r1 == pytest.approx(0.2928932, abs=1e-6)
        assert r2 == pytest.approx(1.7071068, abs=1e-6)

    @given(
        H=st.floats(0.05, 20.0),
        frac=st.floats(1e-6, 1.0 - 1e-6),
    )
    def test_vieta(self, H, frac):
        t = frac / (4.0 * H)
        r1, r2 = radii(t, H)
        assert r1 * r2 == pytest.approx(t / H, rel=1e-11)
        assert r1 + r2 == pytest.approx(1.0 / H, rel=1e-11)
        assert r1 < 1.0 / (2.0 * H) < r2
        # both are roots of the defining quadratic
        for r in (r1, r2):
            assert H * r * r - r + t == pytest.approx(0.0, abs=1e-12)

    def test_pinch_limit(self):
        r1, r2 = radii(0.4999999, 0.5)
        assert abs(r1 - 1.0) < 1e-3
        assert abs(r2 - 1.0) < 1e-3

    @pytest.mark.parametrize("t", [0.0, 0.5, -0.1, 0.7, float("nan")])
    def test_invalid_flux_parameter(self, t):
        with pytest.raises(ParameterError):
            radii(t, 0.5)

    @pytest.mark.parametrize("H", [0.0, -1.0, float("inf")])
    def test_invalid_curvature(self, H):
        with pytest.raises(ParameterError):
            radii(0.1, H)


class TestSlopeRatio:
    def setup_method(self):
        self.b = UnduloidBarrier(H=H0, t=T0)

    def test_midpoint_value(self):
        assert self.b.slope_ratio(1.0) == pytest.approx(0.75, abs=1e-14)

    def test_unit_at_boundary_circles_only(self):
        assert self.b.slope_ratio(R1) == pytest.approx(1.0, abs=1e-12)
        assert self.b.slope_ratio(R2) == pytest.approx(1.0, abs=1e-12)
        interior = np.linspace(R1 + 1e-6, R2 - 1e-6, 500)
        assert np.all(self.b.slope_ratio(interior) < 1.0)
        assert np.all(self.b.slope_ratio(interior) > 0.0)

    def test_minimum(self):
        gmin = self.b.slope_ratio(RSTAR)
        assert gmin == pytest.approx(2.0 * math.sqrt(T0 * H0), abs=1e-13)
        assert gmin == pytest.approx(0.7071068, abs=1e-6)
        assert self.b.slope_ratio(RSTAR - 0.05) > gmin
        assert self.b.slope_ratio(RSTAR + 0.05) > gmin

    @pytest.mark.parametrize("r", [0.1, 0.29, 1.71, 2.5, -1.0])
    def test_outside_annulus(self, r):
        with pytest.raises(DomainError):
            self.b.slope_ratio(r)


class TestHeights:
    def setup_method(self):
        self.b = UnduloidBarrier(H=H0, t=T0)

    def test_normalization(self):
        assert self.b.eval(1.0) == pytest.approx(0.0, abs=1e-14)
        shifted = UnduloidBarrier(H=H0, t=T0, offset=1.5)
        assert shifted.eval(1.0) == pytest.approx(1.5, abs=1e-14)

    def test_frozen_table_quadrature(self):
        for r, expected in HEIGHT_TABLE.items():
            assert self.b.eval(r) == pytest.approx(expected, abs=2e-9), r

    def test_frozen_table_vectorized(self):
        r = np.array(sorted(HEIGHT_TABLE))
        expected = np.array([HEIGHT_TABLE[k] for k in sorted(HEIGHT_TABLE)])
        np.testing.assert_allclose(self.b.eval_many(r), expected, atol=2e-9)

    def test_independent_integrator_agrees_with_table(self):
        for r in (R1, 0.5, 1.2, R2):
            assert _simpson_height(r) == pytest.approx(HEIGHT_TABLE[r], abs=1e-9)

    def test_quad_and_table_paths_agree(self):
        r = np.linspace(R1, R2, 53)
        many = self.b.eval_many(r)
        each = np.array([self.b.eval(v) for v in r])
        np.testing.assert_allclose(many, each, atol=1e-9)

    def test_strictly_increasing(self):
        rng = np.random.default_rng(7)
        lo = rng.uniform(R1, R2 - 1e-4, size=100)
        hi = lo + rng.uniform(1e-4, (R2 - lo) * 0.999)
        assert np.all(self.b.eval_many(hi) > self.b.eval_many(lo))

    def test_total_rise_finite(self):
        rise = self.b.eval(R2) - self.b.eval(R1)
        assert rise == pytest.approx(TOTAL_RISE, abs=2e-9)
        assert math.isfinite(rise) and rise > 0.0

    def test_eval_rejects_arrays_and_bad_radii(self):
        with pytest.raises(ParameterError):
            self.b.eval(np.array([1.0, 1.1]))
        with pytest.raises(DomainError):
            self.b.eval(0.2)


class TestGradient:
    def setup_method(self):
        self.b = UnduloidBarrier(H=H0, t=T0)

    def test_closed_form_magnitude(self):
        grad = self.b.gradient(Point2(1.0, 0.0))
        expected = 0.75 / math.sqrt(1.0 - 0.75 ** 2)
        np.testing.assert_allclose(grad, [expected, 0.0], atol=1e-13)
        assert expected == pytest.approx(1.1338934, abs=1e-6)

    def test_unit_slope_at_waist_radius(self):
        p = Point2(RSTAR / math.sqrt(2.0), RSTAR / math.sqrt(2.0))
        grad = self.b.gradient(p)
        assert np.hypot(*grad) == pytest.approx(1.0, abs=1e-12)
        np.testing.assert_allclose(grad / np.hypot(*grad), p.as_array() / RSTAR, atol=1e-12)

    @given(r=st.floats(R1 + 1e-6, R2 - 1e-6))
    @settings(max_examples=50)
    def test_radial_symmetry(self, r):
        gx = self.b.gradient(Point2(r, 0.0))
        gy = self.b.gradient(Point2(0.0, r))
        assert np.hypot(*gx) == pytest.approx(np.hypot(*gy), rel=1e-12)

    def test_matches_height_derivative(self):
        for r in (0.5, 0.9, 1.3, 1.6):
            delta = 1e-6
            fd = (self.b.eval(r + delta) - self.b.eval(r - delta)) / (2.0 * delta)
            assert np.hypot(*self.b.gradient(Point2(r, 0.0))) == pytest.approx(fd, rel=1e-5)

    def test_boundary_circles_signal_infinite_slope(self):
        g_in = self.b.gradient(Point2(R1, 0.0))
        assert slope_is_infinite(g_in)
        assert g_in[0] == np.inf and g_in[1] == 0.0
        g_out = self.b.gradient(Point2(0.0, -R2))
        assert g_out[1] == -np.inf and g_out[0] == 0.0
        assert not slope_is_infinite(self.b.gradient(Point2(1.0, 0.0)))

    def test_outside_annulus_raises(self):
        with pytest.raises(DomainError):
            self.b.gradient(Point2(0.0, 0.0))
        with pytest.raises(DomainError):
            self.b.gradient(Point2(2.0, 0.0))


class TestFlux:
    def setup_method(self):
        self.b = UnduloidBarrier(H=H0, t=T0)

    def test_full_circle_value(self):
        flux = self.b.flux_on_centered_circle(1.0, 2.0 * math.pi)
        assert flux == pytest.approx(0.75 * 2.0 * math.pi, abs=1e-12)
        assert flux == pytest.approx(4.7123890, abs=1e-6)

    @given(theta=st.floats(1e-9, 2.0 * math.pi))
    @settings(max_examples=50)
    def test_ratio_to_arclength_is_constant(self, theta):
        rho = 1.0 / (2.0 * H0)
        flux = self.b.flux_on_centered_circle(rho, theta)
        assert flux / (rho * theta) == pytest.approx(0.5 + 2.0 * H0 * T0, rel=1e-14)

    def test_linear_in_small_angles(self):
        f1 = self.b.flux_on_centered_circle(1.2, 1e-4)
        f2 = self.b.flux_on_centered_circle(1.2, 2e-4)
        assert f2 == pytest.approx(2.0 * f1, rel=1e-12)
        assert f1 == pytest.approx(self.b.slope_ratio(1.2) * 1.2 * 1e-4, rel=1e-12)

    def test_near_pinch_flux_approaches_arclength(self):
        tight = UnduloidBarrier(H=0.5, t=0.4999)
        ell = 2.0 * math.pi
        assert abs(tight.flux_on_centered_circle(1.0, 2.0 * math.pi) - ell) < 1e-3 * ell

    def test_invalid_inputs(self):
        with pytest.raises(DomainError):
            self.b.flux_on_centered_circle(0.1, 1.0)
        with pytest.raises(ParameterError):
            self.b.flux_on_centered_circle(1.0, 0.0)
        with pytest.raises(ParameterError):
            self.b.flux_on_centered_circle(1.0, 7.0)


class TestProfileTable:
    def test_columns_and_shape(self):
        b = UnduloidBarrier(H=H0, t=T0)
        table = b.profile_table(101)
        assert set(table) == {"r", "height", "slope", "slope_ratio"}
        assert all(v.shape == (101,) for v in table.values())
        assert np.all(np.diff(table["height"]) > 0.0)
        assert np.isinf(table["slope"][0]) and np.isinf(table["slope"][-1])
        assert np.all(np.isfinite(table["slope"][1:-1]))
        assert np.all((table["slope_ratio"] > 0.0) & (table["slope_ratio"] <= 1.0))


class TestHemisphere:
    def test_frozen_point(self):
        h = HemisphereSolution(H=1.0)
        assert h.eval(0.6, 0.0) == pytest.approx(-0.8, abs=1e-14)
        assert np.hypot(*h.gradient(0.6, 0.0)) == pytest.approx(0.75, abs=1e-14)
        assert h.w(0.6, 0.0) == pytest.approx(1.25, abs=1e-14)

    def test_pole(self):
        h = HemisphereSolution(H=1.0)
        np.testing.assert_allclose(h.gradient(0.0, 0.0), [0.0, 0.0])
        assert h.w(0.0, 0.0) == pytest.approx(1.0, abs=1e-15)

    def test_center_and_offset(self):
        h = HemisphereSolution(H=1.0, center=Point2(2.0, -1.0), offset=3.0)
        assert h.eval(2.6, -1.0) == pytest.approx(3.0 - 0.8, abs=1e-14)

    def test_outside_disk(self):
        h = HemisphereSolution(H=2.0)
        with pytest.raises(DomainError):
            h.eval(0.5, 0.0)
        with pytest.raises(DomainError):
            h.eval(np.array([0.0, 0.49999, 0.7]), np.zeros(3))

    def test_w_consistent_with_gradient(self):
        h = HemisphereSolution(H=1.0)
        rng = np.random.default_rng(3)
        r = rng.uniform(0.0, 0.95, 40)
        th = rng.uniform(0.0, 2.0 * np.pi, 40)
        px, py = r * np.cos(th), r * np.sin(th)
        grad = h.gradient(px, py)
        np.testing.assert_allclose(
            h.w(px, py), np.sqrt(1.0 + np.sum(grad * grad, axis=-1)), rtol=1e-13
        )

    def test_gradient_matches_finite_differences(self):
        h = HemisphereSolution(H=1.0, center=Point2(0.3, 0.1), offset=-2.0)
        px, py = np.array([0.5, 0.0, -0.2]), np.array([0.4, 0.6, 0.0])
        grad = h.gradient(px, py)
        d = 1e-7
        fx = (h.eval(px + d, py) - h.eval(px - d, py)) / (2.0 * d)
        fy = (h.eval(px, py + d) - h.eval(px, py - d)) / (2.0 * d)
        np.testing.assert_allclose(grad[:, 0], fx, rtol=1e-6)
        np.testing.assert_allclose(grad[:, 1], fy, rtol=1e-6)

    def test_invalid_params(self):
        with pytest.raises(ParameterError):
            HemisphereSolution(H=0.0)
        with pytest.raises(ParameterError):
            UnduloidBarrier(H=1.0, t=0.3)
