"""Analysis tests: bounded-slope domains, line detection, endpoints."""

import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cmclab.analysis import (
    DetectorParams,
    DivergenceLine,
    EndpointClass,
    boundary_blowup_profile,
    classify_endpoints,
    convergence_domain,
    detect_divergence_lines,
    flux_ratio,
    gradient_bound_radius,
    normal_alignment,
)
from cmclab.barrier import HemisphereSolution, UnduloidBarrier, radii
from cmclab.errors import ConfigError, ParameterError, PartialCoverageError
from cmclab.field import Grid, ScalarField
from cmclab.geometry import (
    CircleArc,
    Curve,
    Point2,
    annulus_domain,
    disk_domain,
    lens_domain,
)
from cmclab.solver import BoundaryData, CMCSolution, FiniteData

H_UND = 0.5
T_LIST = [0.4, 0.45, 0.475, 0.495]  # slope ratio at r=1 is 0.5 + t


def wrap_solution(dom, field, H):
    data = BoundaryData(
        {p.data_tag: FiniteData(lambda s: 0.0) for p in dom.all_pieces()}
    )
    return CMCSolution(
        field=field,
        H=H,
        data=data,
        residual_norm=0.0,
        iterations=0,
        converged=True,
        diagnostics={},
        domain=dom,
    )


def unduloid_sequence(h):
    r1, r2 = radii(T_LIST[-1], H_UND)
    dom = annulus_domain(Point2(0.0, 0.0), r1, r2)
    grid = Grid.from_domain(dom, h)
    seq = []
    for t in T_LIST:
        bar = UnduloidBarrier(H_UND, t)
        f = ScalarField.from_function(grid, lambda x, y: bar.eval_many(np.hypot(x, y)))
        seq.append(wrap_solution(dom, f, H_UND))
    return dom, grid, seq


@pytest.fixture(scope="module")
def undu():
    return unduloid_sequence(1 / 128)


@pytest.fixture(scope="module")
def undu_line(undu):
    _, _, seq = undu
    lines = detect_divergence_lines(seq, H_UND, DetectorParams(tau=10.0))
    assert len(lines) == 1
    return lines[0]


@pytest.fixture(scope="module")
def hemi_solution():
    dom = disk_domain(Point2(0.0, 0.0), 0.95)
    grid = Grid.from_domain(dom, 1 / 64)
    hemi = HemisphereSolution(H=1.0)
    f = ScalarField.from_function(grid, hemi.eval)
    return dom, grid, wrap_solution(dom, f, 1.0)


class TestConvergenceDomain:
    def test_constant_sequence_fully_bounded(self, hemi_solution):
        _, grid, sol = hemi_solution
        est = convergence_domain([sol, sol, sol], tau=50.0)
        assert np.array_equal(est.bounded_mask, grid.interior)

    def test_sup_w_at_least_one(self, undu):
        _, grid, seq = undu
        est = convergence_domain(seq, tau=10.0)
        assert float(np.nanmin(est.sup_w[grid.nonexterior])) >= 1.0

    def test_tau_monotone(self, undu):
        _, _, seq = undu
        lo = convergence_domain(seq, tau=5.0)
        hi = convergence_domain(seq, tau=12.0)
        assert np.all(hi.bounded_mask[lo.bounded_mask])

    def test_prefix_monotone(self, undu):
        _, _, seq = undu
        full = convergence_domain(seq, tau=10.0)
        prefix = convergence_domain(seq[:3], tau=10.0)
        assert np.all(prefix.bounded_mask[full.bounded_mask])

    def test_critical_circle_nodes_escape_as_terms_are_added(self, undu):
        # slope ratio at the mid circle is 0.5 + t, so W there crosses
        # tau=10 exactly when the t=0.495 term joins the sequence
        _, grid, seq = undu
        X, Y = grid.meshes()
        mid = grid.interior & (np.abs(np.hypot(X, Y) - 1.0) < 0.01)
        assert mid.any()
        prefix = convergence_domain(seq[:3], tau=10.0)
        assert np.all(prefix.bounded_mask[mid])
        full = convergence_domain(seq, tau=10.0)
        assert not np.any(full.bounded_mask[mid])

    def test_rim_bands_divergent_at_higher_tau(self, undu):
        # the last barrier's slope blows up at the annulus rims, so at
        # tau=12 the bounded set is the middle band, not the rims
        _, grid, seq = undu
        est = convergence_domain(seq, tau=12.0)
        X, Y = grid.meshes()
        R = np.hypot(X, Y)
        mid = grid.interior & (np.abs(R - 1.0) < 0.01)
        rims = grid.interior & ((R < 0.925) | (R > 1.075))
        assert np.all(est.bounded_mask[mid])
        assert not np.any(est.bounded_mask[rims])

    def test_input_validation(self, undu, hemi_solution):
        _, _, seq = undu
        _, _, other = hemi_solution
        with pytest.raises(ParameterError):
            convergence_domain(seq, tau=1.0)
        with pytest.raises(ConfigError):
            convergence_domain([], tau=2.0)
        with pytest.raises(ConfigError):
            convergence_domain([seq[0], other], tau=2.0)


class TestGradientBoundRadius:
    def test_derivative_branch(self):
        # 3/(8*1*0.75) = 0.5 < r0/2
        assert gradient_bound_radius(1.0, 1.0, 2.0, 0.75) == 0.5

    def test_geometry_branch(self):
        assert gradient_bound_radius(1.0, 1.0, 0.1, 0.75) == pytest.approx(0.05)

    @pytest.mark.parametrize(
        "args",
        [(0.0, 1.0, 1.0, 1.0), (1.0, 0.5, 1.0, 1.0), (1.0, 1.0, 0.0, 1.0), (1.0, 1.0, 1.0, 0.0)],
    )
    def test_invalid_parameters(self, args):
        with pytest.raises(ParameterError):
            gradient_bound_radius(*args)

    def test_hemisphere_field_scan(self, hemi_solution):
        # doubling bound W <= 2*W(P) checked on the actual field
        _, grid, sol = hemi_solution
        p = np.array([0.5, 0.0])
        w_at_p = 2.0 / math.sqrt(3.0)
        r0 = 0.45  # distance from P to the rim
        radius = gradient_bound_radius(1.0, w_at_p, r0, 1.0)
        assert radius == pytest.approx(0.225)
        from cmclab.field import slope_w

        w = slope_w(sol.field).values
        X, Y = grid.meshes()
        near = grid.interior & (np.hypot(X - p[0], Y - p[1]) <= radius)
        assert float(np.nanmax(w[near])) <= 2.0 * w_at_p


class TestDetector:
    def test_single_accepted_line(self, undu_line):
        line = undu_line
        assert line.accepted
        assert line.reason == "accepted"

    def test_center_and_radius(self, undu_line):
        h = 1 / 128
        c = undu_line.arc.center
        assert math.hypot(c.x, c.y) <= 2 * h
        assert undu_line.arc.radius == 1.0  # 1/(2H), imposed
        assert undu_line.fit_rms <= 2 * h

    def test_free_radius_cross_check(self, undu_line):
        dev = abs(1.0 / undu_line.free_radius - 2.0 * H_UND) / (2.0 * H_UND)
        assert dev <= 0.05

    def test_closed_line_spans_full_turn(self, undu_line):
        assert abs(undu_line.arc.sweep) > 5.5
        kinds = [ep.kind for ep in undu_line.endpoints]
        assert kinds == ["interior", "interior"]

    def test_flux_ratios_match_closed_form(self, undu_line):
        expected = [0.5 + t for t in T_LIST]
        assert_allclose(undu_line.flux_ratios, expected, atol=2e-3)

    def test_alignment_matches_closed_form_and_trends_up(self, undu_line):
        expected = [0.5 + t for t in T_LIST]
        assert_allclose(undu_line.alignment, expected, atol=2e-3)
        assert np.all(np.diff(undu_line.alignment) > 0)
        assert np.all(undu_line.alignment_min <= undu_line.alignment + 1e-12)

    def test_orientation_convention(self, undu_line):
        # slope grows outward, so nu points inward and the arc runs
        # clockwise to keep (nu, tangent) a direct frame
        assert undu_line.nu_toward_center
        assert undu_line.arc.orientation == "cw"

    def test_report_serializes(self, undu_line):
        rep = undu_line.report()
        blob = json.loads(json.dumps(rep))
        assert blob["accepted"] is True
        assert set(blob["arc"]) == {"center", "radius", "angles", "orientation"}
        assert len(blob["flux_ratios"]) == len(T_LIST)
        assert len(blob["endpoints"]) == 2

    def test_coarse_grid_center_still_within_2h(self):
        h = 1 / 64
        _, _, seq = unduloid_sequence(h)
        lines = detect_divergence_lines(seq, H_UND, DetectorParams(tau=10.0))
        assert len(lines) == 1
        c = lines[0].arc.center
        assert math.hypot(c.x, c.y) <= 2 * h
        assert lines[0].accepted

    def test_bounded_sequence_detects_nothing(self):
        r1, r2 = radii(T_LIST[-1], H_UND)
        dom = annulus_domain(Point2(0.0, 0.0), r1, r2)
        grid = Grid.from_domain(dom, 1 / 128)
        seq = []
        for t in (0.10, 0.11, 0.12):
            bar = UnduloidBarrier(H_UND, t)
            f = ScalarField.from_function(
                grid, lambda x, y: bar.eval_many(np.hypot(x, y))
            )
            seq.append(wrap_solution(dom, f, H_UND))
        assert detect_divergence_lines(seq, H_UND, DetectorParams(tau=10.0)) == []

    def test_non_arc_component_reported_unclassified(self):
        dom = disk_domain(Point2(0.0, 0.0), 0.95)
        grid = Grid.from_domain(dom, 1 / 64)
        sigma = 0.15
        seq = []
        for amp in (10.0, 20.0, 40.0):
            f = ScalarField.from_function(
                grid,
                lambda x, y, a=amp: a * np.exp(-(x * x + y * y) / (2 * sigma**2)),
            )
            seq.append(wrap_solution(dom, f, 1.0))
        lines = detect_divergence_lines(seq, 1.0, DetectorParams(tau=10.0))
        assert len(lines) >= 1
        assert not any(line.accepted for line in lines)
        assert all(line.reason for line in lines)

    def test_input_validation(self, undu):
        _, _, seq = undu
        with pytest.raises(ConfigError):
            detect_divergence_lines(seq[:2], H_UND, DetectorParams(tau=10.0))
        with pytest.raises(ParameterError):
            detect_divergence_lines(seq, -1.0, DetectorParams(tau=10.0))
        with pytest.raises(ParameterError):
            DetectorParams(tau=0.5)
        with pytest.raises(ParameterError):
            DetectorParams(tau=10.0, fit_tol=0.0)
        with pytest.raises(ParameterError):
            DetectorParams(tau=10.0, min_component_nodes=0)


class TestFluxRatio:
    def test_orientation_antisymmetry(self, undu, undu_line):
        _, _, seq = undu
        sub = undu_line.direct_subarc(0.4)
        forward = flux_ratio(undu_line, seq, sub)
        backward = flux_ratio(undu_line, seq, sub.reversed())
        assert_allclose(backward, -forward, rtol=1e-12)

    def test_additive_over_concatenation(self, undu, undu_line):
        _, _, seq = undu
        arc = undu_line.arc
        h = undu_line.h
        third = abs(arc.sweep) / 3.0
        a0 = arc.angle_start
        sgn = -1.0 if arc.orientation == "cw" else 1.0
        c1 = Curve.from_arc(
            CircleArc(arc.center, arc.radius, a0, a0 + sgn * third, arc.orientation),
            0.5 * h,
        )
        c2 = Curve.from_arc(
            CircleArc(
                arc.center, arc.radius, a0 + sgn * third, a0 + sgn * 2 * third, arc.orientation
            ),
            0.5 * h,
        )
        whole = Curve.from_arc(
            CircleArc(arc.center, arc.radius, a0, a0 + sgn * 2 * third, arc.orientation),
            0.5 * h,
        )
        r1 = flux_ratio(undu_line, seq, c1)
        r2 = flux_ratio(undu_line, seq, c2)
        rw = flux_ratio(undu_line, seq, whole)
        assert_allclose(
            rw * whole.length, r1 * c1.length + r2 * c2.length, atol=1e-9
        )

    def test_zero_length_rejected(self, undu, undu_line):
        _, _, seq = undu
        point = Curve(np.array([[1.0, 0.0]]))
        with pytest.raises(ParameterError):
            flux_ratio(undu_line, seq, point)


def make_line(arc, h, nu_toward_center=True):
    return DivergenceLine(
        arc=arc,
        nu_toward_center=nu_toward_center,
        fit_rms=0.0,
        flux_ratios=np.zeros(1),
        alignment=np.zeros(1),
        alignment_min=np.zeros(1),
        endpoints=None,
        accepted=False,
        reason="",
        h=h,
        chain=np.zeros((0, 2)),
        free_radius=arc.radius,
    )


class TestNormalAlignment:
    def test_steep_planar_field_aligns(self):
        dom = disk_domain(Point2(0.0, 0.0), 0.95)
        grid = Grid.from_domain(dom, 1 / 64)
        seq = [
            wrap_solution(dom, ScalarField.from_function(grid, lambda x, y, a=k: a * x), 1.0)
            for k in (2.0, 10.0, 100.0)
        ]
        # short arc through the origin whose inward normal is about -x
        arc = CircleArc(Point2(-0.5, 0.0), 0.5, -0.1, 0.1, "ccw")
        line = make_line(arc, grid.h, nu_toward_center=True)
        means, mins = normal_alignment(line, seq)
        assert np.all(np.diff(means) > 0)
        assert means[-1] >= 0.994
        assert np.all(mins <= means + 1e-12)

    def test_partial_coverage_raises(self):
        dom = disk_domain(Point2(0.0, 0.0), 0.95)
        grid = Grid.from_domain(dom, 1 / 64)
        sol = wrap_solution(dom, ScalarField.from_function(grid, lambda x, y: x), 1.0)
        arc = CircleArc(Point2(0.9, 0.0), 0.5, -0.5, 0.5, "ccw")  # exits the disk
        line = make_line(arc, grid.h)
        with pytest.raises(PartialCoverageError):
            normal_alignment(line, [sol])


class TestClassifyEndpoints:
    def test_lens_corner_endpoints(self):
        dom = lens_domain(0.6, 0.75)
        h = 1 / 128
        half = math.asin(0.6)
        arc = CircleArc(Point2(-0.8, 0.0), 1.0, half, -half, "cw")
        line = make_line(arc, h)
        a, b = classify_endpoints(line, dom)
        assert a.kind == "corner" and b.kind == "corner"
        assert a.distance_to_boundary <= 3 * h

    def test_interior_endpoint(self):
        dom = disk_domain(Point2(0.0, 0.0), 0.95)
        h = 1 / 64
        arc = CircleArc(Point2(-0.3, 0.0), 0.3, -0.4, 0.4, "ccw")
        line = make_line(arc, h)
        a, b = classify_endpoints(line, dom)
        assert a.kind == "interior" and b.kind == "interior"
        assert a.distance_to_boundary > 3 * h

    def test_boundary_piece_id(self):
        dom = annulus_domain(Point2(0.0, 0.0), 0.4, 1.2)
        h = 1 / 64
        # one endpoint 0.4h away from the inner circle (piece 1)
        start_r = 0.4 + 0.4 * h
        arc = CircleArc(Point2(start_r + 0.3, 0.0), 0.3, math.pi, math.pi / 2, "cw")
        line = make_line(arc, h)
        a, b = classify_endpoints(line, dom)
        assert a.kind == "on_boundary_piece"
        assert a.piece_id == 1
        assert a.distance_to_boundary == pytest.approx(0.4 * h, abs=1e-12)
        assert b.kind == "interior"

    def test_endpoint_class_validation(self):
        with pytest.raises(ParameterError):
            EndpointClass(kind="nowhere", piece_id=None, distance_to_boundary=0.0, point=(0, 0))
        with pytest.raises(ParameterError):
            EndpointClass(
                kind="on_boundary_piece", piece_id=None, distance_to_boundary=0.0, point=(0, 0)
            )


class TestBlowupProfile:
    def test_constant_field_flat(self):
        dom = disk_domain(Point2(0.0, 0.0), 0.95)
        grid = Grid.from_domain(dom, 1 / 64)
        sol = wrap_solution(
            dom, ScalarField.from_function(grid, lambda x, y: 3.0 + 0.0 * x), 1.0
        )
        arc = CircleArc(Point2(0.0, 0.0), 0.7, 0.0, 2 * math.pi, "ccw")
        prof = boundary_blowup_profile(sol, arc, [0.05, 0.1, 0.2])
        assert_allclose(prof["mean_u"], 3.0, atol=1e-12)
        assert prof["notes"] == []

    def test_unduloid_edge_slope_grows_like_inverse_sqrt(self):
        t, H = 0.25, 0.5
        r1, r2 = radii(t, H)
        dom = annulus_domain(Point2(0.0, 0.0), r1, r2)
        grid = Grid.from_domain(dom, 1 / 128)
        bar = UnduloidBarrier(H, t)
        sol = wrap_solution(
            dom,
            ScalarField.from_function(grid, lambda x, y: bar.eval_many(np.hypot(x, y))),
            H,
        )
        h = grid.h
        arc = CircleArc(Point2(0.0, 0.0), r1, 0.0, 2 * math.pi, "ccw")
        deltas = [-4 * h, -8 * h, -16 * h, -32 * h]  # negative: outward
        prof = boundary_blowup_profile(sol, arc, deltas)
        assert prof["notes"] == []
        m = prof["mean_u"]
        s1 = (m[1] - m[0]) / (4 * h)
        s2 = (m[2] - m[1]) / (8 * h)
        s3 = (m[3] - m[2]) / (16 * h)
        assert s1 > s2 > s3 > 0
        assert 1.25 < s1 / s2 < 1.6
        assert 1.25 < s2 / s3 < 1.6

    def test_curves_leaving_mask_are_noted(self):
        dom = disk_domain(Point2(0.0, 0.0), 0.95)
        grid = Grid.from_domain(dom, 1 / 64)
        sol = wrap_solution(dom, ScalarField.from_function(grid, lambda x, y: x), 1.0)
        arc = CircleArc(Point2(0.0, 0.0), 0.7, 0.0, 2 * math.pi, "ccw")
        prof = boundary_blowup_profile(sol, arc, [-0.5, 0.8])
        assert np.all(np.isnan(prof["mean_u"]))
        assert len(prof["notes"]) == 2
