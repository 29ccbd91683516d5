"""Sequence-level analysis of solver output.

Three concerns: estimating where a solution sequence keeps bounded
slopes, locating and validating divergence lines (arcs of the critical
radius 1/(2H) along which the area element blows up), and classifying
where such arcs terminate relative to the domain boundary.

A detected line is only accepted when three independent criteria agree:
the divergent nodes fit a circle of the prescribed radius, the flux of
the slope 1-form along the arc approaches its arclength, and the
surface normals turn horizontal across it.  Anything that fails one of
them is still reported, flagged as unclassified.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field as dataclass_field
from typing import Sequence

import numpy as np
from scipy import ndimage
from skimage.morphology import skeletonize

from .errors import ConfigError, ParameterError, PartialCoverageError
from .field import EXTERIOR, flux_form, line_integral, normal_map, slope_w
from .geometry import CircleArc, Curve, Domain, Point2
from .solver import CMCSolution

__all__ = [
    "ConvergenceDomainEstimate",
    "DetectorParams",
    "DivergenceLine",
    "EndpointClass",
    "boundary_blowup_profile",
    "classify_endpoints",
    "convergence_domain",
    "detect_divergence_lines",
    "flux_ratio",
    "gradient_bound_radius",
    "normal_alignment",
]

_EIGHT = np.ones((3, 3), dtype=bool)


def _same_grid(a, b) -> bool:
    return a is b or (
        a.h == b.h
        and a.origin == b.origin
        and a.nx == b.nx
        and a.ny == b.ny
        and np.array_equal(a.mask, b.mask)
    )


def _shared_grid(seq: Sequence[CMCSolution]):
    if not seq:
        raise ConfigError("empty solution sequence")
    grid = seq[0].field.grid
    for sol in seq[1:]:
        if not _same_grid(grid, sol.field.grid):
            raise ConfigError("solutions in a sequence must share one grid")
    return grid


def _sup_w(seq: Sequence[CMCSolution]) -> np.ndarray:
    out = slope_w(seq[0].field).values.copy()
    for sol in seq[1:]:
        out = np.fmax(out, slope_w(sol.field).values)
    return out


@dataclass(eq=False)
class ConvergenceDomainEstimate:
    """Threshold estimate of where the sequence keeps bounded slopes.

    sup_w is taken over the supplied finite sequence only, so the mask
    over-estimates the true bounded set; it shrinks as terms are added.
    """

    grid: object
    sup_w: np.ndarray
    bounded_mask: np.ndarray
    tau: float


def convergence_domain(
    seq: Sequence[CMCSolution], tau: float
) -> ConvergenceDomainEstimate:
    """Nodes where max-over-sequence W stays at or below tau.

    The raw threshold set is despeckled (isolated nodes dropped) and
    then closed, so the reported mask is the interior of its closure in
    the grid topology; both operations preserve monotonicity in tau.
    """
    if not tau > 1.0:
        raise ParameterError(f"threshold must exceed 1, got {tau!r}")
    grid = _shared_grid(seq)
    sup_w = _sup_w(seq)
    raw = grid.interior & (sup_w <= tau)
    neighbor_kernel = np.array([[1, 1, 1], [1, 0, 1], [1, 1, 1]])
    neighbors = ndimage.convolve(raw.astype(np.int8), neighbor_kernel, mode="constant")
    despeckled = raw & (neighbors > 0)
    closed = ndimage.binary_closing(despeckled, structure=_EIGHT)
    return ConvergenceDomainEstimate(
        grid=grid,
        sup_w=sup_w,
        bounded_mask=closed & grid.interior,
        tau=float(tau),
    )


def gradient_bound_radius(H: float, M: float, r0: float, C_tilde: float) -> float:
    """Radius of a disk on which W provably stays within a factor 2 of M.

    The constant C_tilde is caller-supplied; the bound is checked
    empirically by the test suite rather than derived.
    """
    if not H > 0.0:
        raise ParameterError(f"curvature must be positive, got {H!r}")
    if not M >= 1.0:
        raise ParameterError(f"slope bound must be at least 1, got {M!r}")
    if not r0 > 0.0:
        raise ParameterError(f"reference radius must be positive, got {r0!r}")
    if not C_tilde > 0.0:
        raise ParameterError(f"derivative constant must be positive, got {C_tilde!r}")
    return min(0.5 * r0, 3.0 / (8.0 * M * M * C_tilde))


@dataclass(frozen=True)
class EndpointClass:
    """Where an arc endpoint sits relative to the domain boundary."""

    kind: str  # "interior" | "on_boundary_piece" | "corner"
    piece_id: int | None
    distance_to_boundary: float
    point: tuple[float, float]

    def __post_init__(self):
        if self.kind not in ("interior", "on_boundary_piece", "corner"):
            raise ParameterError(f"unknown endpoint kind {self.kind!r}")
        if self.kind == "on_boundary_piece" and self.piece_id is None:
            raise ParameterError("boundary endpoint needs a piece id")


@dataclass(frozen=True)
class DetectorParams:
    tau: float
    min_component_nodes: int = 8
    fit_tol: float | None = None  # defaults to 2h at detection time
    boundary_margin_cells: int = 3

    def __post_init__(self):
        if not self.tau > 1.0:
            raise ParameterError(f"threshold must exceed 1, got {self.tau!r}")
        if self.min_component_nodes < 1:
            raise ParameterError("component size floor must be at least 1")
        if self.fit_tol is not None and not self.fit_tol > 0.0:
            raise ParameterError("fit tolerance must be positive")
        if self.boundary_margin_cells < 0:
            raise ParameterError("boundary margin must be nonnegative")


@dataclass(eq=False)
class DivergenceLine:
    """Arc of radius 1/(2H) carrying concentrated slope blow-up.

    The radius is imposed, not fitted: only the center has freedom.
    nu points from the arc toward its center when nu_toward_center is
    set; the arc itself is oriented so (nu, tangent) is a direct frame.
    accepted lines satisfied all of: rms fit distance <= fit tolerance,
    final flux ratio >= 0.9, final mean alignment >= 0.9, free-radius
    refit curvature within 5 percent of 2H.
    """

    arc: CircleArc
    nu_toward_center: bool
    fit_rms: float
    flux_ratios: np.ndarray
    alignment: np.ndarray
    alignment_min: np.ndarray
    endpoints: tuple[EndpointClass, EndpointClass] | None
    accepted: bool
    reason: str
    h: float
    chain: np.ndarray  # ordered (m, 2) node coordinates of the skeleton
    free_radius: float

    def nu_at(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        center = np.array([self.arc.center.x, self.arc.center.y])
        d = center - pts if self.nu_toward_center else pts - center
        norm = np.hypot(d[:, 0], d[:, 1])
        norm = np.where(norm < 1e-300, 1.0, norm)
        return d / norm[:, None]

    def direct_subarc(self, fraction: float = 0.5, spacing: float | None = None) -> Curve:
        """Central sub-arc as a sampled curve, in the line's orientation."""
        if not 0.0 < fraction <= 1.0:
            raise ParameterError("fraction must lie in (0, 1]")
        arc = self.arc
        trim = 0.5 * (1.0 - fraction) * abs(arc.sweep)
        if arc.orientation == "ccw":
            sub = CircleArc(
                arc.center, arc.radius, arc.angle_start + trim, arc.angle_end - trim, "ccw"
            )
        else:
            sub = CircleArc(
                arc.center, arc.radius, arc.angle_start - trim, arc.angle_end + trim, "cw"
            )
        return Curve.from_arc(sub, spacing if spacing is not None else 0.5 * self.h)

    def report(self) -> dict:
        endpoints = []
        if self.endpoints is not None:
            for ep in self.endpoints:
                endpoints.append(
                    {
                        "kind": ep.kind,
                        "piece_id": ep.piece_id,
                        "distance_to_boundary": ep.distance_to_boundary,
                        "point": list(ep.point),
                    }
                )
        return {
            "arc": {
                "center": [self.arc.center.x, self.arc.center.y],
                "radius": self.arc.radius,
                "angles": [self.arc.angle_start, self.arc.angle_end],
                "orientation": self.arc.orientation,
            },
            "nu_toward_center": self.nu_toward_center,
            "fit_rms": self.fit_rms,
            "free_radius": self.free_radius,
            "flux_ratios": [float(v) for v in self.flux_ratios],
            "alignment": [float(v) for v in self.alignment],
            "alignment_min": [float(v) for v in self.alignment_min],
            "endpoints": endpoints,
            "accepted": self.accepted,
            "reason": self.reason,
        }


def _bilinear_sample(grid, values: np.ndarray, pts: np.ndarray):
    """Bilinear interpolation of a nodal array; flags cells off the mask."""
    fx = (pts[:, 0] - grid.origin.x) / grid.h
    fy = (pts[:, 1] - grid.origin.y) / grid.h
    outside = (fx < 0.0) | (fx > grid.nx - 1) | (fy < 0.0) | (fy > grid.ny - 1)
    ix = np.clip(np.floor(fx).astype(int), 0, grid.nx - 2)
    iy = np.clip(np.floor(fy).astype(int), 0, grid.ny - 2)
    tx, ty = fx - ix, fy - iy
    c00 = values[iy, ix]
    c10 = values[iy, ix + 1]
    c01 = values[iy + 1, ix]
    c11 = values[iy + 1, ix + 1]
    m = grid.mask
    cell_ok = (
        (m[iy, ix] != EXTERIOR)
        & (m[iy, ix + 1] != EXTERIOR)
        & (m[iy + 1, ix] != EXTERIOR)
        & (m[iy + 1, ix + 1] != EXTERIOR)
    )
    finite = (
        np.isfinite(c00) & np.isfinite(c10) & np.isfinite(c01) & np.isfinite(c11)
    )
    vals = (
        c00 * (1 - tx) * (1 - ty)
        + c10 * tx * (1 - ty)
        + c01 * (1 - tx) * ty
        + c11 * tx * ty
    )
    return vals, ~outside & cell_ok & finite


def flux_ratio(line: DivergenceLine, seq: Sequence[CMCSolution], sub_arc: Curve) -> np.ndarray:
    """Flux of each solution's slope 1-form along the sub-arc over -length.

    Respects the orientation of the curve as given; on a correctly
    oriented sub-arc of a genuine divergence line the ratios approach 1.
    """
    if sub_arc.length <= 0.0:
        raise ParameterError("sub-arc must have positive length")
    _shared_grid(seq)
    out = np.empty(len(seq))
    for k, sol in enumerate(seq):
        out[k] = line_integral(flux_form(sol.field), sub_arc) / (-sub_arc.length)
    return out


def normal_alignment(
    line: DivergenceLine, seq: Sequence[CMCSolution], fraction: float = 0.8
):
    """Mean and min of <N_n, (nu, 0)> over samples of the line's arc."""
    grid = _shared_grid(seq)
    curve = line.direct_subarc(fraction=fraction)
    pts = curve.samples
    nu = line.nu_at(pts)
    means = np.empty(len(seq))
    mins = np.empty(len(seq))
    for k, sol in enumerate(seq):
        nm = normal_map(sol.field)
        n1, ok1 = _bilinear_sample(grid, nm.normals[:, :, 0], pts)
        n2, ok2 = _bilinear_sample(grid, nm.normals[:, :, 1], pts)
        ok = ok1 & ok2
        if not np.all(ok):
            raise PartialCoverageError(
                "alignment samples leave the mask", np.nonzero(~ok)[0].tolist()
            )
        dots = n1 * nu[:, 0] + n2 * nu[:, 1]
        means[k] = float(np.mean(dots))
        mins[k] = float(np.min(dots))
    return means, mins


def classify_endpoints(line: DivergenceLine, dom: Domain) -> tuple[EndpointClass, EndpointClass]:
    """Classify both arc endpoints against the boundary within 3h."""
    threshold = 3.0 * line.h
    out = []
    for s in (0.0, line.arc.length):
        p = line.arc.point_at(s)
        px, py = float(p[0]), float(p[1])
        corner_hit = None
        for cp, _turn in dom.corners():
            d = math.hypot(px - cp[0], py - cp[1])
            if d <= threshold and (corner_hit is None or d < corner_hit):
                corner_hit = d
        pid, _s_on, dist = dom.nearest_piece(px, py)
        if corner_hit is not None:
            out.append(
                EndpointClass(
                    kind="corner",
                    piece_id=None,
                    distance_to_boundary=float(corner_hit),
                    point=(px, py),
                )
            )
        elif dist <= threshold:
            out.append(
                EndpointClass(
                    kind="on_boundary_piece",
                    piece_id=pid,
                    distance_to_boundary=float(dist),
                    point=(px, py),
                )
            )
        else:
            out.append(
                EndpointClass(
                    kind="interior",
                    piece_id=None,
                    distance_to_boundary=float(dist),
                    point=(px, py),
                )
            )
    return out[0], out[1]


def _ordered_chain(skel: np.ndarray) -> np.ndarray:
    """Longest path through an 8-connected skeleton, as (j, i) rows."""
    pts = list(zip(*(arr.tolist() for arr in np.nonzero(skel))))
    index = {p: k for k, p in enumerate(pts)}
    adj = [[] for _ in pts]
    for k, (j, i) in enumerate(pts):
        for dj in (-1, 0, 1):
            for di in (-1, 0, 1):
                if dj == 0 and di == 0:
                    continue
                q = index.get((j + dj, i + di))
                if q is not None:
                    adj[k].append(q)

    def farthest(start):
        dist = {start: 0}
        parent = {start: None}
        queue = deque([start])
        far = start
        while queue:
            v = queue.popleft()
            for u in adj[v]:
                if u not in dist:
                    dist[u] = dist[v] + 1
                    parent[u] = v
                    queue.append(u)
                    if dist[u] > dist[far]:
                        far = u
        return far, parent

    a, _ = farthest(0)
    b, parent = farthest(a)
    path = []
    v = b
    while v is not None:
        path.append(pts[v])
        v = parent[v]
    return np.array(path, dtype=np.int64)


def _fit_center_fixed_radius(pts: np.ndarray, radius: float, c0: np.ndarray):
    """Least-squares center for a circle of imposed radius."""
    c = np.asarray(c0, dtype=float).copy()
    for _ in range(60):
        d = pts - c
        r = np.hypot(d[:, 0], d[:, 1])
        r = np.where(r < 1e-12, 1e-12, r)
        res = r - radius
        jac = -d / r[:, None]
        g = jac.T @ res
        h = jac.T @ jac
        try:
            step = np.linalg.solve(h, -g)
        except np.linalg.LinAlgError:
            break
        c = c + step
        if math.hypot(step[0], step[1]) < 1e-12:
            break
    d = pts - c
    r = np.hypot(d[:, 0], d[:, 1])
    rms = float(np.sqrt(np.mean((r - radius) ** 2)))
    return c, rms


def _fit_circle_free(pts: np.ndarray):
    """Free circle fit: algebraic (Kasa) start, geometric refinement.

    The algebraic solution underestimates the radius on shallow arcs, so
    a few Gauss-Newton steps on the orthogonal distances follow it.
    """
    x, y = pts[:, 0], pts[:, 1]
    a = np.column_stack([2.0 * x, 2.0 * y, np.ones_like(x)])
    b = x * x + y * y
    sol, *_ = np.linalg.lstsq(a, b, rcond=None)
    cx, cy, c = sol
    radius = math.sqrt(max(c + cx * cx + cy * cy, 1e-300))
    for _ in range(60):
        dx, dy = x - cx, y - cy
        dist = np.hypot(dx, dy)
        dist = np.maximum(dist, 1e-300)
        res = dist - radius
        jac = np.column_stack([-dx / dist, -dy / dist, -np.ones_like(dist)])
        step, *_ = np.linalg.lstsq(jac, -res, rcond=None)
        cx += step[0]
        cy += step[1]
        radius += step[2]
        if float(np.max(np.abs(step))) < 1e-12:
            break
    return np.array([cx, cy]), abs(radius)


def _ridge_points(grid, log_w, comp, center, radius, domain) -> np.ndarray:
    """Sub-pixel crest of sup W inside one component, per angular bin.

    The thresholded band is one-sided (W decays faster toward the
    curvature center than away from it), which biases a free fit of the
    raw nodes; the crest of log W sits on the forming wall.  Bins whose
    nodes all hug the boundary are dropped: the level set bends there.
    """
    h = grid.h
    jj, ii = np.nonzero(comp)
    xs = grid.origin.x + ii * h
    ys = grid.origin.y + jj * h
    dist_b = np.asarray(domain.distance(xs, ys))
    ang = np.arctan2(ys - center[1], xs - center[0])
    rad = np.hypot(xs - center[0], ys - center[1])
    vals = log_w[jj, ii]
    width = 1.5 * h / max(radius, h)
    bins = np.floor(ang / width).astype(int)
    pts = []
    for b in np.unique(bins):
        sel = bins == b
        if float(np.max(dist_b[sel])) <= 4.0 * h:
            continue
        k = int(np.argmax(vals[sel]))
        r0 = float(rad[sel][k])
        a0 = float(ang[sel][k])
        ca, sa = math.cos(a0), math.sin(a0)
        rs = np.array([r0 - h, r0, r0 + h])
        ray = np.column_stack([center[0] + rs * ca, center[1] + rs * sa])
        d, ok = _bilinear_sample(grid, log_w, ray)
        if not (bool(ok.all()) and bool(np.isfinite(d).all())):
            continue
        denom = d[0] - 2.0 * d[1] + d[2]
        if denom >= -1e-12:
            continue
        off = 0.5 * (d[0] - d[2]) / denom
        if abs(off) > 1.0:
            continue
        pts.append([center[0] + (r0 + off * h) * ca, center[1] + (r0 + off * h) * sa])
    return np.asarray(pts, dtype=float).reshape(-1, 2)


def _arc_span(angles: np.ndarray) -> tuple[float, float]:
    """Smallest ccw angular interval covering all angles."""
    a = np.sort(np.mod(angles, 2.0 * math.pi))
    gaps = np.diff(np.concatenate([a, [a[0] + 2.0 * math.pi]]))
    k = int(np.argmax(gaps))
    start = a[(k + 1) % a.size]
    sweep = 2.0 * math.pi - gaps[k]
    return float(start), float(start + sweep)


def detect_divergence_lines(
    seq: Sequence[CMCSolution], H: float, params: DetectorParams
) -> list[DivergenceLine]:
    """Locate arcs of radius 1/(2H) where the sequence's W blows up.

    Pipeline: threshold sup W, drop small components, skeletonize, fit
    a circle with the radius imposed, then validate with flux and
    normal-direction criteria.  Components that fail any criterion are
    returned with accepted=False and the failure named, never dropped.
    Callers should supply at least three solutions with growing max W.
    """
    if len(seq) < 3:
        raise ConfigError("need at least three solutions to detect lines")
    if not (H > 0.0 and math.isfinite(H)):
        raise ParameterError(f"curvature must be positive, got {H!r}")
    grid = _shared_grid(seq)
    h = grid.h
    fit_tol = params.fit_tol if params.fit_tol is not None else 2.0 * h
    radius = 1.0 / (2.0 * H)

    sup_w = _sup_w(seq)
    with np.errstate(invalid="ignore"):
        log_w = np.where(
            np.isfinite(sup_w) & (sup_w > 0.0),
            np.log(np.fmax(sup_w, 1e-300)),
            np.nan,
        )
    core = grid.interior
    if params.boundary_margin_cells > 0:
        core = ndimage.binary_erosion(
            core, structure=_EIGHT, iterations=params.boundary_margin_cells
        )
    divergent = core & (sup_w > params.tau)
    labels, n_labels = ndimage.label(divergent, structure=_EIGHT)
    if n_labels == 0:
        return []
    sizes = np.bincount(labels.ravel())
    final_normals = normal_map(seq[-1].field).normals

    lines: list[DivergenceLine] = []
    for lid in range(1, n_labels + 1):
        if sizes[lid] < params.min_component_nodes:
            continue
        comp = labels == lid
        skel = skeletonize(comp)
        if int(skel.sum()) < 3:
            skel = comp
        # the fit and angular span use every skeleton node: a closed ring
        # must keep its full sweep, which the longest path would halve
        cloud_j, cloud_i = np.nonzero(skel)
        xy = np.column_stack(
            [grid.origin.x + cloud_i * h, grid.origin.y + cloud_j * h]
        )
        chain_ji = _ordered_chain(skel)
        chain_xy = np.column_stack(
            [
                grid.origin.x + chain_ji[:, 1] * h,
                grid.origin.y + chain_ji[:, 0] * h,
            ]
        )
        n1 = final_normals[cloud_j, cloud_i, 0]
        n2 = final_normals[cloud_j, cloud_i, 1]
        horiz = np.hypot(n1, n2)
        usable = horiz > 1e-12
        nu_hat = np.zeros_like(xy)
        nu_hat[usable, 0] = n1[usable] / horiz[usable]
        nu_hat[usable, 1] = n2[usable] / horiz[usable]

        candidates = []
        for sign in (1.0, -1.0):
            c0 = np.mean(xy + sign * radius * nu_hat, axis=0)
            candidates.append(_fit_center_fixed_radius(xy, radius, c0))
        center, fit_rms = min(candidates, key=lambda cr: cr[1])

        # per-node vote: on a closed ring the mean of nu_hat cancels, so
        # compare each node's nu against its own radial direction instead
        radial = xy - center
        votes = np.einsum("ij,ij->i", nu_hat[usable], radial[usable])
        nu_toward_center = bool(votes.size) and float(np.mean(np.sign(votes))) < 0.0

        angles = np.arctan2(xy[:, 1] - center[1], xy[:, 0] - center[0])
        start, end = _arc_span(angles)
        if nu_toward_center:
            arc = CircleArc(Point2(*center), radius, end, start, "cw")
        else:
            arc = CircleArc(Point2(*center), radius, start, end, "ccw")

        # free-radius cross-check against the crest of sup W; fall back
        # to boundary-trimmed band nodes when too few crest samples fit
        ridge = _ridge_points(grid, log_w, comp, center, radius, seq[-1].domain)
        if len(ridge) < 8:
            dist = np.asarray(seq[-1].domain.distance(xy[:, 0], xy[:, 1]))
            inner = xy[dist > 4.0 * h]
            ridge = inner if len(inner) >= 8 else xy
        free_center, free_radius = _fit_circle_free(ridge)

        line = DivergenceLine(
            arc=arc,
            nu_toward_center=nu_toward_center,
            fit_rms=fit_rms,
            flux_ratios=np.full(len(seq), np.nan),
            alignment=np.full(len(seq), np.nan),
            alignment_min=np.full(len(seq), np.nan),
            endpoints=None,
            accepted=False,
            reason="",
            h=h,
            chain=chain_xy,
            free_radius=free_radius,
        )

        for frac in (0.5, 0.35, 0.2):
            try:
                line.flux_ratios = flux_ratio(line, seq, line.direct_subarc(frac))
                break
            except PartialCoverageError:
                continue
        for frac in (0.8, 0.6, 0.4):
            try:
                line.alignment, line.alignment_min = normal_alignment(line, seq, frac)
                break
            except PartialCoverageError:
                continue

        failures = []
        if not fit_rms <= fit_tol:
            failures.append(f"fit_rms {fit_rms:.4g} above tolerance {fit_tol:.4g}")
        if not line.flux_ratios[-1] >= 0.9:
            failures.append(f"final flux ratio {line.flux_ratios[-1]:.4g} below 0.9")
        if not line.alignment[-1] >= 0.9:
            failures.append(f"final alignment {line.alignment[-1]:.4g} below 0.9")
        line.accepted = not failures
        line.reason = "accepted" if not failures else "; ".join(failures)
        line.endpoints = classify_endpoints(line, seq[-1].domain)
        lines.append(line)
    return lines


def boundary_blowup_profile(
    sol: CMCSolution, arc: CircleArc, offsets: Sequence[float]
) -> dict:
    """Mean of u along copies of the arc offset toward its center.

    Positive offsets shrink the radius (moving off the arc into the
    concave side); negative offsets grow it.  Offset curves that leave
    the mask are recorded in the notes and given a nan mean.
    """
    grid = sol.field.grid
    offs, means, notes = [], [], []
    for delta in offsets:
        r_new = arc.radius - float(delta)
        offs.append(float(delta))
        if r_new <= 0.0:
            means.append(math.nan)
            notes.append(f"offset {delta:g}: collapses the arc")
            continue
        shifted = CircleArc(
            arc.center, r_new, arc.angle_start, arc.angle_end, arc.orientation
        )
        curve = Curve.from_arc(shifted, 0.5 * grid.h)
        vals, ok = _bilinear_sample(grid, sol.field.values, curve.samples)
        if not np.all(ok):
            means.append(math.nan)
            notes.append(f"offset {delta:g}: curve leaves the mask")
            continue
        means.append(float(np.mean(vals)))
    return {"offset": np.array(offs), "mean_u": np.array(means), "notes": notes}
