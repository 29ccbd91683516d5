"""Discrete scalar fields on masked grids and their flux calculus.

Nodes are classified exterior / boundary / interior from a Domain; the
interior is eroded so every interior node has a full 3x3 neighborhood
of non-exterior nodes.  Derived quantities (gradient, area element W,
upward normals, the flux 1-form) live on nodes; the conservative CMC
residual is assembled from bilinear cells sampled at 2x2 Gauss points,
which keeps it an exact energy gradient and exact on linear fields.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import ConfigError, ParameterError, PartialCoverageError
from .geometry import Curve, Domain, Point2

__all__ = [
    "EXTERIOR",
    "BOUNDARY",
    "INTERIOR",
    "Grid",
    "ScalarField",
    "GradientField",
    "WField",
    "NormalMap",
    "FluxForm",
    "ResidualField",
    "CellStructure",
    "gradient",
    "slope_w",
    "normal_map",
    "flux_form",
    "line_integral",
    "stokes_defect",
    "residual_cmc",
    "build_cells",
    "cell_energy_terms",
    "write_field_csv",
]

EXTERIOR, BOUNDARY, INTERIOR = 0, 1, 2

# 2x2 Gauss abscissae on the unit interval
_GAUSS = (0.5 - 0.5 / math.sqrt(3.0), 0.5 + 0.5 / math.sqrt(3.0))


@dataclass(eq=False)
class Grid:
    """Uniform node-centered grid with a node mask over a Domain."""

    origin: Point2
    h: float
    nx: int
    ny: int
    mask: np.ndarray

    def __post_init__(self):
        if not (self.h > 0.0 and math.isfinite(self.h)):
            raise ParameterError(f"grid spacing must be positive, got {self.h!r}")
        self.mask = np.asarray(self.mask, dtype=np.int8)
        if self.mask.shape != (self.ny, self.nx):
            raise ParameterError("mask shape does not match grid dims")
        self.mask.setflags(write=False)

    @classmethod
    def from_domain(cls, dom: Domain, h: float, pad: int = 2) -> "Grid":
        """Classify nodes of a padded bounding-box lattice against ``dom``.

        Boundary nodes are the inside ring stripped by a 3x3 erosion, so
        interior nodes keep full stencils in every direction.
        """
        if not (h > 0.0 and math.isfinite(h)):
            raise ParameterError(f"grid spacing must be positive, got {h!r}")
        xmin, ymin, xmax, ymax = dom.bounding_box
        origin = Point2(xmin - pad * h, ymin - pad * h)
        nx = int(math.ceil((xmax - xmin) / h)) + 2 * pad + 1
        ny = int(math.ceil((ymax - ymin) / h)) + 2 * pad + 1
        xs = origin.x + h * np.arange(nx)
        ys = origin.y + h * np.arange(ny)
        X, Y = np.meshgrid(xs, ys)
        inside = dom.contains(X, Y)
        interior = ndimage.binary_erosion(inside, structure=np.ones((3, 3), bool))
        mask = np.zeros((ny, nx), dtype=np.int8)
        mask[inside] = BOUNDARY
        mask[interior] = INTERIOR
        return cls(origin=origin, h=h, nx=nx, ny=ny, mask=mask)

    @property
    def xs(self) -> np.ndarray:
        return self.origin.x + self.h * np.arange(self.nx)

    @property
    def ys(self) -> np.ndarray:
        return self.origin.y + self.h * np.arange(self.ny)

    def meshes(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.xs, self.ys)

    @property
    def interior(self) -> np.ndarray:
        return self.mask == INTERIOR

    @property
    def boundary(self) -> np.ndarray:
        return self.mask == BOUNDARY

    @property
    def nonexterior(self) -> np.ndarray:
        return self.mask != EXTERIOR

    def node_count(self) -> int:
        return self.nx * self.ny

    def validate(self) -> None:
        """Check the 4-neighbor invariant of interior nodes."""
        inner = self.interior
        ok = np.ones_like(inner)
        for dj, di in ((0, 1), (0, -1), (1, 0), (-1, 0)):
            shifted = _shift(self.mask, dj, di, fill=EXTERIOR)
            ok &= ~inner | (shifted != EXTERIOR)
        if not ok.all():
            raise ConfigError("interior node with an exterior 4-neighbor")


def _shift(arr: np.ndarray, dj: int, di: int, fill) -> np.ndarray:
    """Array shifted so out[j, i] = arr[j - dj, i - di], padded with fill."""
    out = np.full_like(arr, fill)
    js = slice(max(dj, 0), arr.shape[0] + min(dj, 0))
    isl = slice(max(di, 0), arr.shape[1] + min(di, 0))
    jsrc = slice(max(-dj, 0), arr.shape[0] + min(-dj, 0))
    isrc = slice(max(-di, 0), arr.shape[1] + min(-di, 0))
    out[js, isl] = arr[jsrc, isrc]
    return out


@dataclass(eq=False)
class ScalarField:
    """Nodal values over a grid; nan on exterior nodes.

    Boundary nodes may hold +inf only when ``allow_capped`` is set,
    which marks fields carrying capped unbounded boundary data.
    """

    grid: Grid
    values: np.ndarray
    allow_capped: bool = False

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != self.grid.mask.shape:
            raise ParameterError("values shape does not match grid")
        vals[~self.grid.nonexterior] = np.nan
        if not np.all(np.isfinite(vals[self.grid.interior])):
            raise ParameterError("interior values must be finite")
        bvals = vals[self.grid.boundary]
        if self.allow_capped:
            bad = np.isnan(bvals) | (bvals == -np.inf)
        else:
            bad = ~np.isfinite(bvals)
        if np.any(bad):
            raise ParameterError("boundary values must be finite (or tagged +inf)")
        vals.setflags(write=False)
        self.values = vals

    @classmethod
    def from_function(cls, grid: Grid, fn, allow_capped: bool = False) -> "ScalarField":
        X, Y = grid.meshes()
        sel = grid.nonexterior
        vals = np.full(grid.mask.shape, np.nan)
        vals[sel] = fn(X[sel], Y[sel])
        return cls(grid=grid, values=vals, allow_capped=allow_capped)

    def shifted(self, dz: float) -> "ScalarField":
        return ScalarField(self.grid, self.values + dz, self.allow_capped)


@dataclass(eq=False)
class GradientField:
    grid: Grid
    gx: np.ndarray
    gy: np.ndarray
    flagged: np.ndarray  # (k, 2) node indices (i, j) with no usable stencil


@dataclass(eq=False)
class WField:
    grid: Grid
    values: np.ndarray
    flagged: np.ndarray


@dataclass(eq=False)
class NormalMap:
    """Upward unit normals (-p/W, -q/W, 1/W) on non-exterior nodes."""

    grid: Grid
    normals: np.ndarray  # (ny, nx, 3)
    flagged: np.ndarray

    def __post_init__(self):
        sel = self.grid.nonexterior & np.all(np.isfinite(self.normals), axis=-1)
        norms = np.linalg.norm(self.normals[sel], axis=-1)
        if sel.any() and not np.allclose(norms, 1.0, atol=1e-12):
            raise ParameterError("normals must be unit vectors")
        if np.any(self.normals[sel & self.grid.interior][:, 2] <= 0.0):
            raise ParameterError("interior normals must point upward")


@dataclass(eq=False)
class FluxForm:
    """Components (p/W, q/W) of the flux 1-form on non-exterior nodes."""

    grid: Grid
    comp_x: np.ndarray
    comp_y: np.ndarray
    flagged: np.ndarray

    def __post_init__(self):
        norm_sq = self.comp_x ** 2 + self.comp_y ** 2
        finite = np.isfinite(norm_sq)
        if np.any(norm_sq[finite] > 1.0 + 1e-12):
            raise ParameterError("flux form norm exceeds 1")

    def norms(self) -> np.ndarray:
        return np.hypot(self.comp_x, self.comp_y)


@dataclass(eq=False)
class ResidualField:
    grid: Grid
    values: np.ndarray
    excluded: np.ndarray  # (k, 2) interior nodes (i, j) without full cells


def _directional_derivative(values: np.ndarray, usable: np.ndarray, axis: int, h: float):
    """Central or one-sided second-order derivative along one axis.

    Returns (derivative, ok) where ok marks nodes with a usable stencil.
    """

    def sh(arr, step):
        dj, di = (step, 0) if axis == 0 else (0, step)
        return _shift(arr, dj, di, fill=np.nan if arr.dtype == float else False)

    up1, dn1 = sh(values, -1), sh(values, 1)
    up2, dn2 = sh(values, -2), sh(values, 2)
    ok_up1, ok_dn1 = sh(usable, -1), sh(usable, 1)
    ok_up2, ok_dn2 = sh(usable, -2), sh(usable, 2)

    central_ok = ok_up1 & ok_dn1
    fwd_ok = ok_up1 & ok_up2
    bwd_ok = ok_dn1 & ok_dn2

    with np.errstate(invalid="ignore"):
        central = (up1 - dn1) / (2.0 * h)
        fwd = (-3.0 * values + 4.0 * up1 - up2) / (2.0 * h)
        bwd = (3.0 * values - 4.0 * dn1 + dn2) / (2.0 * h)

    deriv = np.where(central_ok, central, np.where(fwd_ok, fwd, bwd))
    ok = usable & (central_ok | fwd_ok | bwd_ok)
    return deriv, ok


def gradient(f: ScalarField) -> GradientField:
    """Nodal gradient: central where possible, one-sided second-order at
    the mask edge; nodes with neither stencil are flagged, not guessed."""
    grid = f.grid
    usable = grid.nonexterior & np.isfinite(f.values)
    gx, ok_x = _directional_derivative(f.values, usable, axis=1, h=grid.h)
    gy, ok_y = _directional_derivative(f.values, usable, axis=0, h=grid.h)
    good = ok_x & ok_y
    bad = grid.nonexterior & ~good
    gx = np.where(good, gx, np.nan)
    gy = np.where(good, gy, np.nan)
    jj, ii = np.nonzero(bad)
    return GradientField(grid=grid, gx=gx, gy=gy, flagged=np.column_stack([ii, jj]))


def slope_w(f: ScalarField) -> WField:
    """Area element W = sqrt(1 + |grad u|^2) >= 1."""
    g = gradient(f)
    return WField(grid=f.grid, values=np.sqrt(1.0 + g.gx ** 2 + g.gy ** 2), flagged=g.flagged)


def normal_map(f: ScalarField) -> NormalMap:
    g = gradient(f)
    w = np.sqrt(1.0 + g.gx ** 2 + g.gy ** 2)
    normals = np.stack([-g.gx / w, -g.gy / w, 1.0 / w], axis=-1)
    return NormalMap(grid=f.grid, normals=normals, flagged=g.flagged)


def flux_form(f: ScalarField) -> FluxForm:
    g = gradient(f)
    w = np.sqrt(1.0 + g.gx ** 2 + g.gy ** 2)
    return FluxForm(grid=f.grid, comp_x=g.gx / w, comp_y=g.gy / w, flagged=g.flagged)


def line_integral(w: FluxForm, c: Curve) -> float:
    """Integral of the 1-form along a sampled curve.

    Components are interpolated bilinearly, the pullback is accumulated
    with the trapezoid rule in fixed order.  Any sample whose bilinear
    cell touches the exterior (or a flagged node) is reported through a
    partial-coverage error; nothing is extrapolated.
    """
    grid = w.grid
    pts = c.samples
    if pts.shape[0] < 2:
        return 0.0
    spacing = np.diff(c.arclength_table).max(initial=0.0)
    if spacing > grid.h * (1.0 + 1e-9):
        raise ParameterError(
            f"curve sample spacing {spacing:g} exceeds grid spacing {grid.h:g}"
        )

    fx = (pts[:, 0] - grid.origin.x) / grid.h
    fy = (pts[:, 1] - grid.origin.y) / grid.h
    outside = (fx < 0.0) | (fx > grid.nx - 1) | (fy < 0.0) | (fy > grid.ny - 1)
    ix = np.clip(np.floor(fx).astype(int), 0, grid.nx - 2)
    iy = np.clip(np.floor(fy).astype(int), 0, grid.ny - 2)
    tx, ty = fx - ix, fy - iy

    def corners(arr):
        return arr[iy, ix], arr[iy, ix + 1], arr[iy + 1, ix], arr[iy + 1, ix + 1]

    m00, m10, m01, m11 = corners(w.grid.mask)
    cell_ok = (m00 != EXTERIOR) & (m10 != EXTERIOR) & (m01 != EXTERIOR) & (m11 != EXTERIOR)
    value_ok = np.ones_like(cell_ok)
    interp = {}
    for name, arr in (("x", w.comp_x), ("y", w.comp_y)):
        c00, c10, c01, c11 = corners(arr)
        value_ok &= (
            np.isfinite(c00) & np.isfinite(c10) & np.isfinite(c01) & np.isfinite(c11)
        )
        interp[name] = (
            c00 * (1 - tx) * (1 - ty)
            + c10 * tx * (1 - ty)
            + c01 * (1 - tx) * ty
            + c11 * tx * ty
        )
    bad = outside | ~cell_ok | ~value_ok
    if np.any(bad):
        idx = np.nonzero(bad)[0]
        raise PartialCoverageError(
            f"curve leaves the covered region at {idx.size} of {pts.shape[0]} samples",
            samples=idx.tolist(),
        )

    wx, wy = interp["x"], interp["y"]
    dx = np.diff(pts[:, 0])
    dy = np.diff(pts[:, 1])
    terms = 0.5 * (wx[:-1] + wx[1:]) * dy - 0.5 * (wy[:-1] + wy[1:]) * dx
    return float(np.sum(terms))


def stokes_defect(w: FluxForm, dom_sub: Domain, H: float) -> float:
    """|circulation of the form around dom_sub minus 2H * area(dom_sub)|."""
    spacing = 0.5 * w.grid.h
    total = 0.0
    for k in range(len(dom_sub.chains())):
        total += line_integral(w, dom_sub.boundary_curve(spacing, chain=k))
    return abs(total - 2.0 * H * dom_sub.area())


@dataclass(eq=False)
class CellStructure:
    """Bilinear cells with all four corners non-exterior.

    Flat corner indices in grid row-major order; counts is the number
    of such cells touching each node.
    """

    sw: np.ndarray
    se: np.ndarray
    nw: np.ndarray
    ne: np.ndarray
    counts: np.ndarray

    @property
    def corner_matrix(self) -> np.ndarray:
        return np.stack([self.sw, self.se, self.nw, self.ne], axis=1)


def build_cells(grid: Grid) -> CellStructure:
    ok = grid.nonexterior
    cell_ok = ok[:-1, :-1] & ok[:-1, 1:] & ok[1:, :-1] & ok[1:, 1:]
    jj, ii = np.nonzero(cell_ok)
    sw = jj * grid.nx + ii
    se = sw + 1
    nw = sw + grid.nx
    ne = nw + 1
    counts = np.zeros(grid.node_count(), dtype=np.int64)
    for idx in (sw, se, nw, ne):
        np.add.at(counts, idx, 1)
    return CellStructure(sw=sw, se=se, nw=nw, ne=ne, counts=counts)


def _gauss_coeffs(h: float):
    """Per-Gauss-point corner coefficients of (p, q) in a bilinear cell.

    Corner order (sw, se, nw, ne); each row pairs with one of the four
    Gauss points (xi_a, eta_b).
    """
    cp, cq = [], []
    for eta in _GAUSS:
        for xi in _GAUSS:
            cp.append(np.array([-(1 - eta), (1 - eta), -eta, eta]) / h)
            cq.append(np.array([-(1 - xi), -xi, (1 - xi), xi]) / h)
    return cp, cq


def cell_energy_terms(cells: CellStructure, u_flat: np.ndarray, h: float):
    """Per-cell, per-Gauss-point gradients (p, q) and area elements W.

    Returns (p, q, w) arrays of shape (4, n_cells), Gauss points in the
    order produced by the coefficient table.
    """
    corners = np.stack(
        [u_flat[cells.sw], u_flat[cells.se], u_flat[cells.nw], u_flat[cells.ne]]
    )
    cp, cq = _gauss_coeffs(h)
    p = np.stack([c @ corners for c in cp])
    q = np.stack([c @ corners for c in cq])
    return p, q, np.sqrt(1.0 + p * p + q * q)


def residual_cmc(f: ScalarField, H: float) -> ResidualField:
    """Conservative discrete residual Div(grad u / W) - 2H on interior nodes.

    Assembled as the negative gradient of the cell-sampled area energy,
    so it is conservative by construction and vanishes on linear fields
    up to the constant -2H.  Interior nodes missing one of their four
    cells (or touching non-finite values) are excluded and reported.
    """
    grid = f.grid
    cells = build_cells(grid)
    u = np.where(np.isfinite(f.values), f.values, 0.0).ravel()
    finite_ok = np.isfinite(f.values).ravel()
    cell_finite = (
        finite_ok[cells.sw] & finite_ok[cells.se] & finite_ok[cells.nw] & finite_ok[cells.ne]
    )
    p, q, w = cell_energy_terms(cells, u, grid.h)
    cp, cq = _gauss_coeffs(grid.h)
    acc = np.zeros(grid.node_count())
    corner_idx = (cells.sw, cells.se, cells.nw, cells.ne)
    for g in range(4):
        coeff = (p[g] / w[g], q[g] / w[g])
        for corner in range(4):
            term = -0.25 * (coeff[0] * cp[g][corner] + coeff[1] * cq[g][corner])
            np.add.at(acc, corner_idx[corner], np.where(cell_finite, term, np.nan))

    values = acc.reshape(grid.mask.shape) - 2.0 * H
    full = (cells.counts == 4).reshape(grid.mask.shape)
    good = grid.interior & full & np.isfinite(values)
    excluded_mask = grid.interior & ~good
    values = np.where(good, values, np.nan)
    jj, ii = np.nonzero(excluded_mask)
    return ResidualField(grid=grid, values=values, excluded=np.column_stack([ii, jj]))


def write_field_csv(f: ScalarField, path) -> None:
    """Export non-exterior nodes with derived quantities.

    Columns (i, j, x, y, u, p, q, W, N1, N2, N3); grid metadata rides in
    comment lines so the file is self-describing.
    """
    grid = f.grid
    g = gradient(f)
    w = np.sqrt(1.0 + g.gx ** 2 + g.gy ** 2)
    X, Y = grid.meshes()
    jj, ii = np.nonzero(grid.nonexterior)
    path = Path(path)
    with path.open("w", newline="") as handle:
        handle.write(f"# origin: {grid.origin.x!r} {grid.origin.y!r}\n")
        handle.write(f"# spacing: {grid.h!r}\n")
        handle.write(f"# dims: {grid.nx} {grid.ny}\n")
        writer = csv.writer(handle)
        writer.writerow(["i", "j", "x", "y", "u", "p", "q", "W", "N1", "N2", "N3"])
        for j, i in zip(jj, ii):
            wx = float(w[j, i])
            gx, gy = float(g.gx[j, i]), float(g.gy[j, i])
            writer.writerow(
                [
                    int(i),
                    int(j),
                    repr(float(X[j, i])),
                    repr(float(Y[j, i])),
                    repr(float(f.values[j, i])),
                    repr(gx),
                    repr(gy),
                    repr(wx),
                    repr(-gx / wx),
                    repr(-gy / wx),
                    repr(1.0 / wx),
                ]
            )
