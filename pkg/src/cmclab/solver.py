"""Dirichlet solver for the prescribed-mean-curvature graph equation.

Damped Newton iteration on the conservative cell residual, with
boundary values imposed through interpolated ray rows: for each ring
node the boundary is located along a lattice direction and the Dirichlet
value enters through a linear two-node extrapolation row, which keeps
the overall scheme second order on curved domains.  Non-convergence is
a recorded outcome, never an exception: the continuous problem itself
may have no solution for steep data on flat boundary pieces.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import CubicSpline
from scipy.sparse.linalg import spsolve

from .errors import ConfigError, NumericsError, ParameterError
from .field import (
    BOUNDARY,
    EXTERIOR,
    INTERIOR,
    Grid,
    ScalarField,
    _gauss_coeffs,
    build_cells,
    cell_energy_terms,
    slope_w,
)
from .geometry import Domain
from .barrier import radii

__all__ = [
    "FiniteData",
    "RampData",
    "CappedData",
    "BoundaryData",
    "SolverConfig",
    "CMCSolution",
    "solve_dirichlet",
    "solve_sequence",
    "solve_radial",
    "RadialProfile",
    "serrin_check",
]

# candidate ray directions (dj, di), axis neighbors first; ties resolved
# in this order
_RAY_DIRECTIONS = (
    (0, 1),  # E
    (0, -1),  # W
    (1, 0),  # N
    (-1, 0),  # S
    (1, 1),  # NE
    (1, -1),  # NW
    (-1, 1),  # SE
    (-1, -1),  # SW
)


@dataclass(frozen=True)
class FiniteData:
    """Bounded Dirichlet data given as a function of arclength on a piece."""

    fn: Callable[[float], float]


@dataclass(frozen=True)
class RampData:
    """Data of the form scale * base(arclength), for blow-up sequences."""

    base: Callable[[float], float]
    scale: float

    def __post_init__(self):
        if not math.isfinite(self.scale):
            raise ParameterError(f"ramp scale must be finite, got {self.scale!r}")


@dataclass(frozen=True)
class CappedData:
    """Constant level standing in for +infinity boundary data."""

    level: float

    def __post_init__(self):
        if not math.isfinite(self.level):
            raise ParameterError(f"capped level must be finite, got {self.level!r}")


DataEntry = FiniteData | RampData | CappedData


@dataclass(frozen=True)
class BoundaryData:
    """Dirichlet data keyed by the data tag of each boundary piece."""

    entries: Mapping[str, DataEntry]

    def __post_init__(self):
        object.__setattr__(self, "entries", dict(self.entries))
        for tag, entry in self.entries.items():
            if not isinstance(entry, (FiniteData, RampData, CappedData)):
                raise ConfigError(f"unsupported data entry for tag {tag!r}")

    def value_at(self, tag: str, s: float) -> float:
        if tag not in self.entries:
            raise ConfigError(f"no boundary data for tag {tag!r}")
        entry = self.entries[tag]
        if isinstance(entry, FiniteData):
            value = float(entry.fn(s))
        elif isinstance(entry, RampData):
            value = entry.scale * float(entry.base(s))
        else:
            value = entry.level
        if not math.isfinite(value):
            raise ParameterError(
                f"boundary data for tag {tag!r} is not finite at arclength {s:g}"
            )
        return value

    def validate_tags(self, dom: Domain) -> None:
        dom_tags = {piece.data_tag for piece in dom.all_pieces()}
        missing = dom_tags - set(self.entries)
        unknown = set(self.entries) - dom_tags
        if missing:
            raise ConfigError(f"boundary pieces without data: {sorted(missing)}")
        if unknown:
            raise ConfigError(f"data for unknown tags: {sorted(unknown)}")


@dataclass(frozen=True)
class SolverConfig:
    h: float
    residual_tol: float = 1e-8
    max_newton_iters: int = 50
    armijo_factor: float = 0.5
    armijo_slope: float = 1e-4
    min_step: float = 2.0 ** -20
    linear_tol: float = 1e-10  # kept for iterative backends; direct solve used

    def __post_init__(self):
        if not (self.h > 0.0 and math.isfinite(self.h)):
            raise ConfigError(f"grid spacing must be positive, got {self.h!r}")
        for name in ("residual_tol", "linear_tol", "min_step"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"{name} must be positive")
        if not (0.0 < self.armijo_factor < 1.0):
            raise ConfigError("armijo factor must lie in (0, 1)")
        if self.max_newton_iters < 1:
            raise ConfigError("need at least one Newton iteration")


@dataclass(eq=False)
class CMCSolution:
    field: ScalarField
    H: float
    data: BoundaryData
    residual_norm: float
    iterations: int
    converged: bool
    diagnostics: dict
    domain: Domain

    def diagnostics_json(self) -> str:
        return json.dumps(
            {
                "residual_norm": self.residual_norm,
                "iterations": self.iterations,
                "converged": self.converged,
                "max_W": self.diagnostics.get("max_w"),
            },
            sort_keys=True,
        )


def serrin_check(dom: Domain, H: float) -> list[int]:
    """Indices of boundary pieces whose exterior curvature drops below 2H.

    An empty list is the classical solvability condition for arbitrary
    bounded Dirichlet data; equality counts as satisfying it.
    """
    if not H > 0.0:
        raise ParameterError(f"curvature must be positive, got {H!r}")
    bar = 2.0 * H
    slack = 1e-12 * max(1.0, bar)
    return [
        k
        for k, piece in enumerate(dom.all_pieces())
        if piece.exterior_curvature < bar - slack
    ]


@dataclass(eq=False)
class _BoundaryRows:
    """Precomputed linear rows imposing the Dirichlet data on ring nodes.

    Row for node b: u_b - w * u_v = c * g(X) with w = delta/(L+delta),
    c = L/(L+delta); fallback rows have w = 0, c = 1 and X the nearest
    boundary point.
    """

    b_nodes: np.ndarray
    v_nodes: np.ndarray
    w_coef: np.ndarray
    g_scale: np.ndarray
    piece_ids: np.ndarray
    s_values: np.ndarray


def _build_boundary_rows(grid: Grid, dom: Domain) -> _BoundaryRows:
    mask = grid.mask
    ny, nx = mask.shape
    h = grid.h
    xs, ys = grid.xs, grid.ys
    pieces = dom.all_pieces()

    b_list, v_list, w_list, c_list, pid_list, s_list = [], [], [], [], [], []
    jj, ii = np.nonzero(mask == BOUNDARY)
    for j, i in zip(jj, ii):
        b = np.array([xs[i], ys[j]])
        best = None
        for rank, (dj, di) in enumerate(_RAY_DIRECTIONS):
            jn, in_ = j + dj, i + di
            outside_grid = not (0 <= jn < ny and 0 <= in_ < nx)
            if not outside_grid and mask[jn, in_] != EXTERIOR:
                continue
            jv, iv = j - dj, i - di
            if not (0 <= jv < ny and 0 <= iv < nx) or mask[jv, iv] == EXTERIOR:
                continue
            step = h * math.hypot(dj, di)
            target = b + np.array([di * h, dj * h])
            hit = None
            for pid, piece in enumerate(pieces):
                for t, s_on_piece in piece.geometry.intersect_segment(b, target):
                    if hit is None or t < hit[0]:
                        hit = (t, pid, s_on_piece)
            if hit is None:
                continue
            t, pid, s_on_piece = hit
            delta = t * step
            v_interior = 0 if mask[jv, iv] == INTERIOR else 1
            score = (v_interior, delta / step, rank)
            if best is None or score < best[0]:
                best = (score, jv * nx + iv, delta, step, pid, s_on_piece)
        b_flat = j * nx + i
        if best is None:
            pid, s_on_piece, _ = dom.nearest_piece(b[0], b[1])
            b_list.append(b_flat)
            v_list.append(b_flat)
            w_list.append(0.0)
            c_list.append(1.0)
            pid_list.append(pid)
            s_list.append(s_on_piece)
        else:
            _, v_flat, delta, step, pid, s_on_piece = best
            b_list.append(b_flat)
            v_list.append(v_flat)
            w_list.append(delta / (step + delta))
            c_list.append(step / (step + delta))
            pid_list.append(pid)
            s_list.append(s_on_piece)
    return _BoundaryRows(
        b_nodes=np.array(b_list, dtype=np.int64),
        v_nodes=np.array(v_list, dtype=np.int64),
        w_coef=np.array(w_list),
        g_scale=np.array(c_list),
        piece_ids=np.array(pid_list, dtype=np.int64),
        s_values=np.array(s_list),
    )


def _data_values(rows: _BoundaryRows, dom: Domain, data: BoundaryData) -> np.ndarray:
    pieces = dom.all_pieces()
    return np.array(
        [
            data.value_at(pieces[pid].data_tag, s)
            for pid, s in zip(rows.piece_ids, rows.s_values)
        ]
    )


@dataclass(eq=False)
class _Workspace:
    """Grid-dependent assembly state shared across a solve sequence."""

    grid: Grid
    rows: _BoundaryRows
    col_of_node: np.ndarray
    n_unknowns: int
    interior_nodes: np.ndarray
    interior_rows: np.ndarray
    ring_rows: np.ndarray
    cells: object
    hess_rows: list
    hess_cols: list
    hess_keep: list
    ring_matrix_rows: np.ndarray
    ring_matrix_cols: np.ndarray
    ring_matrix_vals: np.ndarray


def _build_workspace(dom: Domain, cfg: SolverConfig) -> _Workspace:
    grid = Grid.from_domain(dom, cfg.h)
    xmin, ymin, xmax, ymax = dom.bounding_box
    if min(xmax - xmin, ymax - ymin) / cfg.h < 20.0:
        raise ConfigError(
            "grid spacing too coarse: need at least 20 nodes across the domain"
        )
    mask_flat = grid.mask.ravel()
    unknowns = np.nonzero(mask_flat != EXTERIOR)[0]
    col_of_node = np.full(mask_flat.size, -1, dtype=np.int64)
    col_of_node[unknowns] = np.arange(unknowns.size)

    interior_nodes = np.nonzero(mask_flat == INTERIOR)[0]
    interior_rows = col_of_node[interior_nodes]
    rows = _build_boundary_rows(grid, dom)
    ring_rows = col_of_node[rows.b_nodes]

    cells = build_cells(grid)
    corner_idx = (cells.sw, cells.se, cells.nw, cells.ne)
    hess_rows, hess_cols, keep = [], [], []
    for a in range(4):
        for b in range(4):
            sel = mask_flat[corner_idx[a]] == INTERIOR
            keep.append(sel)
            hess_rows.append(col_of_node[corner_idx[a][sel]])
            hess_cols.append(col_of_node[corner_idx[b][sel]])

    ring_cols_b = col_of_node[rows.b_nodes]
    ring_cols_v = col_of_node[rows.v_nodes]
    ring_matrix_rows = np.concatenate([ring_rows, ring_rows])
    ring_matrix_cols = np.concatenate([ring_cols_b, ring_cols_v])
    ring_matrix_vals = np.concatenate([np.ones_like(rows.w_coef), -rows.w_coef])

    return _Workspace(
        grid=grid,
        rows=rows,
        col_of_node=col_of_node,
        n_unknowns=unknowns.size,
        interior_nodes=interior_nodes,
        interior_rows=interior_rows,
        ring_rows=ring_rows,
        cells=cells,
        hess_rows=hess_rows,
        hess_cols=hess_cols,
        hess_keep=keep,
        ring_matrix_rows=ring_matrix_rows,
        ring_matrix_cols=ring_matrix_cols,
        ring_matrix_vals=ring_matrix_vals,
    )


def _full_vector(ws: _Workspace, x: np.ndarray) -> np.ndarray:
    u = np.zeros(ws.grid.node_count())
    u[ws.col_of_node >= 0] = x
    return u


def _residual(ws: _Workspace, x: np.ndarray, H: float, g_vals: np.ndarray) -> np.ndarray:
    grid = ws.grid
    u = _full_vector(ws, x)
    p, q, w = cell_energy_terms(ws.cells, u, grid.h)
    cp, cq = _gauss_coeffs(grid.h)
    acc = np.zeros(grid.node_count())
    corner_idx = (ws.cells.sw, ws.cells.se, ws.cells.nw, ws.cells.ne)
    for g in range(4):
        fx, fy = p[g] / w[g], q[g] / w[g]
        for corner in range(4):
            np.add.at(
                acc,
                corner_idx[corner],
                -0.25 * (fx * cp[g][corner] + fy * cq[g][corner]),
            )
    out = np.empty(ws.n_unknowns)
    out[ws.interior_rows] = acc[ws.interior_nodes] - 2.0 * H
    xb = x[ws.col_of_node[ws.rows.b_nodes]]
    xv = x[ws.col_of_node[ws.rows.v_nodes]]
    out[ws.ring_rows] = xb - ws.rows.w_coef * xv - ws.rows.g_scale * g_vals
    return out


def _jacobian(ws: _Workspace, x: np.ndarray) -> sp.csr_matrix:
    grid = ws.grid
    u = _full_vector(ws, x)
    p, q, w = cell_energy_terms(ws.cells, u, grid.h)
    cp, cq = _gauss_coeffs(grid.h)
    data_blocks, row_blocks, col_blocks = [], [], []
    w3 = w * w * w
    k = 0
    for a in range(4):
        for b in range(4):
            val = np.zeros(p.shape[1])
            for g in range(4):
                first = (cp[g][a] * cp[g][b] + cq[g][a] * cq[g][b]) / w[g]
                da = p[g] * cp[g][a] + q[g] * cq[g][a]
                db = p[g] * cp[g][b] + q[g] * cq[g][b]
                val += 0.25 * (first - da * db / w3[g])
            sel = ws.hess_keep[k]
            # residual is minus the energy gradient
            data_blocks.append(-val[sel])
            row_blocks.append(ws.hess_rows[k])
            col_blocks.append(ws.hess_cols[k])
            k += 1
    data_blocks.append(ws.ring_matrix_vals)
    row_blocks.append(ws.ring_matrix_rows)
    col_blocks.append(ws.ring_matrix_cols)
    J = sp.coo_matrix(
        (np.concatenate(data_blocks), (np.concatenate(row_blocks), np.concatenate(col_blocks))),
        shape=(ws.n_unknowns, ws.n_unknowns),
    )
    return J.tocsr()


def _poisson_init(ws: _Workspace, H: float, g_vals: np.ndarray) -> np.ndarray:
    grid = ws.grid
    nx = grid.nx
    rows, cols, vals = [], [], []
    r = ws.interior_rows
    nodes = ws.interior_nodes
    for shift, coef in ((0, 4.0), (1, -1.0), (-1, -1.0), (nx, -1.0), (-nx, -1.0)):
        rows.append(r)
        cols.append(ws.col_of_node[nodes + shift])
        vals.append(np.full(r.size, coef))
    rows.append(ws.ring_matrix_rows)
    cols.append(ws.ring_matrix_cols)
    vals.append(ws.ring_matrix_vals)
    A = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(ws.n_unknowns, ws.n_unknowns),
    ).tocsr()
    rhs = np.zeros(ws.n_unknowns)
    rhs[ws.interior_rows] = -2.0 * H * grid.h * grid.h
    rhs[ws.ring_rows] = ws.rows.g_scale * g_vals
    x = spsolve(A, rhs)
    return x


def _solve_on_workspace(
    ws: _Workspace,
    dom: Domain,
    data: BoundaryData,
    H: float,
    cfg: SolverConfig,
    warm_start: np.ndarray | None = None,
) -> CMCSolution:
    data.validate_tags(dom)
    if not (H > 0.0 and math.isfinite(H)):
        raise ParameterError(f"curvature must be positive, got {H!r}")
    g_vals = _data_values(ws.rows, dom, data)

    init_kind = "warm"
    x = None
    if warm_start is not None:
        x = warm_start.ravel()[ws.col_of_node >= 0].copy()
    if x is None or not np.all(np.isfinite(x)):
        x = _poisson_init(ws, H, g_vals)
        init_kind = "poisson"
    if not np.all(np.isfinite(x)):
        x = np.zeros(ws.n_unknowns)
        init_kind = "zero"

    def split_norms(res):
        # interior rows carry the curvature residual; ring rows must also
        # hold or a warm start would keep the previous data's trace
        i_norm = float(np.abs(res[ws.interior_rows]).max(initial=0.0))
        r_norm = float(np.abs(res[ws.ring_rows]).max(initial=0.0))
        return i_norm, r_norm

    res = _residual(ws, x, H, g_vals)
    i_norm, r_norm = split_norms(res)
    best_x, best_metric, best_interior = x.copy(), max(i_norm, r_norm), i_norm
    iterations = 0
    converged = max(i_norm, r_norm) <= cfg.residual_tol
    stalled = False

    while not converged and iterations < cfg.max_newton_iters:
        J = _jacobian(ws, x)
        delta = spsolve(J, -res)
        if not np.all(np.isfinite(delta)):
            stalled = True
            break
        phi0 = float(np.linalg.norm(res))
        alpha = 1.0
        accepted = False
        while alpha >= cfg.min_step:
            trial = x + alpha * delta
            res_trial = _residual(ws, trial, H, g_vals)
            phi = float(np.linalg.norm(res_trial))
            if math.isfinite(phi) and phi <= (1.0 - cfg.armijo_slope * alpha) * phi0:
                x, res = trial, res_trial
                accepted = True
                break
            alpha *= cfg.armijo_factor
        iterations += 1
        if not accepted:
            stalled = True
            break
        i_norm, r_norm = split_norms(res)
        if max(i_norm, r_norm) < best_metric:
            best_x, best_metric, best_interior = x.copy(), max(i_norm, r_norm), i_norm
        converged = max(i_norm, r_norm) <= cfg.residual_tol

    final_norm = i_norm if converged else best_interior

    values = np.full(ws.grid.node_count(), np.nan)
    values[ws.col_of_node >= 0] = x if converged else best_x
    fld = ScalarField(ws.grid, values.reshape(ws.grid.mask.shape))
    wfield = slope_w(fld)
    max_w = float(np.nanmax(wfield.values[ws.grid.nonexterior]))
    diagnostics = {
        "max_w": max_w,
        "serrin_violations": serrin_check(dom, H),
        "init": init_kind,
        "stalled": stalled,
    }
    return CMCSolution(
        field=fld,
        H=H,
        data=data,
        residual_norm=final_norm,
        iterations=iterations,
        converged=converged,
        diagnostics=diagnostics,
        domain=dom,
    )


def solve_dirichlet(
    dom: Domain, data: BoundaryData, H: float, cfg: SolverConfig
) -> CMCSolution:
    """Solve the Dirichlet problem on a gridded domain.

    The initial iterate solves the linearized problem (Poisson with the
    same boundary rows); Newton steps are damped by Armijo backtracking
    on the residual 2-norm.  Returns the best iterate with a converged
    flag; inspect ``converged`` rather than relying on exceptions.
    """
    ws = _build_workspace(dom, cfg)
    return _solve_on_workspace(ws, dom, data, H, cfg)


def solve_sequence(
    dom: Domain,
    data_family: Callable[[float], BoundaryData],
    H: float,
    cfg: SolverConfig,
    n_list: Sequence[float],
) -> list[CMCSolution]:
    """Solve for each parameter in order, warm-starting from the last fit.

    Entries that fail to converge are recorded and the sequence moves on.
    """
    ws = _build_workspace(dom, cfg)
    out: list[CMCSolution] = []
    warm = None
    for n in n_list:
        sol = _solve_on_workspace(ws, dom, data_family(n), H, cfg, warm_start=warm)
        out.append(sol)
        warm = sol.field.values
    return out


@dataclass(eq=False)
class RadialProfile:
    """Radial profile integrated as an ODE, queryable at any radius."""

    t: float
    H: float
    r: np.ndarray
    height: np.ndarray
    _lower: CubicSpline
    _upper: CubicSpline
    _s_lower: float
    _s_upper: float

    def height_at(self, r) -> np.ndarray:
        r1, r2 = radii(self.t, self.H)
        arr = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(arr < r1 - 1e-12 * r2) or np.any(arr > r2 + 1e-12 * r2):
            raise ParameterError("radius outside the annulus of definition")
        arr = np.clip(arr, r1, r2)
        mid = 1.0 / (2.0 * self.H)
        out = np.empty(arr.shape)
        lower = arr <= mid
        s = np.sqrt(np.maximum(arr - r1, 0.0))
        out[lower] = self._lower(s[lower]) - float(self._lower(self._s_lower))
        s = np.sqrt(np.maximum(r2 - arr, 0.0))
        out[~lower] = float(self._upper(self._s_upper)) - self._upper(s[~lower])
        return out.reshape(np.shape(r))

    def table(self) -> dict[str, np.ndarray]:
        return {"r": self.r, "height": self.height}


def _rk4_cumulative(fn, s_end: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative integral of fn on [0, s_end] by RK4 steps."""
    s = np.linspace(0.0, s_end, n + 1)
    h = s_end / n
    vals = np.zeros(n + 1)
    acc = 0.0
    for k in range(n):
        a = s[k]
        k1 = fn(a)
        k2 = fn(a + 0.5 * h)
        k4 = fn(a + h)
        acc += h * (k1 + 4.0 * k2 + k4) / 6.0
        vals[k + 1] = acc
    return s, vals


def solve_radial(t: float, H: float, n_steps: int = 256) -> RadialProfile:
    """Integrate the radial slope ODE across the annulus.

    Works in the substitution variable s = sqrt(|r - r_end|) where the
    slope is smooth, refining the step count until two consecutive
    refinements agree to 1e-10.  Independent of the quadrature used by
    the closed-form barrier evaluation.
    """
    if n_steps < 8:
        raise ParameterError("need at least 8 integration steps")
    r1, r2 = radii(t, H)
    mid = 1.0 / (2.0 * H)

    def g_of(rr):
        return H * rr + t / rr

    def psi_lower(s):
        rr = r1 + s * s
        g = g_of(rr)
        return 2.0 * g * math.sqrt(rr / (H * (1.0 + g) * (r2 - rr)))

    def psi_upper(s):
        rr = r2 - s * s
        g = g_of(rr)
        return 2.0 * g * math.sqrt(rr / (H * (1.0 + g) * (rr - r1)))

    def refine(fn, s_end):
        n = n_steps
        s, vals = _rk4_cumulative(fn, s_end, n)
        while True:
            n *= 2
            s2, vals2 = _rk4_cumulative(fn, s_end, n)
            if abs(vals2[-1] - vals[-1]) <= 1e-10:
                return s2, vals2
            if n > 2 ** 20:
                raise NumericsError("radial integration did not converge")
            s, vals = s2, vals2

    s_lo, f_lo = refine(psi_lower, math.sqrt(mid - r1))
    s_up, f_up = refine(psi_upper, math.sqrt(r2 - mid))
    lower = CubicSpline(s_lo, f_lo)
    upper = CubicSpline(s_up, f_up)

    # assemble an increasing-radius table from both halves
    r_lower = r1 + s_lo * s_lo
    h_lower = f_lo - f_lo[-1]
    r_upper = (r2 - s_up * s_up)[::-1]
    h_upper = (f_up[-1] - f_up)[::-1]
    r_all = np.concatenate([r_lower, r_upper[1:]])
    h_all = np.concatenate([h_lower, h_upper[1:]])
    return RadialProfile(
        t=t,
        H=H,
        r=r_all,
        height=h_all,
        _lower=lower,
        _upper=upper,
        _s_lower=float(s_lo[-1]),
        _s_upper=float(s_up[-1]),
    )
