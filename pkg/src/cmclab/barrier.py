"""Exact constant-mean-curvature graphs used as references.

Two families:

* a radial graph over an annulus whose slope ratio is ``H*r + t/r``
  (a piece of a vertical-axis unduloid), with vertical slope on both
  boundary circles, and
* the lower hemisphere, the standard exact Dirichlet solution over a
  disk, kept around as a well-behaved solver oracle.

Both are immutable value types with pure methods.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .errors import DomainError, NumericsError, ParameterError
from .geometry import Point2

__all__ = [
    "UnduloidBarrier",
    "HemisphereSolution",
    "radii",
    "slope_is_infinite",
]

_TWO_PI = 2.0 * math.pi
_QUAD_EPS = 1e-12
_TABLE_PANELS = 4096


def radii(t: float, H: float) -> tuple[float, float]:
    """Inner and outer radius of the annulus carrying the radial profile.

    The two roots of ``H r**2 - r + t = 0``; they straddle ``1/(2H)`` and
    merge there as ``t`` approaches ``1/(4H)``.
    """
    if not (isinstance(H, (int, float)) and math.isfinite(H) and H > 0.0):
        raise ParameterError(f"curvature must be a positive real, got {H!r}")
    cap = 1.0 / (4.0 * H)
    if not (isinstance(t, (int, float)) and math.isfinite(t) and 0.0 < t < cap):
        raise ParameterError(
            f"flux parameter must lie in the open interval (0, {cap}), got {t!r}"
        )
    disc = math.sqrt(1.0 - 4.0 * t * H)
    return (1.0 - disc) / (2.0 * H), (1.0 + disc) / (2.0 * H)


def slope_is_infinite(grad) -> bool:
    """Whether a gradient value is the distinguished infinite-slope signal."""
    return bool(np.any(np.isinf(np.asarray(grad, dtype=float))))


def _gl5_cumulative(fn, s_end: float, panels: int) -> CubicSpline:
    """Cumulative antiderivative table of ``fn`` on [0, s_end].

    Composite 5-point Gauss-Legendre per panel, cubic spline through the
    panel edges.  The integrand is smooth in the substitution variable,
    so the edge values carry far more accuracy than the spline needs.
    """
    nodes, weights = np.polynomial.legendre.leggauss(5)
    edges = np.linspace(0.0, s_end, panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    samples = fn(mid[:, None] + half[:, None] * nodes[None, :])
    panel_sums = half * (samples @ weights)
    cumulative = np.concatenate([[0.0], np.cumsum(panel_sums)])
    return CubicSpline(edges, cumulative)


def _substituted_integrands(H: float, t: float):
    """Integrands of the height integral after ``r = r_end -+ s**2``.

    The factored ``1 - g**2`` keeps them smooth and positive across each
    half of the annulus, endpoint included.
    """
    r1, r2 = radii(t, H)

    def psi_lower(s):
        r = r1 + s * s
        g = H * r + t / r
        return 2.0 * g * np.sqrt(r / (H * (1.0 + g) * (r2 - r)))

    def psi_upper(s):
        r = r2 - s * s
        g = H * r + t / r
        return 2.0 * g * np.sqrt(r / (H * (1.0 + g) * (r - r1)))

    return psi_lower, psi_upper


@functools.lru_cache(maxsize=64)
def _height_tables(H: float, t: float):
    r1, r2 = radii(t, H)
    mid = 1.0 / (2.0 * H)
    psi_lower, psi_upper = _substituted_integrands(H, t)
    s_lower = math.sqrt(mid - r1)
    s_upper = math.sqrt(r2 - mid)
    return (
        _gl5_cumulative(psi_lower, s_lower, _TABLE_PANELS),
        _gl5_cumulative(psi_upper, s_upper, _TABLE_PANELS),
        s_lower,
        s_upper,
    )


@dataclass(frozen=True)
class UnduloidBarrier:
    """Radial CMC-``H`` graph over the closed annulus ``r1 <= r <= r2``.

    ``t`` picks the member of the family; the height is normalized to
    ``offset`` at radius ``1/(2H)``.  The graph meets both boundary
    circles vertically, which is what makes it useful as a comparison
    surface.
    """

    H: float
    t: float
    offset: float = 0.0

    def __post_init__(self):
        radii(self.t, self.H)
        if not math.isfinite(self.offset):
            raise ParameterError(f"offset must be finite, got {self.offset!r}")

    @property
    def annulus_radii(self) -> tuple[float, float]:
        return radii(self.t, self.H)

    @property
    def r_inner(self) -> float:
        return self.annulus_radii[0]

    @property
    def r_outer(self) -> float:
        return self.annulus_radii[1]

    def _check_radius(self, r: np.ndarray) -> None:
        r1, r2 = self.annulus_radii
        tol = 1e-12 * r2
        if not np.all(np.isfinite(r)):
            raise DomainError("radius must be finite")
        if np.any(r < r1 - tol) or np.any(r > r2 + tol):
            raise DomainError(
                f"radius outside the annulus [{r1}, {r2}] of definition"
            )

    def slope_ratio(self, r):
        """Ratio ``|grad h| / W`` at radius ``r``: ``H*r + t/r``, in (0, 1]."""
        arr = np.asarray(r, dtype=float)
        self._check_radius(arr)
        g = np.minimum(self.H * arr + self.t / arr, 1.0)
        return float(g) if g.ndim == 0 else g

    def _one_minus_g_sq(self, r):
        # factored form H (r-r1)(r2-r)(1+g)/r: no cancellation near the
        # boundary circles, exact zero at them
        r1, r2 = self.annulus_radii
        g = self.H * r + self.t / r
        return self.H * (r - r1) * (r2 - r) * (1.0 + g) / r

    def slope_w(self, r):
        """Area element ``W = sqrt(1+|grad h|**2) = 1/sqrt(1-g**2)``.

        Infinite on the boundary circles.
        """
        arr = np.asarray(r, dtype=float)
        self._check_radius(arr)
        v = self._one_minus_g_sq(arr)
        with np.errstate(divide="ignore"):
            w = np.where(v > 0.0, 1.0 / np.sqrt(np.maximum(v, 0.0)), np.inf)
        return float(w) if w.ndim == 0 else w

    def _quad_height(self, r: float) -> float:
        low_ps, up_ps = _substituted_integrands(self.H, self.t)
        r1, r2 = self.annulus_radii
        mid = 1.0 / (2.0 * self.H)
        r = min(max(r, r1), r2)
        if r <= mid:
            a, b, fn, sign = math.sqrt(r - r1), math.sqrt(mid - r1), low_ps, -1.0
        else:
            a, b, fn, sign = math.sqrt(r2 - r), math.sqrt(r2 - mid), up_ps, 1.0
        out = quad(fn, a, b, epsabs=_QUAD_EPS, epsrel=_QUAD_EPS, limit=200, full_output=1)
        value, abserr = out[0], out[1]
        if len(out) > 3 or abserr > 1e-9 * max(1.0, abs(value)):
            raise NumericsError(
                f"height quadrature did not converge at r={r} (abserr={abserr})"
            )
        return sign * value

    def eval(self, r: float) -> float:
        """Height of the profile at radius ``r``, by adaptive quadrature.

        The integrand has an inverse-square-root singularity at the
        annulus boundary; the substitution ``r = r_end -+ s**2`` removes
        it before the quadrature sees it.
        """
        arr = np.asarray(r, dtype=float)
        if arr.ndim != 0:
            raise ParameterError("eval takes a scalar radius; use eval_many")
        self._check_radius(arr)
        return self.offset + self._quad_height(float(arr))

    def eval_many(self, r) -> np.ndarray:
        """Vectorized heights via cached antiderivative tables."""
        arr = np.atleast_1d(np.asarray(r, dtype=float))
        self._check_radius(arr)
        low_F, up_F, s_low_mid, s_up_mid = _height_tables(self.H, self.t)
        r1, r2 = self.annulus_radii
        mid = 1.0 / (2.0 * self.H)
        rr = np.clip(arr, r1, r2)
        lower = rr <= mid
        out = np.empty(rr.shape)
        s = np.sqrt(np.maximum(rr - r1, 0.0))
        out[lower] = low_F(s[lower]) - float(low_F(s_low_mid))
        s = np.sqrt(np.maximum(r2 - rr, 0.0))
        out[~lower] = float(up_F(s_up_mid)) - up_F(s[~lower])
        return self.offset + out.reshape(np.shape(r))

    def gradient(self, p: Point2) -> np.ndarray:
        """Gradient at a point of the annulus; radial, magnitude ``g/sqrt(1-g^2)``.

        On the boundary circles the slope is vertical; that is reported
        as the distinguished infinite-slope vector (signed infinities
        along the radial direction), not as an exception.
        """
        r = math.hypot(p.x, p.y)
        self._check_radius(np.asarray(r, dtype=float))
        direction = np.array([p.x, p.y]) / r
        v = float(self._one_minus_g_sq(r))
        if v <= 0.0:
            signal = np.zeros(2)
            nz = direction != 0.0
            signal[nz] = np.sign(direction[nz]) * np.inf
            return signal
        g = min(self.H * r + self.t / r, 1.0)
        return (g / math.sqrt(v)) * direction

    def flux_on_centered_circle(self, rho: float, arc_angle: float) -> float:
        """Flux of the graph's flux form through a centered circular arc.

        For the radial profile this is exact: slope ratio times arc
        length, no quadrature involved.
        """
        if not (0.0 < arc_angle <= _TWO_PI + 1e-12):
            raise ParameterError(
                f"arc angle must lie in (0, 2*pi], got {arc_angle!r}"
            )
        return self.slope_ratio(rho) * rho * arc_angle

    def profile_table(self, n_samples: int = 200) -> dict[str, np.ndarray]:
        """Tabulate (r, height, slope, slope_ratio) across the annulus."""
        if n_samples < 2:
            raise ParameterError("need at least two samples")
        r1, r2 = self.annulus_radii
        r = np.linspace(r1, r2, n_samples)
        g = self.slope_ratio(r)
        w = self.slope_w(r)
        with np.errstate(invalid="ignore"):
            slope = np.where(np.isinf(w), np.inf, g * w)
        return {
            "r": r,
            "height": self.eval_many(r),
            "slope": slope,
            "slope_ratio": g,
        }


@dataclass(frozen=True)
class HemisphereSolution:
    """Lower hemisphere of radius ``1/H``: the textbook exact CMC graph.

    Defined on the open disk of that radius about ``center``; its mean
    curvature with respect to the upward normal is ``H`` everywhere.
    """

    H: float
    center: Point2 = Point2(0.0, 0.0)
    offset: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.H) and self.H > 0.0):
            raise ParameterError(f"curvature must be positive, got {self.H!r}")
        if not math.isfinite(self.offset):
            raise ParameterError(f"offset must be finite, got {self.offset!r}")

    @property
    def rim_radius(self) -> float:
        return 1.0 / self.H

    def _r_sq(self, px, py):
        dx = np.asarray(px, dtype=float) - self.center.x
        dy = np.asarray(py, dtype=float) - self.center.y
        rsq = dx * dx + dy * dy
        R = self.rim_radius
        if np.any(~np.isfinite(rsq)) or np.any(rsq >= R * R):
            raise DomainError("point outside the open disk of radius 1/H")
        return dx, dy, rsq

    def eval(self, px, py):
        dx, dy, rsq = self._r_sq(px, py)
        out = self.offset - np.sqrt(self.rim_radius ** 2 - rsq)
        return float(out) if out.ndim == 0 else out

    def gradient(self, px, py) -> np.ndarray:
        """Gradient, stacked on the last axis."""
        dx, dy, rsq = self._r_sq(px, py)
        root = np.sqrt(self.rim_radius ** 2 - rsq)
        return np.stack([dx / root, dy / root], axis=-1)

    def w(self, px, py):
        """Area element ``sqrt(1 + |grad u|**2)``."""
        dx, dy, rsq = self._r_sq(px, py)
        out = 1.0 / (self.H * np.sqrt(self.rim_radius ** 2 - rsq))
        return float(out) if out.ndim == 0 else out
