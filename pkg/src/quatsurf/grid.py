"""Discrete exterior calculus for quaternion-valued fields on a uniform grid.

The grid carries the conformal coordinate z = x + iy, axis 0 of every value
array is x and axis 1 is y, and each node holds a quaternion [w,x,y,z], so
fields have shape (nx, ny, 4). One-forms are stored by their components on
the coordinate frame, omega(d/dx) and omega(d/dy); two-forms by the density
in front of dx^dy. Derivatives are second-order central differences inside
the grid and second-order one-sided three-point stencils on the boundary
rings, which is why residual max-norms trim boundary rings by default.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, GridMismatch, NotClosed, NotComplexStructure
from .quaternion import qabs2, qconj, qmul

# Default unit-imaginary gate for decompositions: loose enough for normals
# obtained by second-order differences at h <= 0.05, tight enough to reject
# fields that are not complex structures at all.
COMPLEX_STRUCTURE_TOL = 1e-3


@dataclass(frozen=True)
class GridSpec:
    """Uniform rectangular sampling of a simply connected chart."""

    nx: int
    ny: int
    x0: float = 0.0
    y0: float = 0.0
    hx: float = 1.0
    hy: float = 1.0

    def __post_init__(self):
        if self.nx < 5 or self.ny < 5:
            raise DomainError(f"grid needs nx, ny >= 5, got {self.nx}x{self.ny}")
        if not (self.hx > 0 and self.hy > 0):
            raise DomainError("grid spacings must be positive")

    @property
    def shape(self):
        return (self.nx, self.ny)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.hx * np.arange(self.nx)

    @property
    def y(self) -> np.ndarray:
        return self.y0 + self.hy * np.arange(self.ny)

    def mesh(self):
        """Coordinate arrays X, Y of shape (nx, ny)."""
        return np.meshgrid(self.x, self.y, indexing="ij")

    @property
    def diameter(self) -> float:
        return float(np.hypot(self.hx * (self.nx - 1), self.hy * (self.ny - 1)))


def _check_values(grid: GridSpec, values: np.ndarray, what: str) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.nx, grid.ny, 4):
        raise GridMismatch(
            f"{what} has shape {values.shape}, grid wants {(grid.nx, grid.ny, 4)}"
        )
    return values


@dataclass
class ScalarField:
    """Quaternion-valued function sampled on the grid."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        self.values = _check_values(self.grid, self.values, "field values")


@dataclass
class OneForm:
    """Quaternion-valued one-form, components (omega(d/dx), omega(d/dy))."""

    grid: GridSpec
    cx: np.ndarray
    cy: np.ndarray

    def __post_init__(self):
        self.cx = _check_values(self.grid, self.cx, "one-form cx")
        self.cy = _check_values(self.grid, self.cy, "one-form cy")


@dataclass
class TwoForm:
    """Quaternion-valued two-form, the coefficient of dx^dy."""

    grid: GridSpec
    density: np.ndarray

    def __post_init__(self):
        self.density = _check_values(self.grid, self.density, "two-form density")


def same_grid(*objs):
    g = objs[0].grid
    for o in objs[1:]:
        if o.grid != g:
            raise GridMismatch(f"grids differ: {o.grid} vs {g}")
    return g


def differential(f: ScalarField) -> OneForm:
    """Exterior derivative of a function: df = f_x dx + f_y dy."""
    g = f.grid
    cx = np.gradient(f.values, g.hx, axis=0, edge_order=2)
    cy = np.gradient(f.values, g.hy, axis=1, edge_order=2)
    return OneForm(g, cx, cy)


def hodge_star(omega: OneForm) -> OneForm:
    """(*omega)(d/dx) = omega(d/dy), (*omega)(d/dy) = -omega(d/dx)."""
    return OneForm(omega.grid, omega.cy.copy(), -omega.cx)


def exterior_derivative(omega: OneForm) -> TwoForm:
    g = omega.grid
    d = (
        np.gradient(omega.cy, g.hx, axis=0, edge_order=2)
        - np.gradient(omega.cx, g.hy, axis=1, edge_order=2)
    )
    return TwoForm(g, d)


def wedge(omega: OneForm, eta: OneForm) -> TwoForm:
    """omega ^ eta; the quaternion product order is the argument order."""
    g = same_grid(omega, eta)
    return TwoForm(g, qmul(omega.cx, eta.cy) - qmul(omega.cy, eta.cx))


def _as_values(n) -> np.ndarray:
    return n.values if isinstance(n, ScalarField) else np.asarray(n, dtype=float)


def _check_complex_structure(nvals: np.ndarray, tol: float):
    sq = qmul(nvals, nvals)
    sq0 = sq.copy()
    sq0[..., 0] += 1.0
    worst = float(np.nanmax(np.linalg.norm(sq0, axis=-1)))
    if not worst <= tol:
        raise NotComplexStructure(
            f"field squares to -1 only within {worst:.3e} (tol {tol:.1e})"
        )


def decompose_left(omega: OneForm, n, tol: float = COMPLEX_STRUCTURE_TOL):
    """Split omega = omega_n + omega_{-n} with *omega_n = n omega_n.

    omega_n = (omega - n *omega)/2, so its components are
    ((cx - n cy)/2, (cy + n cx)/2).
    """
    nv = _as_values(n)
    _check_complex_structure(nv, tol)
    px = 0.5 * (omega.cx - qmul(nv, omega.cy))
    py = 0.5 * (omega.cy + qmul(nv, omega.cx))
    part = OneForm(omega.grid, px, py)
    rest = OneForm(omega.grid, omega.cx - px, omega.cy - py)
    return part, rest


def decompose_right(omega: OneForm, n, tol: float = COMPLEX_STRUCTURE_TOL):
    """Split omega = omega^n + omega^{-n} with *omega^n = omega^n n."""
    nv = _as_values(n)
    _check_complex_structure(nv, tol)
    px = 0.5 * (omega.cx - qmul(omega.cy, nv))
    py = 0.5 * (omega.cy + qmul(omega.cx, nv))
    part = OneForm(omega.grid, px, py)
    rest = OneForm(omega.grid, omega.cx - px, omega.cy - py)
    return part, rest


def interior_max(values: np.ndarray, trim: int = 1) -> float:
    """Max of |values| with `trim` boundary rings removed (clamped so at
    least a 3x3 block survives); NaN nodes are ignored."""
    mag = np.asarray(values, dtype=float)
    if mag.ndim == 3:
        mag = np.linalg.norm(mag, axis=-1)
    nx, ny = mag.shape
    tx = min(trim, max(0, (nx - 3) // 2))
    ty = min(trim, max(0, (ny - 3) // 2))
    core = mag[tx : nx - tx, ty : ny - ty]
    if np.all(np.isnan(core)):
        return float("nan")
    return float(np.nanmax(core))


def interior_mean(values: np.ndarray, trim: int = 1) -> float:
    mag = np.asarray(values, dtype=float)
    if mag.ndim == 3:
        mag = np.linalg.norm(mag, axis=-1)
    nx, ny = mag.shape
    tx = min(trim, max(0, (nx - 3) // 2))
    ty = min(trim, max(0, (ny - 3) // 2))
    core = mag[tx : nx - tx, ty : ny - ty]
    if np.all(np.isnan(core)):
        return float("nan")
    return float(np.nanmean(core))


def closedness_residual(omega: OneForm, trim: int = 1) -> float:
    """Max-norm of the d(omega) density over interior nodes."""
    return interior_max(exterior_derivative(omega).density, trim=trim)


def _cumtrapz(c: np.ndarray, h: float, axis: int) -> np.ndarray:
    """Cumulative trapezoid along `axis`, starting at 0."""
    lo = [slice(None)] * c.ndim
    hi = [slice(None)] * c.ndim
    lo[axis] = slice(None, -1)
    hi[axis] = slice(1, None)
    inc = 0.5 * h * (c[tuple(lo)] + c[tuple(hi)])
    out = np.zeros_like(c)
    out[tuple(hi)] = np.cumsum(inc, axis=axis)
    return out


def _potential_row_first(omega: OneForm) -> np.ndarray:
    g = omega.grid
    along_row0 = _cumtrapz(omega.cx[:, :1, :], g.hx, axis=0)
    up_columns = _cumtrapz(omega.cy, g.hy, axis=1)
    return along_row0 + up_columns


def _potential_column_first(omega: OneForm) -> np.ndarray:
    g = omega.grid
    up_col0 = _cumtrapz(omega.cy[:1, :, :], g.hy, axis=1)
    along_rows = _cumtrapz(omega.cx, g.hx, axis=0)
    return up_col0 + along_rows


def integrate_potential(
    omega: OneForm,
    p0=(0, 0),
    v0=None,
    tol: float = 1e-2,
    trim: int = 1,
) -> ScalarField:
    """Primitive F with dF ~ omega and F(p0) = v0 on the simply connected grid.

    Trapezoidal sums run along the first grid row and then up each column;
    the value at p0 is shifted to v0 afterwards, which is exact for closed
    forms. Raises NotClosed (carrying the residual) when the d(omega)
    density exceeds tol, since only closed forms have a path-independent
    primitive.
    """
    resid = closedness_residual(omega, trim=trim)
    if not resid <= tol:
        raise NotClosed(
            f"one-form is not closed: max |d(omega)| = {resid:.3e} > tol {tol:.1e}",
            residual=resid,
        )
    pot = _potential_row_first(omega)
    base = pot[p0[0], p0[1]].copy()
    pot -= base
    if v0 is not None:
        pot += np.asarray(v0, dtype=float)
    return ScalarField(omega.grid, pot)


def integrate_potential_two_path(omega: OneForm, p0=(0, 0), v0=None):
    """Row-first primitive plus the max disagreement against the
    column-first path; the two are never averaged."""
    row = _potential_row_first(omega)
    col = _potential_column_first(omega)
    gap = float(np.nanmax(np.linalg.norm(row - col, axis=-1)))
    base = row[p0[0], p0[1]].copy()
    row = row - base
    if v0 is not None:
        row = row + np.asarray(v0, dtype=float)
    return ScalarField(omega.grid, row), gap


def fd1d(values: np.ndarray, h: float, axis: int = 0, order: int = 2) -> np.ndarray:
    """First derivative of samples along `axis`.

    order=2 is the grid's standard stencil set; order=4 uses five-point
    stencils (needs >= 5 samples, falls back to order 2 below that) and
    serves the profile identity certificates that sit near 1e-6.
    """
    v = np.asarray(values, dtype=float)
    n = v.shape[axis]
    if order == 2 or n < 5:
        return np.gradient(v, h, axis=axis, edge_order=2 if n >= 3 else 1)
    v = np.moveaxis(v, axis, 0)
    out = np.empty_like(v)
    out[2:-2] = (v[:-4] - 8 * v[1:-3] + 8 * v[3:-1] - v[4:]) / (12 * h)
    out[0] = (-25 * v[0] + 48 * v[1] - 36 * v[2] + 16 * v[3] - 3 * v[4]) / (12 * h)
    out[1] = (-3 * v[0] - 10 * v[1] + 18 * v[2] - 6 * v[3] + v[4]) / (12 * h)
    out[-2] = (3 * v[-1] + 10 * v[-2] - 18 * v[-3] + 6 * v[-4] - v[-5]) / (12 * h)
    out[-1] = (25 * v[-1] - 48 * v[-2] + 36 * v[-3] - 16 * v[-4] + 3 * v[-5]) / (12 * h)
    return np.moveaxis(out, 0, axis)
