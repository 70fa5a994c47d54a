"""Conformal-geometry data of a sampled surface and its residual functionals.

Everything here starts from a quaternion-valued map f on the grid. The
left/right normals come from the factorizations *df = N df = -df R, the
curvature datum H from df H = (dN)_N, and the Hopf one-form w ties the two
together. Residual functionals turn the structural identities into numbers:
they vanish to O(h^2) exactly when the identity holds for the underlying
smooth surface, so they serve both as certificates and as detection tests.

Max-norms trim boundary rings; each finite-difference pass contaminates one
more ring with one-sided-stencil constants, so deeper derived quantities
trim more (df: 1, H: 2, w: 3, d*dH^{-1}: 4).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import AllBranch, MinimalPoint
from .grid import (
    GridSpec,
    OneForm,
    ScalarField,
    _check_values,
    closedness_residual,
    decompose_left,
    decompose_right,
    differential,
    exterior_derivative,
    hodge_star,
    interior_max,
    interior_mean,
)
from .quaternion import apply_motion, qabs, qconj, qim, qmul

# Fraction of the median |f_x| below which a node counts as a branch point.
BRANCH_FRACTION = 1e-9


@dataclass
class SurfaceGrid:
    """Samples of a map f: rectangle -> H, the discrete conformal map."""

    grid: GridSpec
    f: np.ndarray

    def __post_init__(self):
        self.f = _check_values(self.grid, self.f, "surface samples")

    def field(self) -> ScalarField:
        return ScalarField(self.grid, self.f)


@dataclass
class SphereData:
    """Mean curvature sphere frame attached to a surface.

    left_normal and right_normal are unit imaginary off branch_mask; the
    curvature datum is quaternion-valued in general and real exactly when
    the image sits in Im H. checks holds the self-consistency residuals
    measured while building the frame.
    """

    grid: GridSpec
    left_normal: np.ndarray
    right_normal: np.ndarray
    curvature: np.ndarray
    branch_mask: np.ndarray
    checks: dict = field(default_factory=dict)


@dataclass
class ResidualReport:
    """One residual functional, summarized the way the CLI emits it."""

    name: str
    max: float
    mean: float
    grid: GridSpec
    h: float
    masked_fraction: float = 0.0

    def to_dict(self) -> dict:
        g = self.grid
        return {
            "name": self.name,
            "max": self.max,
            "mean": self.mean,
            "grid": {"nx": g.nx, "ny": g.ny, "x0": g.x0, "y0": g.y0,
                     "hx": g.hx, "hy": g.hy},
            "h": self.h,
            "masked_fraction": self.masked_fraction,
        }


def _report(name: str, magnitude: np.ndarray, grid: GridSpec, trim: int,
            masked_fraction: float = 0.0) -> ResidualReport:
    return ResidualReport(
        name=name,
        max=interior_max(magnitude, trim=trim),
        mean=interior_mean(magnitude, trim=trim),
        grid=grid,
        h=float(max(grid.hx, grid.hy)),
        masked_fraction=float(masked_fraction),
    )


def _inv_or_nan(q: np.ndarray, bad: Optional[np.ndarray] = None) -> np.ndarray:
    """Pointwise inverse with NaN at zero-norm or masked nodes."""
    n2 = np.sum(q * q, axis=-1)
    mask = n2 == 0.0
    if bad is not None:
        mask = mask | bad
    safe = np.where(mask, 1.0, n2)
    out = qconj(q) / safe[..., None]
    out[mask] = np.nan
    return out


def normals(surface: SurfaceGrid):
    """Left and right normals N = f_y f_x^{-1}, R = -f_x^{-1} f_y.

    Nodes where |f_x| collapses below BRANCH_FRACTION of its median are
    branch points: they are masked (NaN), not fatal, unless the mask covers
    the whole grid.
    """
    df = differential(surface.field())
    fx, fy = df.cx, df.cy
    speed = qabs(fx)
    med = float(np.nanmedian(speed))
    mask = speed < BRANCH_FRACTION * med
    if mask.all():
        raise AllBranch("f_x vanishes on the whole grid")
    fx_inv = _inv_or_nan(fx, mask)
    left = qmul(fy, fx_inv)
    right = -qmul(fx_inv, fy)
    return left, right, mask


@dataclass
class ConformalityReport:
    """Pointwise-normalized conformality defects of a sampled map."""

    scale_mismatch: float
    orthogonality: float
    left_normal_unit: float
    right_normal_unit: float

    @property
    def max(self) -> float:
        return max(self.scale_mismatch, self.orthogonality,
                   self.left_normal_unit, self.right_normal_unit)

    def to_dict(self) -> dict:
        return {
            "scale_mismatch": self.scale_mismatch,
            "orthogonality": self.orthogonality,
            "left_normal_unit": self.left_normal_unit,
            "right_normal_unit": self.right_normal_unit,
            "max": self.max,
        }


def _unit_imaginary_defect(n: np.ndarray) -> np.ndarray:
    sq = qmul(n, n)
    sq = sq.copy()
    sq[..., 0] += 1.0
    return np.linalg.norm(sq, axis=-1)


def conformality_residual(surface: SurfaceGrid, trim: int = 1) -> ConformalityReport:
    df = differential(surface.field())
    fx, fy = df.cx, df.cy
    ax2 = np.sum(fx * fx, axis=-1)
    ay2 = np.sum(fy * fy, axis=-1)
    denom = np.maximum(ax2, 1e-30)
    scale = np.abs(ax2 - ay2) / denom
    ortho = np.abs(np.sum(fx * fy, axis=-1)) / denom
    left, right, _ = normals(surface)
    return ConformalityReport(
        scale_mismatch=interior_max(scale, trim=trim),
        orthogonality=interior_max(ortho, trim=trim),
        left_normal_unit=interior_max(_unit_imaginary_defect(left), trim=trim),
        right_normal_unit=interior_max(_unit_imaginary_defect(right), trim=trim),
    )


def mean_curvature(surface: SurfaceGrid, trim: int = 2) -> SphereData:
    """Curvature datum H from df H = (dN)_N, with its cross-checks.

    The x-component gives H = f_x^{-1}(N_x - N N_y)/2; the y-component and
    the right-normal version H = (R_x + R_y R) f_x^{-1} / 2 are computed as
    consistency residuals, as is R H = H N and the agreement of the two
    mean curvature vector expressions -N conj(H) and -conj(H) R.
    """
    g = surface.grid
    left, right, mask = normals(surface)
    df = differential(surface.field())
    fx, fy = df.cx, df.cy
    fx_inv = _inv_or_nan(fx, mask)
    fy_inv = _inv_or_nan(fy, mask)

    dn = differential(ScalarField(g, left))
    h = 0.5 * qmul(fx_inv, dn.cx - qmul(left, dn.cy))
    h_from_y = 0.5 * qmul(fy_inv, dn.cy + qmul(left, dn.cx))

    dr = differential(ScalarField(g, right))
    h_from_r = 0.5 * qmul(dr.cx + qmul(dr.cy, right), fx_inv)

    star_df_left = hodge_star(df).cx - qmul(left, df.cx)
    star_df_right = hodge_star(df).cx + qmul(df.cx, right)
    rh_hn = qmul(right, h) - qmul(h, left)
    vec_left = -qmul(left, qconj(h))
    vec_right = -qmul(qconj(h), right)

    checks = {
        "left_normal_unit": interior_max(_unit_imaginary_defect(left), trim=1),
        "right_normal_unit": interior_max(_unit_imaginary_defect(right), trim=1),
        "curvature_xy_consistency": interior_max(h - h_from_y, trim=trim),
        "curvature_right_consistency": interior_max(h - h_from_r, trim=trim),
        "sphere_intertwiner": interior_max(rh_hn, trim=trim),
        "mean_vector_consistency": interior_max(vec_left - vec_right, trim=trim),
        "tangent_left": interior_max(star_df_left, trim=1),
        "tangent_right": interior_max(star_df_right, trim=1),
        "curvature_imaginary_part": interior_max(qim(h), trim=trim),
    }
    return SphereData(
        grid=g,
        left_normal=left,
        right_normal=right,
        curvature=h,
        branch_mask=mask,
        checks=checks,
    )


def hopf_form(surface: SurfaceGrid, sphere: SphereData) -> OneForm:
    """The one-form w = dH + H (*df) H + R (*dH) - H (*dN)."""
    g = surface.grid
    df = differential(surface.field())
    dh = differential(ScalarField(g, sphere.curvature))
    dn = differential(ScalarField(g, sphere.left_normal))
    h = sphere.curvature
    r = sphere.right_normal
    sdf, sdh, sdn = hodge_star(df), hodge_star(dh), hodge_star(dn)
    cx = dh.cx + qmul(h, qmul(sdf.cx, h)) + qmul(r, sdh.cx) - qmul(h, sdn.cx)
    cy = dh.cy + qmul(h, qmul(sdf.cy, h)) + qmul(r, sdh.cy) - qmul(h, sdn.cy)
    return OneForm(g, cx, cy)


def hopf_projection_residual(surface: SurfaceGrid, sphere: SphereData,
                             w: Optional[OneForm] = None, trim: int = 3) -> float:
    """Max-norm of (2 dH - w)^{-N}, which vanishes for smooth surfaces."""
    g = surface.grid
    if w is None:
        w = hopf_form(surface, sphere)
    dh = differential(ScalarField(g, sphere.curvature))
    omega = OneForm(g, 2.0 * dh.cx - w.cx, 2.0 * dh.cy - w.cy)
    _, anti = decompose_right(omega, sphere.left_normal)
    return max(interior_max(anti.cx, trim=trim), interior_max(anti.cy, trim=trim))


def default_curvature_floor(grid: GridSpec) -> float:
    """|H| floor below which a node counts as minimal: 1e-6 / diameter."""
    return 1e-6 / grid.diameter


def _inverse_curvature(surface: SurfaceGrid, sphere: SphereData,
                       hmin: Optional[float]):
    if hmin is None:
        hmin = default_curvature_floor(surface.grid)
    small = qabs(sphere.curvature) < hmin
    small = small | np.isnan(sphere.curvature).any(axis=-1)
    hinv = _inv_or_nan(sphere.curvature, small)
    return hinv, small


def ghimc_report(surface: SurfaceGrid, sphere: SphereData,
                 hmin: Optional[float] = None, trim: int = 4) -> ResidualReport:
    """Residual of d * d(H^{-1}) = 0, the harmonic-inverse-curvature test.

    Nodes with |H| below the floor are masked; if nothing survives in the
    trimmed interior the surface is minimal there and the test is
    undefined, which is fatal.
    """
    g = surface.grid
    hinv, small = _inverse_curvature(surface, sphere, hmin)
    omega = hodge_star(differential(ScalarField(g, hinv)))
    density = exterior_derivative(omega).density
    rep = _report("harmonic_inverse_curvature", np.linalg.norm(density, axis=-1),
                  g, trim, masked_fraction=float(np.mean(small)))
    if np.isnan(rep.max):
        raise MinimalPoint(
            f"|H| < {hmin if hmin is not None else default_curvature_floor(g):.3e}"
            " on the whole working region"
        )
    return rep


def ghimc_residual(surface: SurfaceGrid, sphere: SphereData,
                   hmin: Optional[float] = None, trim: int = 4) -> float:
    return ghimc_report(surface, sphere, hmin=hmin, trim=trim).max


def willmore_diagnostics(surface: SurfaceGrid, sphere: SphereData,
                         trim: int = 3):
    """Closedness of w and the conformal energy of the surface.

    The energy integrand comes from the frame matrix of the (1,0) Hopf
    field: its only nonzero entry is q = R (dR)_{-R} / 2, and the trace
    pairing gives the density -Re(q_x^2 + q_y^2)/2, integrated by the
    trapezoidal rule and divided by pi. Round spheres and planes give 0.
    """
    g = surface.grid
    w = hopf_form(surface, sphere)
    dw = closedness_residual(w, trim=trim)
    dr = differential(ScalarField(g, sphere.right_normal))
    _, anti = decompose_left(dr, sphere.right_normal)
    qx = 0.5 * qmul(sphere.right_normal, anti.cx)
    qy = 0.5 * qmul(sphere.right_normal, anti.cy)
    density = -0.5 * (qmul(qx, qx)[..., 0] + qmul(qy, qy)[..., 0])
    trapz = getattr(np, "trapezoid", None) or np.trapz
    energy = float(trapz(trapz(density, dx=g.hy, axis=1), dx=g.hx, axis=0) / np.pi)
    return dw, energy


@dataclass
class CharacterizationReport:
    """Residuals of the closed-form characterization of harmonic 1/H."""

    identity_max: float
    combination_closedness: float
    ghimc_max: float
    n: list

    def to_dict(self) -> dict:
        return {
            "identity_max": self.identity_max,
            "combination_closedness": self.combination_closedness,
            "ghimc_max": self.ghimc_max,
            "n": list(self.n),
        }


def inverse_curvature_characterization(surface: SurfaceGrid, sphere: SphereData,
                                       n=(0.0, 0.0, 0.0, 0.0),
                                       hmin: Optional[float] = None,
                                       trim: int = 4) -> CharacterizationReport:
    """Check -H^{-1}(*w)H^{-1} = *dH^{-1} + d(f - N H^{-1}) pointwise, and
    the closedness of H^{-1}(*w)H^{-1} + n (*dH^{-1}).

    The pointwise identity holds for every conformal map, so its residual
    is pure discretization error; the closedness residual carries the
    harmonicity content (for constant n it differs from (n-1) d*dH^{-1}
    by an exact term).
    """
    g = surface.grid
    hinv, small = _inverse_curvature(surface, sphere, hmin)
    w = hopf_form(surface, sphere)
    sw = hodge_star(w)
    lhs_x = -qmul(hinv, qmul(sw.cx, hinv))
    lhs_y = -qmul(hinv, qmul(sw.cy, hinv))
    star_dhinv = hodge_star(differential(ScalarField(g, hinv)))
    shifted = surface.f - qmul(sphere.left_normal, hinv)
    d_shift = differential(ScalarField(g, shifted))
    res_x = lhs_x - star_dhinv.cx - d_shift.cx
    res_y = lhs_y - star_dhinv.cy - d_shift.cy
    identity_max = max(interior_max(res_x, trim=max(trim - 1, 1)),
                       interior_max(res_y, trim=max(trim - 1, 1)))

    nq = np.asarray(n, dtype=float)
    comb = OneForm(g, -lhs_x + qmul(nq, star_dhinv.cx),
                   -lhs_y + qmul(nq, star_dhinv.cy))
    comb_closed = closedness_residual(comb, trim=trim)
    ghimc_max = ghimc_report(surface, sphere, hmin=hmin, trim=trim).max
    return CharacterizationReport(
        identity_max=identity_max,
        combination_closedness=comb_closed,
        ghimc_max=ghimc_max,
        n=[float(v) for v in nq],
    )


def transform_surface(surface: SurfaceGrid, r, s, t) -> SurfaceGrid:
    """Apply the Euclidean motion a -> r a s^{-1} + t to every sample."""
    return SurfaceGrid(surface.grid, apply_motion(r, s, t, surface.f))
