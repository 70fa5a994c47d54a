"""Transform constructions for harmonic-inverse-curvature geometry.

Four builders live here. backward_baecklund integrates *dH^{-1} into mu and
assembles h = (-mu + f - N H^{-1})/2, returning conj(h) with a tangency
certificate. darboux_from_backward turns that output into a new surface
lambda h_bar^{-1} + f. christoffel produces the dual surface g with
dg = f_x^{-1} dx - f_y^{-1} dy, and darboux_solve integrates the coupled
linear system d lambda_inf = -df lambda_L, d lambda_L = -rho dg lambda_inf
along grid paths to produce the classical transform family. Every output
carries machine-checked residuals; none of the constructions silently
averages away path dependence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .analysis import (
    SphereData,
    SurfaceGrid,
    _inv_or_nan,
    _inverse_curvature,
    mean_curvature,
    ghimc_residual,
    normals,
    transform_surface,
)
from .errors import (
    Degenerate,
    NotClosed,
    NotGHIMC,
    PathInconsistent,
    ZeroDenominator,
)
from .grid import (
    GridSpec,
    OneForm,
    ScalarField,
    closedness_residual,
    decompose_left,
    differential,
    hodge_star,
    integrate_potential_two_path,
    interior_max,
    same_grid,
    wedge,
)
from .quaternion import ONE, qabs, qconj, qinv, qmul

ZERO_FRACTION = 1e-9


def _nonzero_inverse(values: np.ndarray, what: str):
    """Pointwise inverse with near-zero nodes masked to NaN; fatal only
    when the mask swallows the whole grid."""
    mag = qabs(values)
    med = float(np.nanmedian(mag))
    mask = ~(mag > ZERO_FRACTION * med)
    if mask.all():
        raise ZeroDenominator(f"{what} vanishes on the whole grid")
    return _inv_or_nan(values, mask), mask


def _trim_bounds(n: int, lo_fringe: int, hi_fringe: int, trim: int):
    """Per-axis crop: at least the non-finite fringe, ideally `trim` more
    on each side, backed off (never below the fringe) to keep 5 nodes."""
    lo = max(trim, lo_fringe)
    hi = max(trim, hi_fringe)
    while n - lo - hi < 5 and (lo > lo_fringe or hi > hi_fringe):
        if lo - lo_fringe >= hi - hi_fringe and lo > lo_fringe:
            lo -= 1
        else:
            hi -= 1
    if n - lo - hi < 5:
        raise Degenerate(
            "finite working region is smaller than 5 nodes across"
        )
    return lo, hi


def _interior_potential(omega: OneForm, p0, v0, trim: int):
    """Primitive of a closed one-form, integrated on the trimmed interior.

    One-forms produced by differentiating stencil-built fields carry
    one-sided-stencil artifacts in their outermost rings; a path along
    the grid edge would accumulate them into the whole answer. The paths
    therefore run inside the trimmed (and finite) interior, the anchor
    node is clamped into it, and the returned field is embedded in the
    original grid with a NaN fringe.
    """
    g = omega.grid
    finite = (np.isfinite(omega.cx).all(axis=-1)
              & np.isfinite(omega.cy).all(axis=-1))
    rows = np.where(finite.any(axis=1))[0]
    cols = np.where(finite.any(axis=0))[0]
    if len(rows) == 0:
        raise Degenerate("one-form has no finite samples")
    xlo, xhi = _trim_bounds(g.nx, int(rows[0]), int(g.nx - 1 - rows[-1]),
                            trim)
    ylo, yhi = _trim_bounds(g.ny, int(cols[0]), int(g.ny - 1 - cols[-1]),
                            trim)
    sub = (slice(xlo, g.nx - xhi), slice(ylo, g.ny - yhi))
    gsub = GridSpec(nx=g.nx - xlo - xhi, ny=g.ny - ylo - yhi,
                    x0=g.x0 + xlo * g.hx, y0=g.y0 + ylo * g.hy,
                    hx=g.hx, hy=g.hy)
    osub = OneForm(gsub, omega.cx[sub], omega.cy[sub])
    p0c = (min(max(p0[0], xlo), g.nx - 1 - xhi) - xlo,
           min(max(p0[1], ylo), g.ny - 1 - yhi) - ylo)
    fsub, gap = integrate_potential_two_path(osub, p0=p0c, v0=v0)
    vals = np.full(g.shape + (4,), np.nan)
    vals[sub] = fsub.values
    return ScalarField(g, vals), gap


@dataclass
class BackwardResult:
    h_bar: ScalarField
    mu: ScalarField
    certificates: dict


def backward_baecklund(
    surface: SurfaceGrid,
    sphere: SphereData,
    mu0=(0.0, 0.0, 0.0, 0.0),
    p0=(0, 0),
    tol: float = 1e-2,
    hmin: Optional[float] = None,
    trim: int = 3,
) -> BackwardResult:
    """Integrate d(mu) = *dH^{-1} and return conj(h), h = (-mu + f - N/H)/2.

    The integration exists only when *dH^{-1} is closed, i.e. when the
    surface is harmonic-inverse-curvature to within tol; otherwise
    NotGHIMC. Since H is itself a stacked stencil product, its outer
    rings are untrustworthy and the potential paths run through the
    trimmed interior only; mu and h_bar come back with a NaN fringe of
    width `trim`. The certificate is the tangency residual |(d h_bar)_R|,
    which is the defining property of the construction.
    """
    g = surface.grid
    hinv, small = _inverse_curvature(surface, sphere, hmin)
    omega = hodge_star(differential(ScalarField(g, hinv)))
    resid = closedness_residual(omega, trim=4)
    if not resid <= tol:
        raise NotGHIMC(
            f"d*dH^-1 max-norm {resid:.3e} exceeds tol {tol:.1e};"
            " the potential mu does not exist"
        )
    mu, path_gap = _interior_potential(omega, p0, mu0, trim)
    h = 0.5 * (-mu.values + surface.f - qmul(sphere.left_normal, hinv))
    h_bar = qconj(h)
    dhb = differential(ScalarField(g, h_bar))
    tangent_part, _ = decompose_left(dhb, sphere.right_normal)
    tangency = max(
        interior_max(tangent_part.cx, trim=trim),
        interior_max(tangent_part.cy, trim=trim),
    )
    return BackwardResult(
        h_bar=ScalarField(g, h_bar),
        mu=mu,
        certificates={
            "tangency_residual": tangency,
            "potential_closedness": resid,
            "potential_path_gap": path_gap,
            "masked_fraction": float(np.mean(small)),
        },
    )


def darboux_from_backward(
    surface: SurfaceGrid,
    sphere: SphereData,
    h_bar: ScalarField,
    lambda0=None,
    p0=(0, 0),
    tol: float = 1e-2,
    trim: int = 3,
):
    """Integrate d(lambda) = -df h_bar and form f_hat = lambda h_bar^{-1} + f.

    Returns (f_hat, report). The report carries the recomputed linear
    system residual, the two-path disagreement, and the residual of the
    dual statement: conj(f) is the same kind of transform of conj(f_hat),
    witnessed by d(conj h_bar^{-1}) + d(conj f_hat)(-conj lambda^{-1}).
    """
    g = same_grid(surface, h_bar)
    df = differential(surface.field())
    hb = h_bar.values
    omega = OneForm(g, -qmul(df.cx, hb), -qmul(df.cy, hb))
    resid = closedness_residual(omega, trim=max(trim, 2))
    if not resid <= tol:
        raise NotClosed(
            f"df h_bar is not closed (max {resid:.3e} > tol {tol:.1e})",
            residual=resid,
        )
    if lambda0 is None:
        lambda0 = -surface.f[p0[0], p0[1]]
    lam, path_gap = _interior_potential(omega, p0, lambda0, trim)
    hb_inv, mask = _nonzero_inverse(hb, "h_bar")
    fhat = SurfaceGrid(g, qmul(lam.values, hb_inv) + surface.f)

    dlam = differential(lam)
    sys_x = dlam.cx + qmul(df.cx, hb)
    sys_y = dlam.cy + qmul(df.cy, hb)
    system_residual = max(interior_max(sys_x, trim=trim),
                          interior_max(sys_y, trim=trim))

    lam_inv = _inv_or_nan(lam.values, mask)
    dual_a = differential(ScalarField(g, qconj(hb_inv)))
    dual_b = differential(ScalarField(g, qconj(fhat.f)))
    factor = -qconj(lam_inv)
    dual_x = dual_a.cx + qmul(dual_b.cx, factor)
    dual_y = dual_a.cy + qmul(dual_b.cy, factor)
    dual_residual = max(interior_max(dual_x, trim=trim),
                        interior_max(dual_y, trim=trim))

    report = {
        "closedness": resid,
        "path_gap": path_gap,
        "system_residual": system_residual,
        "dual_residual": dual_residual,
        "masked_fraction": float(np.mean(mask)),
    }
    return fhat, report


@dataclass
class ChristoffelResult:
    g: ScalarField
    dg: OneForm
    certificates: dict


def christoffel(
    surface: SurfaceGrid,
    p0=(0, 0),
    g0=(0.0, 0.0, 0.0, 0.0),
    tol: float = 1e-2,
    trim: int = 2,
) -> ChristoffelResult:
    """Dual surface of an isothermic chart: dg = f_x^{-1} dx - f_y^{-1} dy.

    The one-form is closed exactly when the chart is conformal
    curvature-line, so the closedness gate doubles as the isothermic test.
    Both orders of the mixed wedge df ^ dg, and the conjugated variant
    d(conj f) ^ dg, are certified; the exact component form of dg is kept
    alongside the integrated g so downstream solvers do not have to
    re-differentiate.
    """
    g = surface.grid
    df = differential(surface.field())
    fx_inv, mask_x = _nonzero_inverse(df.cx, "f_x")
    fy_inv, mask_y = _nonzero_inverse(df.cy, "f_y")
    dg = OneForm(g, fx_inv, -fy_inv)
    resid = closedness_residual(dg, trim=max(trim, 2))
    if not resid <= tol:
        raise NotClosed(
            f"dg is not closed (max {resid:.3e} > tol {tol:.1e});"
            " the chart is not isothermic in these coordinates",
            residual=resid,
        )
    gfield, path_gap = integrate_potential_two_path(dg, p0=p0, v0=g0)
    fbar_x, fbar_y = qconj(df.cx), qconj(df.cy)
    certificates = {
        "dg_closedness": resid,
        "path_gap": path_gap,
        "wedge_fg": interior_max(wedge(df, dg).density, trim=trim),
        "wedge_gf": interior_max(wedge(dg, df).density, trim=trim),
        "wedge_fbar_g": interior_max(
            qmul(fbar_x, dg.cy) - qmul(fbar_y, dg.cx), trim=trim),
        "wedge_g_fbar": interior_max(
            qmul(dg.cx, fbar_y) - qmul(dg.cy, fbar_x), trim=trim),
        "masked_fraction": float(np.mean(mask_x | mask_y)),
    }
    return ChristoffelResult(g=gfield, dg=dg, certificates=certificates)


@dataclass
class DarbouxData:
    lambda_inf: ScalarField
    lambda_L: ScalarField
    rho: float
    base_node: tuple
    seeds: dict
    residuals: dict = field(default_factory=dict)


def _pair_derivative(state, p, q):
    """d/dt of (lambda_inf, lambda_L) under the coefficients p, q."""
    return np.stack(
        [qmul(p, state[..., 1, :]), qmul(q, state[..., 0, :])], axis=-2
    )


def _rk4_edge(state, c0, c1, h):
    cm = (0.5 * (c0[0] + c1[0]), 0.5 * (c0[1] + c1[1]))
    k1 = _pair_derivative(state, *c0)
    k2 = _pair_derivative(state + 0.5 * h * k1, *cm)
    k3 = _pair_derivative(state + 0.5 * h * k2, *cm)
    k4 = _pair_derivative(state + h * k3, *c1)
    return state + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _march(seed, px, py, qx, qy, grid, p0, rows_first: bool):
    """Fill the grid with RK4 along a base line, then across it.

    rows_first marches the y = y(p0) row in x and then every column in y;
    the alternative marches the base column and then every row. Coefficient
    values at half-steps are linear interpolations of the node samples.
    """
    nx, ny = grid.nx, grid.ny
    ix0, iy0 = p0
    state = np.empty((nx, ny, 2, 4))
    if rows_first:
        line = np.empty((nx, 2, 4))
        line[ix0] = seed
        for i in range(ix0, nx - 1):
            line[i + 1] = _rk4_edge(line[i], (px[i, iy0], qx[i, iy0]),
                                    (px[i + 1, iy0], qx[i + 1, iy0]), grid.hx)
        for i in range(ix0, 0, -1):
            line[i - 1] = _rk4_edge(line[i], (px[i, iy0], qx[i, iy0]),
                                    (px[i - 1, iy0], qx[i - 1, iy0]), -grid.hx)
        state[:, iy0] = line
        for j in range(iy0, ny - 1):
            state[:, j + 1] = _rk4_edge(state[:, j], (py[:, j], qy[:, j]),
                                        (py[:, j + 1], qy[:, j + 1]), grid.hy)
        for j in range(iy0, 0, -1):
            state[:, j - 1] = _rk4_edge(state[:, j], (py[:, j], qy[:, j]),
                                        (py[:, j - 1], qy[:, j - 1]), -grid.hy)
    else:
        line = np.empty((ny, 2, 4))
        line[iy0] = seed
        for j in range(iy0, ny - 1):
            line[j + 1] = _rk4_edge(line[j], (py[ix0, j], qy[ix0, j]),
                                    (py[ix0, j + 1], qy[ix0, j + 1]), grid.hy)
        for j in range(iy0, 0, -1):
            line[j - 1] = _rk4_edge(line[j], (py[ix0, j], qy[ix0, j]),
                                    (py[ix0, j - 1], qy[ix0, j - 1]), -grid.hy)
        state[ix0, :] = line
        for i in range(ix0, nx - 1):
            state[i + 1, :] = _rk4_edge(state[i, :], (px[i, :], qx[i, :]),
                                        (px[i + 1, :], qx[i + 1, :]), grid.hx)
        for i in range(ix0, 0, -1):
            state[i - 1, :] = _rk4_edge(state[i, :], (px[i, :], qx[i, :]),
                                        (px[i - 1, :], qx[i - 1, :]), -grid.hx)
    return state


def darboux_solve(
    surface: SurfaceGrid,
    dual: Union[ChristoffelResult, ScalarField],
    rho: float,
    lambda_inf0=None,
    lambda_L0=(1.0, 0.0, 0.0, 0.0),
    p0=(0, 0),
    tol_path: float = 5e-3,
    trim: int = 3,
):
    """Solve d lambda_inf = -df lambda_L, d lambda_L = -rho dg lambda_inf
    and emit the transform pair f_hat = lambda_inf lambda_L^{-1} + f,
    g_hat = lambda_L lambda_inf^{-1} + g.

    Returns (DarbouxData, f_hat, g_hat). Row-first and column-first
    marches must agree to tol_path (relative to the solution magnitude);
    their disagreement is the discrete integrability witness and is never
    averaged away.
    """
    g = surface.grid
    if isinstance(dual, ChristoffelResult):
        gfield, dg = dual.g, dual.dg
    else:
        gfield = dual
        dg = differential(gfield)
    same_grid(surface, gfield)
    df = differential(surface.field())

    px, py = -df.cx, -df.cy
    qx, qy = -rho * dg.cx, -rho * dg.cy
    if lambda_inf0 is None:
        lambda_inf0 = -surface.f[p0[0], p0[1]]
    seed = np.stack([np.asarray(lambda_inf0, dtype=float),
                     np.asarray(lambda_L0, dtype=float)])

    state_row = _march(seed, px, py, qx, qy, g, p0, rows_first=True)
    state_col = _march(seed, px, py, qx, qy, g, p0, rows_first=False)
    scale = max(1.0, float(np.nanmax(np.linalg.norm(state_row, axis=-1))))
    path_gap = float(np.nanmax(np.linalg.norm(state_row - state_col, axis=-1)))
    if not path_gap / scale <= tol_path:
        raise PathInconsistent(
            f"row-first and column-first integrations disagree by"
            f" {path_gap:.3e} (relative {path_gap / scale:.3e},"
            f" tol {tol_path:.1e})"
        )
    lam = state_row[..., 0, :]
    lam_l = state_row[..., 1, :]

    lam_l_inv, mask_l = _nonzero_inverse(lam_l, "lambda_L")
    lam_inv, mask_i = _nonzero_inverse(lam, "lambda_inf")
    fhat = SurfaceGrid(g, qmul(lam, lam_l_inv) + surface.f)
    ghat = ScalarField(g, qmul(lam_l, lam_inv) + gfield.values)

    dlam = differential(ScalarField(g, lam))
    dlam_l = differential(ScalarField(g, lam_l))
    sys_inf = max(
        interior_max(dlam.cx + qmul(df.cx, lam_l), trim=trim),
        interior_max(dlam.cy + qmul(df.cy, lam_l), trim=trim),
    )
    sys_l = max(
        interior_max(dlam_l.cx + rho * qmul(dg.cx, lam), trim=trim),
        interior_max(dlam_l.cy + rho * qmul(dg.cy, lam), trim=trim),
    )
    _, right, _ = normals(surface)
    tangent_part, _ = decompose_left(dlam_l, right, tol=1e-2)
    tangency = max(interior_max(tangent_part.cx, trim=trim),
                   interior_max(tangent_part.cy, trim=trim))

    dfhat = differential(fhat.field())
    dghat = differential(ghat)
    residuals = {
        "path_gap": path_gap,
        "path_gap_relative": path_gap / scale,
        "system_inf": sys_inf,
        "system_l": sys_l,
        "tangency_l": tangency,
        "wedge_fhat_ghat": interior_max(wedge(dfhat, dghat).density, trim=trim),
        "wedge_ghat_fhat": interior_max(wedge(dghat, dfhat).density, trim=trim),
        "wedge_fg": interior_max(wedge(df, dg).density, trim=trim),
        "wedge_gf": interior_max(wedge(dg, df).density, trim=trim),
        "masked_fraction": float(np.mean(mask_l | mask_i)),
    }
    data = DarbouxData(
        lambda_inf=ScalarField(g, lam),
        lambda_L=ScalarField(g, lam_l),
        rho=float(rho),
        base_node=(int(p0[0]), int(p0[1])),
        seeds={
            "lambda_inf0": [float(v) for v in np.asarray(lambda_inf0)],
            "lambda_L0": [float(v) for v in np.asarray(lambda_L0)],
        },
        residuals=residuals,
    )
    return data, fhat, ghat


@dataclass
class TransformReport:
    """Residuals tying a transform f_hat to its source surface."""

    transform_frame: float
    left_normal_update: float
    right_normal_update: float
    classicality: float
    curvature_drift: float
    curvature_drift_relative: float
    classical: bool

    def to_dict(self) -> dict:
        return {
            "transform_frame": self.transform_frame,
            "left_normal_update": self.left_normal_update,
            "right_normal_update": self.right_normal_update,
            "classicality": self.classicality,
            "curvature_drift": self.curvature_drift,
            "curvature_drift_relative": self.curvature_drift_relative,
            "classical": self.classical,
        }


def darboux_identities(
    surface: SurfaceGrid,
    sphere: SphereData,
    fhat: SurfaceGrid,
    tol_classical: float = 5e-3,
    trim: int = 3,
) -> TransformReport:
    """Residual suite for a produced transform, with T = f_hat - f:

    transform_frame      N T + T H T + T R        (holds for every one)
    left_normal_update   N_hat - N - T H          (ditto)
    right_normal_update  R_hat - R - H_hat T      (ditto)
    classicality         R_hat + T^{-1} N T       (zero iff classical)
    curvature_drift      H_hat - H                (zero when classical)
    """
    same_grid(surface, fhat)
    t = fhat.f - surface.f
    sphere_hat = mean_curvature(fhat)
    n, r, h = sphere.left_normal, sphere.right_normal, sphere.curvature
    nh, rh, hh = (sphere_hat.left_normal, sphere_hat.right_normal,
                  sphere_hat.curvature)

    frame = qmul(n, t) + qmul(t, qmul(h, t)) + qmul(t, r)
    left_up = nh - n - qmul(t, h)
    right_up = rh - r - qmul(hh, t)
    t_inv, _ = _nonzero_inverse(t, "f_hat - f")
    classic = rh + qmul(t_inv, qmul(n, t))
    drift = hh - h

    drift_max = interior_max(drift, trim=trim)
    h_scale = interior_max(h, trim=trim)
    classicality = interior_max(classic, trim=trim)
    return TransformReport(
        transform_frame=interior_max(frame, trim=trim),
        left_normal_update=interior_max(left_up, trim=trim),
        right_normal_update=interior_max(right_up, trim=trim),
        classicality=classicality,
        curvature_drift=drift_max,
        curvature_drift_relative=drift_max / max(h_scale, 1e-30),
        classical=bool(classicality <= tol_classical),
    )


def equivariance_check(
    surface: SurfaceGrid,
    r,
    s,
    t,
    transform: str = "ghimc",
    rho: float = 1.0,
    mu0=(0.0, 0.0, 0.0, 0.0),
    lambda_inf0=None,
    lambda_L0=(1.0, 0.0, 0.0, 0.0),
    p0=(0, 0),
    trim: int = 3,
) -> dict:
    """Compare motion-then-transform against transform-then-motion.

    Seeds transform covariantly: mu0 -> r mu0 s^{-1}, lambda_inf0 ->
    r lambda_inf0 s^{-1}, lambda_L0 -> s lambda_L0 s^{-1}, g0 -> s g0
    r^{-1}. The report records the measured sign of the curvature datum's
    motion law H -> s H r^{-1}, settled numerically.
    """
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    moved = transform_surface(surface, r, s, t)
    sphere = mean_curvature(surface)
    sphere_m = mean_curvature(moved)

    pushed = qmul(s, qmul(sphere.curvature, qinv(r)))
    dev_plus = interior_max(sphere_m.curvature - pushed, trim=2)
    dev_minus = interior_max(sphere_m.curvature + pushed, trim=2)
    report = {
        "curvature_motion_sign": "+" if dev_plus <= dev_minus else "-",
        "curvature_motion_deviation": min(dev_plus, dev_minus),
    }

    if transform == "ghimc":
        res = ghimc_residual(surface, sphere)
        res_m = ghimc_residual(moved, sphere_m)
        report["residual_before"] = res
        report["residual_after"] = res_m
        report["relative_change"] = abs(res - res_m) / max(abs(res), 1e-30)
    elif transform == "backward":
        base = backward_baecklund(surface, sphere, mu0=mu0, p0=p0)
        mu0_m = qmul(r, qmul(np.asarray(mu0, dtype=float), qinv(s)))
        movedres = backward_baecklund(moved, sphere_m, mu0=mu0_m, p0=p0)
        pred_hbar = qmul(s, qmul(base.h_bar.values, qinv(r))) + 0.5 * qconj(t)
        pred_mu = qmul(r, qmul(base.mu.values, qinv(s)))
        report["h_bar_deviation"] = interior_max(
            movedres.h_bar.values - pred_hbar, trim=trim)
        report["mu_deviation"] = interior_max(
            movedres.mu.values - pred_mu, trim=trim)
    elif transform == "darboux":
        if lambda_inf0 is None:
            lambda_inf0 = -surface.f[p0[0], p0[1]]
        lambda_inf0 = np.asarray(lambda_inf0, dtype=float)
        lambda_L0 = np.asarray(lambda_L0, dtype=float)
        chris = christoffel(surface, p0=p0)
        _, fhat, _ = darboux_solve(
            surface, chris, rho, lambda_inf0, lambda_L0, p0=p0)
        chris_m = christoffel(moved, p0=p0)
        seed_inf = qmul(r, qmul(lambda_inf0, qinv(s)))
        seed_l = qmul(s, qmul(lambda_L0, qinv(s)))
        _, fhat_m, _ = darboux_solve(
            moved, chris_m, rho, seed_inf, seed_l, p0=p0)
        pred = qmul(r, qmul(fhat.f, qinv(s))) + t
        report["transform_deviation"] = interior_max(fhat_m.f - pred, trim=trim)
    else:
        raise ValueError(f"unknown transform name {transform!r}")
    return report
