"""Closed-form test surfaces and their exact frame data.

These charts are the workhorses of the test suite: each one comes with the
normals and curvature datum known in closed form, so the finite-difference
pipeline can be measured against exact samples instead of against itself.
All images lie in Im H, hence left and right normals coincide.
"""

from __future__ import annotations

import numpy as np

from .analysis import SphereData, SurfaceGrid
from .grid import GridSpec
from .quaternion import from_components


def make_grid(nx: int, ny: int, x0: float = 0.0, y0: float = 0.0,
              hx: float = 0.01, hy: float = 0.01) -> GridSpec:
    return GridSpec(nx=nx, ny=ny, x0=x0, y0=y0, hx=hx, hy=hy)


def centered_grid(n: int = 201, half: float = 1.0) -> GridSpec:
    """Square grid with n samples per side covering [-half, half]^2."""
    h = 2.0 * half / (n - 1)
    return GridSpec(nx=n, ny=n, x0=-half, y0=-half, hx=h, hy=h)


def plane_surface(grid: GridSpec) -> SurfaceGrid:
    """f = x i + y j: flat, minimal (H = 0), normals N = R = k."""
    x, y = grid.mesh()
    return SurfaceGrid(grid, from_components(0.0 * x, x, y, 0.0 * x))


def plane_frame(grid: GridSpec) -> SphereData:
    z = np.zeros(grid.shape)
    o = np.ones(grid.shape)
    k = from_components(z, z, z, o)
    h = from_components(z, z, z, z)
    return SphereData(grid, k, k.copy(), h, np.zeros(grid.shape, dtype=bool),
                      checks={"source": 0.0})


def cylinder_surface(grid: GridSpec) -> SurfaceGrid:
    """Unit cylinder f = cos y i + sin y j + x k, curvature datum -1/2."""
    x, y = grid.mesh()
    return SurfaceGrid(grid, from_components(0.0 * x, np.cos(y), np.sin(y), x))


def cylinder_frame(grid: GridSpec) -> SphereData:
    x, y = grid.mesh()
    z = np.zeros(grid.shape)
    n = from_components(z, -np.cos(y), -np.sin(y), z)
    h = from_components(np.full(grid.shape, -0.5), z, z, z)
    return SphereData(grid, n, n.copy(), h, np.zeros(grid.shape, dtype=bool),
                      checks={"source": 0.0})


def cylinder_half_radius_surface(grid: GridSpec) -> SurfaceGrid:
    """Radius-1/2 cylinder in the doubled-angle chart:
    f = (cos 2y i + sin 2y j)/2 + x k. Conformal, |H| = 1, and the
    rotation-profile extraction sees the constant angle pi/2."""
    x, y = grid.mesh()
    return SurfaceGrid(
        grid,
        from_components(0.0 * x, 0.5 * np.cos(2 * y), 0.5 * np.sin(2 * y), x),
    )


def sphere_surface(grid: GridSpec) -> SurfaceGrid:
    """Unit sphere through inverse stereographic projection:
    f = (2x i + 2y j + (x^2+y^2-1) k) / (1 + x^2 + y^2)."""
    x, y = grid.mesh()
    r2 = x * x + y * y
    d = 1.0 + r2
    return SurfaceGrid(
        grid, from_components(0.0 * x, 2 * x / d, 2 * y / d, (r2 - 1.0) / d)
    )


def sphere_frame(grid: GridSpec) -> SphereData:
    """Exact frame of the stereographic sphere: N = R = -f, H = -1."""
    f = sphere_surface(grid).f
    z = np.zeros(grid.shape)
    h = from_components(np.full(grid.shape, -1.0), z, z, z)
    return SphereData(grid, -f, -f.copy(), h, np.zeros(grid.shape, dtype=bool),
                      checks={"source": 0.0})


def sheared_plane_surface(grid: GridSpec, shear: float = 0.5) -> SurfaceGrid:
    """Deliberately non-conformal map f = (x + shear*y) i + 2y j; its
    coordinate lines are neither orthogonal nor equal-speed, so it trips
    the conformality and Christoffel gates."""
    x, y = grid.mesh()
    return SurfaceGrid(
        grid, from_components(0.0 * x, x + shear * y, 2.0 * y, 0.0 * x)
    )


CORPUS = {
    "plane": (plane_surface, plane_frame),
    "cylinder": (cylinder_surface, cylinder_frame),
    "sphere": (sphere_surface, sphere_frame),
}
