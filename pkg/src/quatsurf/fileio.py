"""Serialization: surface grids as JSON, profiles as CSV, meshes as
OBJ/PLY. All writers are deterministic (sorted keys, fixed float
formats, no timestamps) so identical inputs produce identical bytes.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

from .analysis import SurfaceGrid
from .errors import ParseError
from .grid import GridSpec

GRID_KEYS = ("nx", "ny", "x0", "y0", "hx", "hy")
CSV_FMT = "%.17g"
MESH_FMT = "%.9g"


def surface_to_dict(surface: SurfaceGrid) -> dict:
    g = surface.grid
    flat = surface.f.reshape(-1, 4)
    return {
        "grid": {"nx": g.nx, "ny": g.ny, "x0": g.x0, "y0": g.y0,
                 "hx": g.hx, "hy": g.hy},
        "f": [[float(v) for v in row] for row in flat],
    }


def surface_from_dict(obj) -> SurfaceGrid:
    """Parse {"grid": {...}, "f": [[w,x,y,z], ...]} with f flattened
    row-major: the sample at grid node (ix, iy) sits at index ix*ny + iy.
    """
    if not isinstance(obj, dict):
        raise ParseError("surface document must be a JSON object")
    if "grid" not in obj or "f" not in obj:
        raise ParseError("surface document needs 'grid' and 'f' keys")
    graw = obj["grid"]
    if not isinstance(graw, dict):
        raise ParseError("'grid' must be an object")
    missing = [k for k in GRID_KEYS if k not in graw]
    if missing:
        raise ParseError(f"grid is missing keys: {', '.join(missing)}")
    try:
        grid = GridSpec(
            nx=int(graw["nx"]), ny=int(graw["ny"]),
            x0=float(graw["x0"]), y0=float(graw["y0"]),
            hx=float(graw["hx"]), hy=float(graw["hy"]),
        )
    except (TypeError, ValueError) as e:
        raise ParseError(f"grid values are not numeric: {e}") from None
    rows = obj["f"]
    if not isinstance(rows, list) or len(rows) != grid.nx * grid.ny:
        have = len(rows) if isinstance(rows, list) else "non-list"
        raise ParseError(
            f"'f' must list {grid.nx * grid.ny} quaternions, got {have}"
        )
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as e:
        raise ParseError(f"'f' entries are not numeric: {e}") from None
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise ParseError("each 'f' entry must be [w, x, y, z]")
    if not np.all(np.isfinite(arr)):
        raise ParseError("'f' contains non-finite values")
    return SurfaceGrid(grid, arr.reshape(grid.nx, grid.ny, 4))


def read_surface(path) -> SurfaceGrid:
    text = Path(path).read_text()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e}") from None
    return surface_from_dict(obj)


def write_surface(path, surface: SurfaceGrid) -> None:
    Path(path).write_text(report_text(surface_to_dict(surface)) + "\n")


def report_text(obj) -> str:
    """Canonical JSON for report dictionaries."""
    return json.dumps(_plain(obj), sort_keys=True, indent=2)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def write_report(path, obj) -> None:
    Path(path).write_text(report_text(obj) + "\n")


def write_phi_csv(path, sol) -> None:
    lines = ["x,phi,dphi"]
    for x, p, d in zip(sol.xs, sol.phi, sol.dphi):
        lines.append(",".join(CSV_FMT % v for v in (x, p, d)))
    Path(path).write_text("\n".join(lines) + "\n")


def write_profile_csv(path, profile) -> None:
    lines = ["x,u,c"]
    for x, u, c in zip(profile.xs, profile.u, profile.c):
        lines.append(",".join(CSV_FMT % v for v in (x, u, c)))
    Path(path).write_text("\n".join(lines) + "\n")


def read_phi_csv(path):
    """Read x,phi,dphi samples; the x column must be uniformly spaced."""
    from .revolution import PhiSolution

    rows = []
    for ln, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        parts = line.split(",")
        if ln == 1 and any(not _is_number(p) for p in parts):
            continue
        if len(parts) != 3:
            raise ParseError(f"line {ln}: expected 3 columns, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ParseError(f"line {ln}: non-numeric value") from None
    if len(rows) < 5:
        raise ParseError("need at least 5 samples")
    arr = np.asarray(rows)
    xs = arr[:, 0]
    steps = np.diff(xs)
    if np.max(np.abs(steps - steps[0])) > 1e-9 * max(abs(steps[0]), 1e-30):
        raise ParseError("x samples are not uniformly spaced")
    return PhiSolution(xs=xs, phi=arr[:, 1], dphi=arr[:, 2])


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def export_mesh(path, surface: SurfaceGrid, fmt: str = "obj",
                tol_real: float = 1e-9) -> dict:
    """Write the image surface as a quad mesh.

    Vertices are the imaginary parts in row-major grid order; quads
    follow the grid cells and any quad touching a non-finite sample is
    dropped. A surface whose real part is not (tolerably) constant has no
    3-space image; it falls back to a 4-column CSV of the full values and
    says so on stderr.
    """
    if fmt not in ("obj", "ply"):
        raise ParseError(f"unknown mesh format {fmt!r} (use obj or ply)")
    f = surface.f
    g = surface.grid
    scale = 1.0 + float(np.nanmax(np.abs(f)))
    re_dev = float(np.nanmax(np.abs(f[..., 0] - f[0, 0, 0])))
    if not np.isfinite(re_dev) or re_dev > tol_real * scale:
        print(
            f"real part varies by {re_dev:.3e}; writing 4-column CSV"
            " instead of a mesh",
            file=sys.stderr,
        )
        lines = ["w,x,y,z"]
        for row in f.reshape(-1, 4):
            lines.append(",".join(CSV_FMT % v for v in row))
        Path(path).write_text("\n".join(lines) + "\n")
        return {"format": "csv", "vertices": g.nx * g.ny, "faces": 0,
                "fallback": True}

    verts = f[..., 1:].reshape(-1, 3)
    ok = np.all(np.isfinite(f), axis=-1)
    faces = []
    for ix in range(g.nx - 1):
        for iy in range(g.ny - 1):
            if not (ok[ix, iy] and ok[ix + 1, iy]
                    and ok[ix + 1, iy + 1] and ok[ix, iy + 1]):
                continue
            a = ix * g.ny + iy
            faces.append((a, a + g.ny, a + g.ny + 1, a + 1))

    out = []
    if fmt == "obj":
        for v in verts:
            out.append("v " + " ".join(
                MESH_FMT % (x if np.isfinite(x) else 0.0) for x in v))
        for q in faces:
            out.append("f " + " ".join(str(i + 1) for i in q))
    else:
        out.extend([
            "ply", "format ascii 1.0",
            f"element vertex {len(verts)}",
            "property float x", "property float y", "property float z",
            f"element face {len(faces)}",
            "property list uchar int vertex_indices",
            "end_header",
        ])
        for v in verts:
            out.append(" ".join(
                MESH_FMT % (x if np.isfinite(x) else 0.0) for x in v))
        for q in faces:
            out.append("4 " + " ".join(str(i) for i in q))
    Path(path).write_text("\n".join(out) + "\n")
    return {"format": fmt, "vertices": len(verts), "faces": len(faces),
            "fallback": False}
