"""Quaternion algebra on numpy arrays.

A quaternion q = w + x i + y j + z k is a float64 array [w, x, y, z];
fields of quaternions are arrays of shape (..., 4). Every operation
broadcasts, so the same code path serves scalars and whole grids.
No operation renormalizes its inputs: callers own unit-norm upkeep.
"""

from __future__ import annotations

import numpy as np

from .errors import NotImaginary, NotUnit

# Absolute tolerance for the unit / imaginary predicates.
PREDICATE_TOL = 1e-9

ONE = np.array([1.0, 0.0, 0.0, 0.0])
I = np.array([0.0, 1.0, 0.0, 0.0])
J = np.array([0.0, 0.0, 1.0, 0.0])
K = np.array([0.0, 0.0, 0.0, 1.0])


def quat(w=0.0, x=0.0, y=0.0, z=0.0) -> np.ndarray:
    return np.array([w, x, y, z], dtype=float)


def from_components(w, x, y, z) -> np.ndarray:
    """Stack component arrays into a (..., 4) quaternion array."""
    return np.stack(np.broadcast_arrays(w, x, y, z), axis=-1).astype(float)


def qmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product, broadcasting over leading axes."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    aw, ax, ay, az = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    bw, bx, by, bz = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def qconj(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    out = a.copy()
    out[..., 1:] = -out[..., 1:]
    return out


def qre(a: np.ndarray) -> np.ndarray:
    """Real part as a (...,) array of reals."""
    return np.asarray(a, dtype=float)[..., 0]


def qim(a: np.ndarray) -> np.ndarray:
    """Imaginary part as a quaternion array (real component zeroed)."""
    out = np.asarray(a, dtype=float).copy()
    out[..., 0] = 0.0
    return out


def qabs(a: np.ndarray) -> np.ndarray:
    return np.linalg.norm(np.asarray(a, dtype=float), axis=-1)


def qabs2(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return np.sum(a * a, axis=-1)


def qinv(a: np.ndarray) -> np.ndarray:
    """Inverse conj(a)/|a|^2. Raises ZeroDivisionError on any exact zero."""
    a = np.asarray(a, dtype=float)
    n2 = qabs2(a)
    if np.any(n2 == 0.0):
        raise ZeroDivisionError("quaternion inverse of zero")
    return qconj(a) / n2[..., None]


def inner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Euclidean inner product Re(conj(a) b), which is the R^4 dot product."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.sum(a * b, axis=-1)


def exp_imaginary(v: np.ndarray, tol: float = PREDICATE_TOL) -> np.ndarray:
    """exp of a purely imaginary quaternion: cos|v| + (v/|v|) sin|v|."""
    v = np.asarray(v, dtype=float)
    bad = np.max(np.abs(v[..., 0])) if v.size else 0.0
    if bad > tol:
        raise NotImaginary(f"real part {bad:.3e} exceeds tol {tol:.1e}")
    theta = qabs(v)
    # sin(theta)/theta via sinc, exact at theta = 0
    sinc = np.sinc(theta / np.pi)
    out = v * sinc[..., None]
    out[..., 0] = np.cos(theta)
    return out


def check_unit(q: np.ndarray, tol: float = PREDICATE_TOL, name: str = "quaternion"):
    dev = np.max(np.abs(qabs(np.asarray(q, dtype=float)) - 1.0))
    if dev > tol:
        raise NotUnit(f"{name}: |q| deviates from 1 by {dev:.3e} (tol {tol:.1e})")


def apply_motion(r: np.ndarray, s: np.ndarray, t: np.ndarray, a: np.ndarray,
                 tol: float = PREDICATE_TOL) -> np.ndarray:
    """Euclidean motion a -> r a s^-1 + t with unit r, s."""
    r = np.asarray(r, dtype=float)
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    check_unit(r, tol, "r")
    check_unit(s, tol, "s")
    return qmul(qmul(r, a), qinv(s)) + t
