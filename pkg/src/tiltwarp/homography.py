"""Projective maps from 4-point correspondences (direct linear transform).

A 3x3 matrix with the bottom-right entry fixed to 1 has 8 unknowns, exactly
determined by 4 point pairs.  Writing h = (a11 a12 a13 a21 a22 a23 a31 a32),
each pair (x, y) -> (x', y') contributes two rows:

    [x y 1 0 0 0 -x*x' -y*x'] . h = x'
    [0 0 0 x y 1 -x*y' -y*y'] . h = y'

The 8x8 system is solved by Gaussian elimination with partial pivoting; a
pivot below 1e-12 (after row scaling) marks the configuration degenerate.
np.linalg.solve would do the same factorization but hides the pivots, and
the 4-point exact case needs no SVD machinery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError
from .mesh import Mesh, validate_mesh

PIVOT_EPS = 1e-12
COLLINEAR_EPS = 1e-9  # on triangle area normalized by squared diameter


@dataclass(frozen=True)
class Homography:
    matrix: np.ndarray  # 3x3 float64, matrix[2,2] == 1

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.shape != (3, 3):
            raise DegenerateGeometryError("homography must be 3x3")
        if not np.isfinite(m).all():
            raise DegenerateGeometryError("homography entries must be finite")
        if m[2, 2] != 1.0:
            raise DegenerateGeometryError("bottom-right entry must be 1")
        if abs(np.linalg.det(m)) <= 1e-12:
            raise DegenerateGeometryError("homography is not invertible")
        object.__setattr__(self, "matrix", np.ascontiguousarray(m))
        self.matrix.setflags(write=False)

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map (..., 2) points through the projective transform."""
        p = np.asarray(points, dtype=np.float64)
        xy1 = np.concatenate([p, np.ones(p.shape[:-1] + (1,))], axis=-1)
        q = xy1 @ self.matrix.T
        return q[..., :2] / q[..., 2:3]

    def inverse(self) -> "Homography":
        inv = np.linalg.inv(self.matrix)
        if abs(inv[2, 2]) <= PIVOT_EPS:
            raise DegenerateGeometryError("inverse cannot be normalized")
        return Homography(inv / inv[2, 2])


IDENTITY = np.eye(3, dtype=np.float64)


def _check_quad_points(pts: np.ndarray, label: str) -> None:
    """Reject coincident points and collinear triples (scale-normalized)."""
    diffs = pts[:, None, :] - pts[None, :, :]
    d2 = (diffs**2).sum(-1)
    diam2 = d2.max()
    if diam2 <= 0.0:
        raise DegenerateGeometryError(f"{label} points are all coincident")
    iu = np.triu_indices(4, k=1)
    if (d2[iu] / diam2 <= 1e-24).any():
        raise DegenerateGeometryError(f"{label} points are not pairwise distinct")
    idx = [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)]
    for a, b, c in idx:
        e1 = pts[b] - pts[a]
        e2 = pts[c] - pts[a]
        area = 0.5 * abs(e1[0] * e2[1] - e1[1] * e2[0])
        if area / diam2 <= COLLINEAR_EPS:
            raise DegenerateGeometryError(f"{label} points {a},{b},{c} are collinear")


def _solve_pp(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """8x8 Gaussian elimination, partial pivoting, explicit pivot guard."""
    a = a.copy()
    b = b.copy()
    n = a.shape[0]
    scale = np.abs(a).max(axis=1)
    if (scale <= 0.0).any():
        raise DegenerateGeometryError("singular system (zero row)")
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k]) / scale[k:]))
        if abs(a[p, k]) <= PIVOT_EPS * scale[p]:
            raise DegenerateGeometryError("singular system (pivot underflow)")
        if p != k:
            a[[k, p]] = a[[p, k]]
            b[[k, p]] = b[[p, k]]
            scale[[k, p]] = scale[[p, k]]
        f = a[k + 1 :, k] / a[k, k]
        a[k + 1 :, k:] -= f[:, None] * a[k, k:]
        b[k + 1 :] -= f * b[k]
    x = np.empty(n)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1 :] @ x[k + 1 :]) / a[k, k]
    return x


def _dlt_matrix(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    if np.array_equal(src, dst):
        return IDENTITY.copy()  # keeps the identity chain bit-exact
    a = np.zeros((8, 8), dtype=np.float64)
    b = np.zeros(8, dtype=np.float64)
    for k in range(4):
        x, y = src[k]
        xp, yp = dst[k]
        a[2 * k] = (x, y, 1.0, 0.0, 0.0, 0.0, -x * xp, -y * xp)
        b[2 * k] = xp
        a[2 * k + 1] = (0.0, 0.0, 0.0, x, y, 1.0, -x * yp, -y * yp)
        b[2 * k + 1] = yp
    h = _solve_pp(a, b)
    m = np.array(
        [[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], 1.0]],
        dtype=np.float64,
    )
    if not np.isfinite(m).all():
        raise DegenerateGeometryError("non-finite homography")
    return m


def dlt_homography(src, dst) -> Homography:
    """Exact homography taking the 4 src points onto the 4 dst points.

    Both quadruples must be pairwise distinct with no collinear triple;
    reprojection of the defining points is verified to < 1e-6 px.
    """
    src = np.asarray(src, dtype=np.float64).reshape(4, 2)
    dst = np.asarray(dst, dtype=np.float64).reshape(4, 2)
    _check_quad_points(src, "source")
    _check_quad_points(dst, "destination")
    hg = Homography(_dlt_matrix(src, dst))
    err = np.abs(hg.apply(src) - dst).max()
    if err >= 1e-6:
        raise DegenerateGeometryError(f"ill-conditioned correspondences (reprojection {err:.2e} px)")
    return hg


def _cell_corners(mesh: Mesh, u: int, v: int) -> np.ndarray:
    verts = mesh.vertices
    return np.array(
        [verts[v, u], verts[v, u + 1], verts[v + 1, u + 1], verts[v + 1, u]],
        dtype=np.float64,
    )


def grid_homographies(m_rig: Mesh, m_pre: Mesh) -> np.ndarray:
    """Per-cell DLT maps from m_rig cell corners to m_pre cell corners.

    Returns a (rows, cols, 3, 3) float64 array; entry [v, u] is the map for
    the cell in column u, row v.  Both meshes must share the grid and frame
    and pass quad validity.
    """
    if not m_rig.same_grid(m_pre):
        raise DegenerateGeometryError("meshes differ in grid size or frame")
    validate_mesh(m_rig)
    validate_mesh(m_pre)
    out = np.empty((m_rig.rows, m_rig.cols, 3, 3), dtype=np.float64)
    for v in range(m_rig.rows):
        for u in range(m_rig.cols):
            src = _cell_corners(m_rig, u, v)
            dst = _cell_corners(m_pre, u, v)
            try:
                out[v, u] = _dlt_matrix(src, dst)
            except DegenerateGeometryError as e:
                raise DegenerateGeometryError(f"cell ({u}, {v}): {e}") from None
    return out
