"""Deformation meshes: a (cols+1) x (rows+1) vertex grid over an image frame.

Vertex (i, j) sits at column i in [0, cols] and row j in [0, rows]; a rigid
mesh places it at exactly (i*width/cols, j*height/rows).  Mesh coordinates
span the continuous frame [0, width] x [0, height] (vertices may sit at the
frame edge, one past the last pixel center).

Every mesh accepted by the warp engine must pass quad validity: each cell is
a strictly convex, positively oriented quadrilateral.  That guarantees the
per-cell projective map is invertible and the rasterized flow stays finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, FormatError, MeshValidityError

# Signed triangle areas below this (px^2) count as degenerate.
MIN_TRIANGLE_AREA = 1e-6


@dataclass(frozen=True)
class Mesh:
    cols: int  # cell count across the width (U)
    rows: int  # cell count across the height (V)
    width: int  # frame width, px
    height: int  # frame height, px
    vertices: np.ndarray  # (rows+1, cols+1, 2) float64; [j, i] = (m, n)

    def __post_init__(self):
        if self.cols < 1 or self.rows < 1:
            raise DataError("mesh needs at least one cell per axis")
        if self.width <= self.cols or self.height <= self.rows:
            raise DataError("frame must be larger than the cell grid")
        v = np.asarray(self.vertices, dtype=np.float64)
        expect = (self.rows + 1, self.cols + 1, 2)
        if v.shape != expect:
            raise DataError(f"vertex array must be {expect}, got {v.shape}")
        if not np.isfinite(v).all():
            raise DataError("mesh vertices must be finite")
        object.__setattr__(self, "vertices", np.ascontiguousarray(v))
        self.vertices.setflags(write=False)

    def vertex(self, i: int, j: int) -> tuple[float, float]:
        return float(self.vertices[j, i, 0]), float(self.vertices[j, i, 1])

    def same_grid(self, other: "Mesh") -> bool:
        return (
            self.cols == other.cols
            and self.rows == other.rows
            and self.width == other.width
            and self.height == other.height
        )


def rigid_mesh(width: int, height: int, cols: int, rows: int) -> Mesh:
    """Uniform lattice with vertex (i, j) at (i*width/cols, j*height/rows)."""
    if cols < 1 or rows < 1:
        raise DataError("cell counts must be at least 1")
    i = np.arange(cols + 1, dtype=np.float64)
    j = np.arange(rows + 1, dtype=np.float64)
    xs = i * width / cols
    ys = j * height / rows
    v = np.empty((rows + 1, cols + 1, 2), dtype=np.float64)
    v[:, :, 0] = xs[None, :]
    v[:, :, 1] = ys[:, None]
    return Mesh(cols, rows, width, height, v)


def _cell_cross_areas(verts: np.ndarray) -> np.ndarray:
    """Signed triangle areas at the 4 corners of every cell, (rows, cols, 4).

    Corners are walked TL, TR, BR, BL; with y pointing down this order is
    clockwise on screen and a rigid cell yields positive areas.
    """
    tl = verts[:-1, :-1]
    tr = verts[:-1, 1:]
    br = verts[1:, 1:]
    bl = verts[1:, :-1]
    quad = np.stack([tl, tr, br, bl], axis=2)  # (rows, cols, 4, 2)
    nxt = np.roll(quad, -1, axis=2)
    nxt2 = np.roll(quad, -2, axis=2)
    e1 = nxt - quad
    e2 = nxt2 - nxt
    cross = e1[..., 0] * e2[..., 1] - e1[..., 1] * e2[..., 0]
    return 0.5 * cross


def invalid_cells(mesh: Mesh) -> list[tuple[int, int]]:
    """Cells failing strict convexity, as (u, v) = (col, row) indices."""
    areas = _cell_cross_areas(mesh.vertices)
    bad = (areas <= MIN_TRIANGLE_AREA).any(axis=2)
    vs, us = np.nonzero(bad)
    return [(int(u), int(v)) for u, v in zip(us, vs)]


def validate_mesh(mesh: Mesh) -> None:
    bad = invalid_cells(mesh)
    if bad:
        raise MeshValidityError(f"non-convex or degenerate cells: {bad[:8]}")


def mesh_is_valid(mesh: Mesh) -> bool:
    return not invalid_cells(mesh)


def mirror_mesh(mesh: Mesh) -> Mesh:
    """Reflect about the vertical frame axis: (i,j) <- (W - m[cols-i,j], n[cols-i,j]).

    Uses the frame width W (not W-1): mesh coordinates live on [0, W], so a
    boundary vertex at m=0 lands exactly on m=W.
    """
    flipped = mesh.vertices[:, ::-1, :].copy()
    flipped[:, :, 0] = mesh.width - flipped[:, :, 0]
    return Mesh(mesh.cols, mesh.rows, mesh.width, mesh.height, flipped)


def scale_mesh(mesh: Mesh, new_width: int, new_height: int) -> Mesh:
    """Rescale vertices onto a new frame size (per-axis linear scaling)."""
    v = mesh.vertices.copy()
    v[:, :, 0] *= new_width / mesh.width
    v[:, :, 1] *= new_height / mesh.height
    return Mesh(mesh.cols, mesh.rows, new_width, new_height, v)


def translate_mesh(mesh: Mesh, dx: float, dy: float) -> Mesh:
    v = mesh.vertices.copy()
    v[:, :, 0] += dx
    v[:, :, 1] += dy
    return Mesh(mesh.cols, mesh.rows, mesh.width, mesh.height, v)


def frame_center(width: int, height: int) -> tuple[float, float]:
    """Center of the pixel grid: ((W-1)/2, (H-1)/2).

    All rotation helpers in the toolkit rotate about this point so that
    mesh-derived warps, analytic flows, and rigid rotation agree exactly.
    """
    return (width - 1) / 2.0, (height - 1) / 2.0


def rotation_matrix(theta_deg: float) -> np.ndarray:
    """2x2 rotation in the y-down pixel frame.

    Positive angles rotate content clockwise on screen, which is the
    direction that corrects a counterclockwise-tilted picture.
    """
    t = math.radians(theta_deg)
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, -s], [s, c]], dtype=np.float64)


def rotation_mesh_pair(theta_deg: float, width: int, height: int, cols: int, rows: int) -> tuple[Mesh, Mesh]:
    """Rigid mesh plus its copy rotated by -theta about the pixel-grid center.

    Used as (source, destination) this pair describes the warp whose flow
    equals analytic_rotation_flow(theta): the warp samples the input along
    the +theta-rotated content, i.e. it rotates content clockwise by theta.
    """
    rig = rigid_mesh(width, height, cols, rows)
    cx, cy = frame_center(width, height)
    rot = rotation_matrix(-theta_deg)
    rel = rig.vertices - np.array([cx, cy])
    v = rel @ rot.T + np.array([cx, cy])
    return rig, Mesh(cols, rows, width, height, v)


# --- text format -----------------------------------------------------------
#
#   tiltwarp-mesh 1
#   width <W> height <H> cols <U> rows <V>
#   <m> <n>                 # (rows+1)*(cols+1) lines, row-major: j outer, i inner
#
# Reals are written with repr() so the round trip is bit-exact.

_MESH_MAGIC = "tiltwarp-mesh 1"


def write_mesh(mesh: Mesh, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(mesh_to_text(mesh))


def mesh_to_text(mesh: Mesh) -> str:
    lines = [_MESH_MAGIC, f"width {mesh.width} height {mesh.height} cols {mesh.cols} rows {mesh.rows}"]
    for j in range(mesh.rows + 1):
        for i in range(mesh.cols + 1):
            m, n = mesh.vertices[j, i]
            lines.append(f"{float(m)!r} {float(n)!r}")
    return "\n".join(lines) + "\n"


def mesh_from_text(text: str) -> Mesh:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != _MESH_MAGIC:
        raise FormatError(f"bad mesh header, expected {_MESH_MAGIC!r}")
    hdr = lines[1].split()
    try:
        if [hdr[0], hdr[2], hdr[4], hdr[6]] != ["width", "height", "cols", "rows"]:
            raise ValueError
        width, height, cols, rows = int(hdr[1]), int(hdr[3]), int(hdr[5]), int(hdr[7])
    except (IndexError, ValueError):
        raise FormatError(f"bad mesh size line: {lines[1]!r}") from None
    n_expected = (rows + 1) * (cols + 1)
    body = lines[2:]
    if len(body) != n_expected:
        raise FormatError(f"expected {n_expected} vertex lines, got {len(body)}")
    v = np.empty((rows + 1, cols + 1, 2), dtype=np.float64)
    for k, ln in enumerate(body):
        parts = ln.split()
        if len(parts) != 2:
            raise FormatError(f"bad vertex line {k + 3}: {ln!r}")
        try:
            v[k // (cols + 1), k % (cols + 1)] = (float(parts[0]), float(parts[1]))
        except ValueError:
            raise FormatError(f"bad vertex line {k + 3}: {ln!r}") from None
    return Mesh(cols, rows, width, height, v)


def read_mesh(path) -> Mesh:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return mesh_from_text(f.read())
    except FileNotFoundError:
        raise DataError(f"no such mesh file: {path}") from None
