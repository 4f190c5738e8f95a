"""The geometric core: mesh-driven warps and flow-driven warps.

Pipeline shape: a deformation is a pair (rigid mesh, deformed mesh).  Each
grid cell yields one projective map (grid_homographies); rasterizing those
maps per pixel gives a dense backward flow (mesh_to_flow); sampling the
input image along a flow realizes the warp (backward_warp).  mesh_warp is
the fused path that skips the flow buffer, used where latency matters.

The cell containing pixel (x, y) is (min(floor(x*U/W), U-1),
min(floor(y*V/H), V-1)): ties at interior cell edges go to the higher-index
cell, the right/bottom image edges clamp.  The first mesh of every pair is
expected to be the rigid lattice, which makes this floor arithmetic exact.
"""

from __future__ import annotations

import enum

import numpy as np

from . import _kernels
from .errors import DataError, DegenerateGeometryError
from .flow import FlowField
from .homography import grid_homographies
from .image import Image, to_uint8, to_unit
from .mesh import Mesh


class Boundary(enum.Enum):
    """Out-of-range sampling policy: constant fill (default 0) or edge clamp."""

    CONSTANT = "constant"
    CLAMP = "clamp"

    @property
    def code(self) -> int:
        return _kernels.BOUNDARY_CONSTANT if self is Boundary.CONSTANT else _kernels.BOUNDARY_CLAMP


def cell_index(x: int, y: int, cols: int, rows: int, width: int, height: int) -> tuple[int, int]:
    """Grid cell of pixel (x, y); mirrors the kernel arithmetic exactly."""
    return (
        min((x * cols) // width, cols - 1),
        min((y * rows) // height, rows - 1),
    )


def mesh_to_flow(m_rig: Mesh, m_pre: Mesh) -> FlowField:
    """Rasterize per-cell homographies into a dense backward flow.

    For every pixel of the m_rig frame, the containing cell's map sends
    (x, y, 1) to homogeneous (X, Y, D); the flow entry is (X/D - x, Y/D - y).
    """
    hmats = grid_homographies(m_rig, m_pre)
    w, h = m_rig.width, m_rig.height
    u = np.empty((h, w), dtype=np.float32)
    v = np.empty((h, w), dtype=np.float32)
    _kernels.rasterize_grid_flow(hmats, m_rig.cols, m_rig.rows, w, h, u, v)
    if not (np.isfinite(u).all() and np.isfinite(v).all()):
        raise DegenerateGeometryError("non-finite flow: a cell homography is near-singular")
    return FlowField(u, v)


def backward_warp(
    img: Image,
    flow: FlowField,
    boundary: Boundary = Boundary.CONSTANT,
    fill: float = 0.0,
) -> Image:
    """output(x, y) = bilinear sample of img at (x + u(x,y), y + v(x,y)).

    8-bit input is warped in unit floats and requantized, so a zero flow
    reproduces the input bit-exactly in either representation.
    """
    if (flow.width, flow.height) != (img.width, img.height):
        raise DataError(
            f"flow {flow.width}x{flow.height} does not match image {img.width}x{img.height}"
        )
    src = to_unit(img)
    out = np.empty_like(src.data)
    _kernels.warp_by_flow(src.data, flow.u, flow.v, boundary.code, float(fill), out)
    res = Image(out, unit=True)
    return res if img.unit else to_uint8(res)


def mesh_warp(
    img: Image,
    m_rig: Mesh,
    m_pre: Mesh,
    boundary: Boundary = Boundary.CONSTANT,
    fill: float = 0.0,
) -> Image:
    """Warp img by the per-cell homographies of the mesh pair (fused path).

    Positions stay in float64 all the way to the sampler; agreement with
    backward_warp(img, mesh_to_flow(...)) is within float32 flow quantization.
    """
    if (m_rig.width, m_rig.height) != (img.width, img.height):
        raise DataError("mesh frame does not match image dimensions")
    hmats = grid_homographies(m_rig, m_pre)
    src = to_unit(img)
    out = np.empty_like(src.data)
    _kernels.warp_by_grid(src.data, hmats, m_rig.cols, m_rig.rows, boundary.code, float(fill), out)
    res = Image(out, unit=True)
    return res if img.unit else to_uint8(res)


def warp_positions(
    img: Image,
    px: np.ndarray,
    py: np.ndarray,
    boundary: Boundary = Boundary.CONSTANT,
    fill: float = 0.0,
) -> Image:
    """Sample img at explicit positions; output takes the shape of px/py."""
    if px.shape != py.shape or px.ndim != 2:
        raise DataError("position maps must be equal 2-D arrays")
    src = to_unit(img)
    out = np.empty((px.shape[0], px.shape[1], src.channels), dtype=np.float64)
    _kernels.warp_by_positions(
        src.data,
        np.ascontiguousarray(px, dtype=np.float64),
        np.ascontiguousarray(py, dtype=np.float64),
        boundary.code,
        float(fill),
        out,
    )
    res = Image(out, unit=True)
    return res if img.unit else to_uint8(res)
