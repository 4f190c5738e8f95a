"""Dense backward displacement fields.

A FlowField stores one horizontal and one vertical displacement per pixel
(float32, as the warp kernels consume them).  The warp that a flow encodes
is backward sampling: output(x, y) = input(x + u(x,y), y + v(x,y)).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DataError, FormatError
from .mesh import frame_center, rotation_matrix

FLOW_MAGIC = b"TWFL"


@dataclass(frozen=True)
class FlowField:
    u: np.ndarray  # (height, width) float32, horizontal displacement
    v: np.ndarray  # (height, width) float32, vertical displacement

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.float32)
        v = np.asarray(self.v, dtype=np.float32)
        if u.ndim != 2 or u.shape != v.shape:
            raise DataError(f"u/v must be equal 2-D arrays, got {u.shape} vs {v.shape}")
        if u.shape[0] < 1 or u.shape[1] < 1:
            raise DataError("zero-dimension flow")
        if not (np.isfinite(u).all() and np.isfinite(v).all()):
            raise DataError("flow values must be finite")
        object.__setattr__(self, "u", np.ascontiguousarray(u))
        object.__setattr__(self, "v", np.ascontiguousarray(v))
        self.u.setflags(write=False)
        self.v.setflags(write=False)

    @property
    def width(self) -> int:
        return self.u.shape[1]

    @property
    def height(self) -> int:
        return self.u.shape[0]


def zero_flow(width: int, height: int) -> FlowField:
    return FlowField(
        np.zeros((height, width), dtype=np.float32),
        np.zeros((height, width), dtype=np.float32),
    )


def analytic_rotation_flow(theta_deg: float, width: int, height: int) -> FlowField:
    """Backward flow of a rigid rotation by theta about the pixel-grid center.

    For output pixel p the displacement is R(-theta)*(p - c) + c - p in the
    y-down frame; applying it rotates content clockwise on screen by theta
    (the direction that corrects a counterclockwise tilt).
    """
    if abs(theta_deg) >= 90.0:
        raise DataError("|theta| must be below 90 degrees")
    cx, cy = frame_center(width, height)
    r = rotation_matrix(-theta_deg)
    x = np.arange(width, dtype=np.float64)[None, :] - cx
    y = np.arange(height, dtype=np.float64)[:, None] - cy
    u = (r[0, 0] - 1.0) * x + r[0, 1] * y
    v = r[1, 0] * x + (r[1, 1] - 1.0) * y
    return FlowField(u.astype(np.float32), v.astype(np.float32))


def compose_flows(initial: FlowField, residual: FlowField) -> FlowField:
    """Element-wise sum: the final warp samples at (x + u + du, y + v + dv)."""
    if initial.u.shape != residual.u.shape:
        raise DataError("flow dimensions differ")
    return FlowField(initial.u + residual.u, initial.v + residual.v)


def mirror_flow(flow: FlowField) -> FlowField:
    """Flow of the mirrored warp: u'(x,y) = -u(W-1-x, y), v'(x,y) = v(W-1-x, y)."""
    return FlowField(
        np.ascontiguousarray(-flow.u[:, ::-1]),
        np.ascontiguousarray(flow.v[:, ::-1]),
    )


def upsample_flow(flow: FlowField, new_width: int, new_height: int) -> FlowField:
    """Bilinear-resize the field, then magnify values by the size ratio.

    Displacements measured in source-resolution pixels must grow with the
    raster: u scales by new_width/width and v by new_height/height.
    """
    if new_width < 1 or new_height < 1:
        raise DataError("flow resize target must be at least 1x1")
    if new_width == flow.width and new_height == flow.height:
        return flow
    stacked = np.empty((flow.height, flow.width, 2), dtype=np.float64)
    stacked[:, :, 0] = flow.u
    stacked[:, :, 1] = flow.v
    out = np.empty((new_height, new_width, 2), dtype=np.float64)
    _kernels.resize_channels(stacked, out)
    sx = new_width / flow.width
    sy = new_height / flow.height
    return FlowField(
        (out[:, :, 0] * sx).astype(np.float32),
        (out[:, :, 1] * sy).astype(np.float32),
    )


def write_flow(flow: FlowField, path) -> None:
    """Binary format: magic TWFL, u32 width, u32 height (little-endian),
    then width*height float32 u values row-major, then the v values."""
    with open(path, "wb") as f:
        f.write(FLOW_MAGIC)
        f.write(struct.pack("<II", flow.width, flow.height))
        f.write(flow.u.astype("<f4", copy=False).tobytes())
        f.write(flow.v.astype("<f4", copy=False).tobytes())


def read_flow(path) -> FlowField:
    try:
        with open(path, "rb") as f:
            blob = f.read()
    except FileNotFoundError:
        raise DataError(f"no such flow file: {path}") from None
    if len(blob) < 12 or blob[:4] != FLOW_MAGIC:
        raise FormatError("bad flow file magic")
    width, height = struct.unpack("<II", blob[4:12])
    n = width * height
    if len(blob) != 12 + 8 * n:
        raise FormatError(f"flow payload size mismatch for {width}x{height}")
    u = np.frombuffer(blob, dtype="<f4", count=n, offset=12).reshape(height, width)
    v = np.frombuffer(blob, dtype="<f4", count=n, offset=12 + 4 * n).reshape(height, width)
    return FlowField(u.copy(), v.copy())
