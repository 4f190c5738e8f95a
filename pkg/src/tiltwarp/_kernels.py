"""Dense per-pixel kernels (warping, rasterization, resampling).

All kernels parallelize over rows and every pixel write is independent, so
results are bit-identical for any thread count.  `fastmath` stays off:
several callers rely on exact IEEE behavior (identity warps are bit-exact,
mirroring commutes with warping when sample positions are exactly
representable).

Two interpolation forms are used deliberately:

* warp sampling uses the symmetric ``a*(1-t) + b*t`` so that mirrored
  inputs produce bitwise-mirrored outputs (the two products are identical
  under reflection and float addition is commutative);
* resizing uses the delta form ``a + t*(b-a)`` so constant inputs resize
  with zero arithmetic error.
"""

import numba
import numpy as np
from numba import njit, prange

numba.config.THREADING_LAYER = "omp"

# boundary codes shared with warp.py
BOUNDARY_CONSTANT = 0
BOUNDARY_CLAMP = 1


def set_threads(n: int) -> int:
    """Pin the kernel thread count, clamped to what the runtime allows."""
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
    return n


def max_threads() -> int:
    return numba.config.NUMBA_NUM_THREADS


@njit(cache=True, inline="always")
def _sample_channel(img, px, py, ch, boundary, fill):
    h, w = img.shape[0], img.shape[1]
    x0 = int(np.floor(px))
    y0 = int(np.floor(py))
    tx = px - x0
    ty = py - y0
    if boundary == BOUNDARY_CLAMP:
        xa = min(max(x0, 0), w - 1)
        xb = min(max(x0 + 1, 0), w - 1)
        ya = min(max(y0, 0), h - 1)
        yb = min(max(y0 + 1, 0), h - 1)
        v00 = img[ya, xa, ch]
        v10 = img[ya, xb, ch]
        v01 = img[yb, xa, ch]
        v11 = img[yb, xb, ch]
    else:
        x_in0 = 0 <= x0 < w
        x_in1 = 0 <= x0 + 1 < w
        y_in0 = 0 <= y0 < h
        y_in1 = 0 <= y0 + 1 < h
        v00 = img[y0, x0, ch] if (x_in0 and y_in0) else fill
        v10 = img[y0, x0 + 1, ch] if (x_in1 and y_in0) else fill
        v01 = img[y0 + 1, x0, ch] if (x_in0 and y_in1) else fill
        v11 = img[y0 + 1, x0 + 1, ch] if (x_in1 and y_in1) else fill
    top = v00 * (1.0 - tx) + v10 * tx
    bot = v01 * (1.0 - tx) + v11 * tx
    return top * (1.0 - ty) + bot * ty


@njit(cache=True, parallel=True)
def warp_by_flow(img, u, v, boundary, fill, out):
    """Backward warp: out(x,y) = img sampled at (x + u, y + v)."""
    h, w, c = img.shape
    for y in prange(h):
        for x in range(w):
            px = x + np.float64(u[y, x])
            py = y + np.float64(v[y, x])
            for ch in range(c):
                out[y, x, ch] = _sample_channel(img, px, py, ch, boundary, fill)


@njit(cache=True, parallel=True)
def warp_by_positions(img, px, py, boundary, fill, out):
    """Sample img at explicit per-pixel positions (output size may differ)."""
    oh, ow, c = out.shape
    for y in prange(oh):
        for x in range(ow):
            for ch in range(c):
                out[y, x, ch] = _sample_channel(img, px[y, x], py[y, x], ch, boundary, fill)


@njit(cache=True, inline="always")
def _cell_of(x, y, cols, rows, width, height):
    # min(floor(x*U/W), U-1), exact in integer arithmetic
    cu = (x * cols) // width
    cv = (y * rows) // height
    if cu > cols - 1:
        cu = cols - 1
    if cv > rows - 1:
        cv = rows - 1
    return cu, cv


@njit(cache=True, parallel=True)
def rasterize_grid_flow(hmats, cols, rows, width, height, u, v):
    """Per-pixel displacement from the containing cell's homography.

    hmats is (rows, cols, 3, 3) with the bottom-right entry fixed to 1.
    u, v are float32 outputs of shape (height, width).
    """
    for y in prange(height):
        for x in range(width):
            cu, cv = _cell_of(x, y, cols, rows, width, height)
            m = hmats[cv, cu]
            d = m[2, 0] * x + m[2, 1] * y + m[2, 2]
            px = (m[0, 0] * x + m[0, 1] * y + m[0, 2]) / d
            py = (m[1, 0] * x + m[1, 1] * y + m[1, 2]) / d
            u[y, x] = np.float32(px - x)
            v[y, x] = np.float32(py - y)


@njit(cache=True, parallel=True)
def warp_by_grid(img, hmats, cols, rows, boundary, fill, out):
    """Fused mesh warp: homography evaluation feeds sampling directly,
    with no intermediate flow buffer (positions stay in float64)."""
    h, w, c = img.shape
    for y in prange(h):
        for x in range(w):
            cu, cv = _cell_of(x, y, cols, rows, w, h)
            m = hmats[cv, cu]
            d = m[2, 0] * x + m[2, 1] * y + m[2, 2]
            px = (m[0, 0] * x + m[0, 1] * y + m[0, 2]) / d
            py = (m[1, 0] * x + m[1, 1] * y + m[1, 2]) / d
            for ch in range(c):
                out[y, x, ch] = _sample_channel(img, px, py, ch, boundary, fill)


@njit(cache=True, parallel=True)
def resize_channels(src, out):
    """Bilinear resize, align-corners-false, edge-clamped taps.

    Sample position: src_x = (dst_x + 0.5) * (src_w / dst_w) - 0.5, so a
    same-size resize hits integer positions and copies exactly.
    """
    sh, sw, c = src.shape
    oh, ow, _ = out.shape
    xs = sw / ow
    ys = sh / oh
    for oy in prange(oh):
        sy = (oy + 0.5) * ys - 0.5
        y0 = int(np.floor(sy))
        ty = sy - y0
        ya = min(max(y0, 0), sh - 1)
        yb = min(max(y0 + 1, 0), sh - 1)
        for ox in range(ow):
            sx = (ox + 0.5) * xs - 0.5
            x0 = int(np.floor(sx))
            tx = sx - x0
            xa = min(max(x0, 0), sw - 1)
            xb = min(max(x0 + 1, 0), sw - 1)
            for ch in range(c):
                v00 = src[ya, xa, ch]
                v10 = src[ya, xb, ch]
                v01 = src[yb, xa, ch]
                v11 = src[yb, xb, ch]
                top = v00 + tx * (v10 - v00)
                bot = v01 + tx * (v11 - v01)
                out[oy, ox, ch] = top + ty * (bot - top)
