"""Shared test fixtures: deterministic procedural images and crop helpers."""

from __future__ import annotations

import numpy as np
import pytest

import tiltwarp as tw


def smooth_array(width: int, height: int, channels: int = 3) -> np.ndarray:
    """Band-limited analytic content evaluated at pixel centers.

    Coordinates are normalized by the frame size, so different resolutions
    sample the same underlying scene (used by the multi-resolution tests).
    """
    x = (np.arange(width) + 0.5) / width
    y = (np.arange(height) + 0.5) / height
    xx, yy = np.meshgrid(x, y)
    chans = []
    params = [(3.0, 2.0, 0.0), (2.0, 5.0, 1.0), (4.0, 3.0, 2.0)][:channels]
    for fx, fy, phase in params:
        v = (
            0.5
            + 0.18 * np.sin(2 * np.pi * (fx * xx + 0.3) + phase) * np.cos(2 * np.pi * fy * yy)
            + 0.15 * np.exp(-((xx - 0.4) ** 2 + (yy - 0.55) ** 2) / 0.05)
            + 0.10 * xx
            + 0.05 * yy
        )
        chans.append(v)
    return np.clip(np.stack(chans, axis=-1), 0.0, 1.0)


def smooth_image(width: int, height: int, channels: int = 3, *, unit: bool = False) -> tw.Image:
    arr = smooth_array(width, height, channels)
    img = tw.Image(arr, unit=True)
    return img if unit else tw.to_uint8(img)


def random_image(width: int, height: int, channels: int = 3, seed: int = 0, *, unit: bool = False) -> tw.Image:
    rng = np.random.default_rng(seed)
    if unit:
        return tw.Image(rng.random((height, width, channels)), unit=True)
    return tw.Image(rng.integers(0, 256, (height, width, channels), dtype=np.uint8), unit=False)


def dyadic_flow(width: int, height: int, seed: int = 0, max_px: float = 8.0) -> tw.FlowField:
    """Random flow quantized to multiples of 1/256 so that sample positions
    are exactly representable (required for bitwise symmetry checks)."""
    rng = np.random.default_rng(seed)
    q = int(max_px * 256)
    u = (rng.integers(-q, q + 1, (height, width)) / 256.0).astype(np.float32)
    v = (rng.integers(-q, q + 1, (height, width)) / 256.0).astype(np.float32)
    return tw.FlowField(u, v)


def central_crop(img: tw.Image, frac: float = 0.6) -> tw.Image:
    w, h = img.width, img.height
    x0 = int(round(w * (1.0 - frac) / 2.0))
    y0 = int(round(h * (1.0 - frac) / 2.0))
    return tw.Image(np.ascontiguousarray(img.data[y0 : h - y0, x0 : w - x0]), unit=img.unit)


@pytest.fixture
def work_image() -> tw.Image:
    return smooth_image(512, 384)


@pytest.fixture(autouse=True)
def _default_threads():
    """Keep kernels on all available threads unless a test pins them."""
    from tiltwarp._kernels import max_threads, set_threads

    set_threads(max_threads())
    yield
    set_threads(max_threads())
