"""Raster image container, codecs, mirroring, and bilinear resizing.

Pixel convention used throughout the toolkit: pixel (x, y) addresses column
x in [0, width) and row y in [0, height), origin at the top-left, x growing
rightward and y downward, with pixel centers at integer coordinates.

Images carry either 8-bit samples or unit-interval float64 samples; all
geometry code computes in the unit representation and conversion happens at
the boundaries of this module.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError

from . import _kernels
from .errors import DataError, DecodeError


@dataclass(frozen=True)
class Image:
    """H x W x C raster; `unit` selects float64 in [0, 1] over uint8."""

    data: np.ndarray
    unit: bool

    def __post_init__(self):
        d = self.data
        if d.ndim != 3:
            raise DataError(f"image data must be HxWxC, got shape {d.shape}")
        if d.shape[2] not in (1, 3):
            raise DataError(f"channels must be 1 or 3, got {d.shape[2]}")
        if d.shape[0] < 1 or d.shape[1] < 1:
            raise DataError("zero-dimension image")
        if self.unit:
            if d.dtype != np.float64:
                raise DataError("unit images store float64 samples")
            lo, hi = float(d.min()), float(d.max())
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo < 0.0 or hi > 1.0:
                raise DataError("unit image samples must lie in [0, 1]")
        elif d.dtype != np.uint8:
            raise DataError("8-bit images store uint8 samples")
        if not d.flags.c_contiguous:
            object.__setattr__(self, "data", np.ascontiguousarray(d))
        self.data.setflags(write=False)

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


def to_unit(img: Image) -> Image:
    if img.unit:
        return img
    return Image(img.data.astype(np.float64) / 255.0, unit=True)


def to_uint8(img: Image) -> Image:
    """Quantize unit samples: multiply by 255, round half away from zero,
    clamp to [0, 255]."""
    if not img.unit:
        return img
    q = np.floor(img.data * 255.0 + 0.5)  # samples are >= 0
    return Image(np.clip(q, 0.0, 255.0).astype(np.uint8), unit=False)


def image_from_array(arr: np.ndarray, unit: bool | None = None) -> Image:
    """Wrap a 2-D or 3-D array, inferring the representation from dtype."""
    a = np.asarray(arr)
    if a.ndim == 2:
        a = a[:, :, None]
    if unit is None:
        unit = a.dtype != np.uint8
    if unit:
        a = a.astype(np.float64, copy=False)
    return Image(np.ascontiguousarray(a), unit=unit)


def load_image(path) -> Image:
    """Decode a PNG or JPEG file into an 8-bit image.

    Color input yields 3 channels, grayscale yields 1; alpha is discarded.
    """
    try:
        with PILImage.open(path) as im:
            if im.format not in ("PNG", "JPEG"):
                raise DecodeError(f"unsupported codec {im.format!r} in {path}")
            if im.mode == "L":
                pil = im
            elif im.mode in ("1", "LA", "I;16", "I"):
                pil = im.convert("L")
            else:
                pil = im.convert("RGB")
            arr = np.asarray(pil, dtype=np.uint8)
    except FileNotFoundError:
        raise DecodeError(f"no such file: {path}") from None
    except UnidentifiedImageError:
        raise DecodeError(f"decode failure: {path}") from None
    except OSError as e:
        raise DecodeError(f"decode failure: {path}: {e}") from None
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise DecodeError(f"zero-dimension image: {path}")
    return Image(arr, unit=False)


def save_image(img: Image, path) -> None:
    """Write as PNG (lossless; 8-bit round trips bit-exactly).

    Unit images are quantized with the to_uint8 rounding rule first.
    """
    img8 = to_uint8(img)
    arr = img8.data[:, :, 0] if img8.channels == 1 else img8.data
    mode = "L" if img8.channels == 1 else "RGB"
    if os.path.isdir(path):
        raise DataError(f"cannot write image to a directory: {path}")
    try:
        PILImage.fromarray(arr, mode=mode).save(path, format="PNG")
    except OSError as e:
        raise DataError(f"cannot write {path}: {e}") from None


def encode_png(img: Image) -> bytes:
    import io

    img8 = to_uint8(img)
    arr = img8.data[:, :, 0] if img8.channels == 1 else img8.data
    mode = "L" if img8.channels == 1 else "RGB"
    buf = io.BytesIO()
    PILImage.fromarray(arr, mode=mode).save(buf, format="PNG")
    return buf.getvalue()


def decode_image_bytes(blob: bytes) -> Image:
    import io

    try:
        with PILImage.open(io.BytesIO(blob)) as im:
            if im.format not in ("PNG", "JPEG"):
                raise DecodeError(f"unsupported codec {im.format!r}")
            pil = im if im.mode == "L" else im.convert("RGB")
            arr = np.asarray(pil, dtype=np.uint8)
    except UnidentifiedImageError:
        raise DecodeError("decode failure") from None
    except OSError as e:
        raise DecodeError(f"decode failure: {e}") from None
    if arr.ndim == 2:
        arr = arr[:, :, None]
    return Image(arr, unit=False)


def mirror_lr(img: Image) -> Image:
    """Left-right reflection: output(x, y) = input(width-1-x, y)."""
    return Image(np.ascontiguousarray(img.data[:, ::-1, :]), unit=img.unit)


def resize_bilinear(img: Image, new_width: int, new_height: int) -> Image:
    """Bilinear resample under the align-corners-false convention.

    Returns the same representation it was given; 8-bit input is computed
    in unit floats and requantized.
    """
    if new_width < 1 or new_height < 1:
        raise DataError("resize target must be at least 1x1")
    src = to_unit(img)
    out = np.empty((new_height, new_width, src.channels), dtype=np.float64)
    _kernels.resize_channels(src.data, out)
    res = Image(out, unit=True)
    return res if img.unit else to_uint8(res)
