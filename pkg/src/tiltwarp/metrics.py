"""Reference-based quality metrics: PSNR, SSIM, flow endpoint error.

SSIM follows the classic single-scale formulation: 11x11 Gaussian window
with sigma 1.5, K1 = 0.01, K2 = 0.03, dynamic range 255, statistics taken
over the valid (fully covered) window positions, color reduced to BT.601
luma before windowing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .flow import FlowField
from .image import Image

PSNR_CAP_DB = 100.0

_SSIM_WIN = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03


@dataclass(frozen=True)
class MetricReport:
    psnr_db: float
    ssim: float
    n_images: int

    def __post_init__(self):
        if self.n_images <= 0:
            raise DataError("report needs at least one image")


def _check_pair(a: Image, b: Image) -> None:
    if (a.width, a.height, a.channels) != (b.width, b.height, b.channels):
        raise DataError(
            f"image shapes differ: {a.data.shape} vs {b.data.shape}"
        )


def _as_255(img: Image) -> np.ndarray:
    """Samples on the 0..255 scale in float64 (no quantization for unit input)."""
    if img.unit:
        return img.data * 255.0
    return img.data.astype(np.float64)


def psnr(a: Image, b: Image) -> float:
    """10*log10(MAX^2 / MSE) over all channels; identical images cap at 100 dB.

    MAX is 255 when both images are 8-bit, 1.0 when both are unit floats;
    mixed representations are compared on the unit scale.
    """
    _check_pair(a, b)
    if not a.unit and not b.unit:
        diff = a.data.astype(np.float64) - b.data.astype(np.float64)
        peak = 255.0
    else:
        da = a.data if a.unit else a.data.astype(np.float64) / 255.0
        db = b.data if b.unit else b.data.astype(np.float64) / 255.0
        diff = da - db
        peak = 1.0
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, 10.0 * np.log10(peak * peak / mse))


_BT601 = np.array([0.299, 0.587, 0.114])


def _luma_255(img: Image) -> np.ndarray:
    arr = _as_255(img)
    if img.channels == 3:
        return arr @ _BT601
    return arr[:, :, 0]


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    r = size // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    g = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return g / g.sum()


def _filter_valid(arr: np.ndarray, kern: np.ndarray) -> np.ndarray:
    """Separable correlation keeping only fully covered window positions."""
    from numpy.lib.stride_tricks import sliding_window_view

    tmp = sliding_window_view(arr, len(kern), axis=1) @ kern
    return sliding_window_view(tmp, len(kern), axis=0) @ kern


def ssim(a: Image, b: Image) -> float:
    """Mean local structural similarity over valid window positions."""
    _check_pair(a, b)
    if min(a.width, a.height) < _SSIM_WIN:
        raise DataError(f"images must be at least {_SSIM_WIN}px on each side")
    x = _luma_255(a)
    y = _luma_255(b)
    kern = _gaussian_kernel(_SSIM_WIN, _SSIM_SIGMA)
    mu_x = _filter_valid(x, kern)
    mu_y = _filter_valid(y, kern)
    xx = _filter_valid(x * x, kern)
    yy = _filter_valid(y * y, kern)
    xy = _filter_valid(x * y, kern)
    var_x = xx - mu_x * mu_x
    var_y = yy - mu_y * mu_y
    cov = xy - mu_x * mu_y
    c1 = (_SSIM_K1 * 255.0) ** 2
    c2 = (_SSIM_K2 * 255.0) ** 2
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def endpoint_error(f: FlowField, g: FlowField) -> tuple[float, float]:
    """Mean and max Euclidean distance between corresponding displacements."""
    if f.u.shape != g.u.shape:
        raise DataError("flow dimensions differ")
    du = f.u.astype(np.float64) - g.u.astype(np.float64)
    dv = f.v.astype(np.float64) - g.v.astype(np.float64)
    dist = np.sqrt(du * du + dv * dv)
    return float(dist.mean()), float(dist.max())


def evaluate_pairs(pairs) -> MetricReport:
    """Average PSNR/SSIM over (prediction, label) image pairs."""
    psnrs = []
    ssims = []
    for pred, label in pairs:
        psnrs.append(psnr(pred, label))
        ssims.append(ssim(pred, label))
    if not psnrs:
        raise DataError("no image pairs to evaluate")
    return MetricReport(float(np.mean(psnrs)), float(np.mean(ssims)), len(psnrs))
