"""Reference-based quality metrics on unit-range images."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import correlate2d

from .image import PlanarImage

__all__ = ["MetricReport", "psnr", "ssim", "measure"]

_SSIM_WINDOW_SIZE = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03


def _gaussian_window() -> np.ndarray:
    radius = (_SSIM_WINDOW_SIZE - 1) // 2
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(offsets**2) / (2.0 * _SSIM_SIGMA**2))
    window = np.outer(g, g)
    return window / window.sum()

_WINDOW = _gaussian_window()
_WINDOW.flags.writeable = False


@dataclass(frozen=True)
class MetricReport:
    """psnr_db is math.inf for identical inputs; ssim lies in [-1, 1]."""

    psnr_db: float
    ssim: float


def _check_shapes(a: PlanarImage, b: PlanarImage) -> None:
    if a.data.shape != b.data.shape:
        raise ValueError(f"shape mismatch: {a.data.shape} vs {b.data.shape}")


def psnr(a: PlanarImage, b: PlanarImage) -> float:
    """Peak signal-to-noise ratio in dB with peak 1; inf when identical."""
    _check_shapes(a, b)
    mse = float(np.mean((a.data - b.data) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)


def _ssim_plane(a: np.ndarray, b: np.ndarray) -> float:
    c1 = _SSIM_K1**2
    c2 = _SSIM_K2**2
    mu_a = correlate2d(a, _WINDOW, mode="valid")
    mu_b = correlate2d(b, _WINDOW, mode="valid")
    var_a = correlate2d(a * a, _WINDOW, mode="valid") - mu_a**2
    var_b = correlate2d(b * b, _WINDOW, mode="valid") - mu_b**2
    cov = correlate2d(a * b, _WINDOW, mode="valid") - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    return float((num / den).mean())


def ssim(a: PlanarImage, b: PlanarImage) -> float:
    """Mean structural similarity over valid 11x11 Gaussian windows.

    Gaussian window sigma 1.5, stabilizers K1=0.01 / K2=0.03 at dynamic
    range 1; channels are scored independently and averaged.
    """
    _check_shapes(a, b)
    if a.height < _SSIM_WINDOW_SIZE or a.width < _SSIM_WINDOW_SIZE:
        raise ValueError(
            f"image is {a.height}x{a.width}; SSIM needs at least "
            f"{_SSIM_WINDOW_SIZE}x{_SSIM_WINDOW_SIZE}"
        )
    scores = [_ssim_plane(a.data[c], b.data[c]) for c in range(a.channels)]
    return float(np.mean(scores))


def measure(a: PlanarImage, b: PlanarImage) -> MetricReport:
    """Both metrics in one report."""
    return MetricReport(psnr_db=psnr(a, b), ssim=ssim(a, b))
