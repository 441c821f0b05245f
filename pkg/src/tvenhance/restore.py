"""Smooth/detail layer handling and the classical enhancement pipeline.

The TV solver's output is a noise-free smooth layer; the residual
detail layer carries edges and noise.  Brightening is applied to the
smooth layer as a single scalar gain (a deliberately simple stand-in
for per-pixel illumination estimation), while the detail layer is
soft-thresholded against the average balancing map before the layers
are recombined.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import GlobalNoiseVariation, NoiseMapStack, PlanarImage, SolverConfig
from .noise import assemble_maps, estimate_global_noise
from .solver import IterationRecord, solve_tv

__all__ = [
    "REC709_LUMA",
    "EnhanceConfig",
    "EnhanceResult",
    "decompose",
    "mean_luminance",
    "luminance_gain",
    "suppress_detail",
    "enhance",
    "enhance_with_diagnostics",
]

REC709_LUMA = np.array([0.2126, 0.7152, 0.0722])
REC709_LUMA.flags.writeable = False


@dataclass(frozen=True)
class EnhanceConfig:
    """Brightening and detail-suppression settings.

    ``gain_mode`` is "auto" (drive mean luminance to ``target_luma``,
    never below gain 1, capped at ``gain_cap``) or "fixed"
    (``fixed_gain`` used verbatim).  ``detail_alpha`` scales the
    suppression threshold taken from the averaged balancing map.
    """

    gain_mode: str = "auto"
    fixed_gain: float = 1.0
    target_luma: float = 0.4
    gain_cap: float = 32.0
    detail_alpha: float = 1.0

    def __post_init__(self) -> None:
        if self.gain_mode not in ("auto", "fixed"):
            raise ValueError(f"gain_mode must be 'auto' or 'fixed', got {self.gain_mode!r}")
        if not self.fixed_gain > 0:
            raise ValueError(f"fixed_gain must be positive, got {self.fixed_gain}")
        if not (0.0 < self.target_luma <= 1.0):
            raise ValueError(f"target_luma must lie in (0, 1], got {self.target_luma}")
        if not self.gain_cap >= 1:
            raise ValueError(f"gain_cap must be at least 1, got {self.gain_cap}")
        if not self.detail_alpha >= 0:
            raise ValueError(f"detail_alpha must be non-negative, got {self.detail_alpha}")


def decompose(y: PlanarImage, y_s: PlanarImage) -> PlanarImage:
    """Detail layer y - y_s, an exact element-wise subtraction."""
    if y.data.shape != y_s.data.shape:
        raise ValueError(f"shape mismatch: {y.data.shape} vs {y_s.data.shape}")
    return PlanarImage(y.data - y_s.data)


def mean_luminance(img: PlanarImage) -> float:
    """Mean Rec. 709 luma for RGB, plain mean for grayscale."""
    if img.channels == 3:
        return float(np.tensordot(REC709_LUMA, img.data, axes=1).mean())
    return float(img.data.mean())


def luminance_gain(y_s: PlanarImage, cfg: EnhanceConfig) -> tuple[PlanarImage, float]:
    """Scale the smooth layer by a scalar gain; output is not clamped.

    Auto mode uses target_luma / mean_luminance clamped to
    [1, gain_cap]; a non-positive mean (all-black input) yields the
    cap.
    """
    if cfg.gain_mode == "fixed":
        gain = cfg.fixed_gain
    else:
        lum = mean_luminance(y_s)
        if lum <= 0.0:
            gain = cfg.gain_cap
        else:
            gain = min(max(cfg.target_luma / lum, 1.0), cfg.gain_cap)
    return PlanarImage(gain * y_s.data), gain


def suppress_detail(
    y_d: PlanarImage, maps: NoiseMapStack, alpha: float = 1.0
) -> PlanarImage:
    """Soft-threshold the detail layer against alpha times the mean map.

    The threshold at each pixel is alpha * mean over the stack's
    iterations, so stronger estimated noise removes more detail.
    """
    if not alpha >= 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    if (maps.channels, maps.height, maps.width) != (y_d.channels, y_d.height, y_d.width):
        raise ValueError(
            f"map stack planes are {maps.channels}x{maps.height}x{maps.width}, "
            f"detail layer is {y_d.channels}x{y_d.height}x{y_d.width}"
        )
    threshold = alpha * maps.data.mean(axis=0, dtype=np.float64)
    out = np.sign(y_d.data) * np.maximum(np.abs(y_d.data) - threshold, 0.0)
    return PlanarImage(out)


@dataclass(frozen=True)
class EnhanceResult:
    """Full pipeline output with its intermediate products."""

    output: PlanarImage
    smooth: PlanarImage
    detail: PlanarImage
    gain: float
    epsilon: GlobalNoiseVariation
    maps: NoiseMapStack
    trace: list[IterationRecord]


def enhance_with_diagnostics(
    y: PlanarImage,
    cfg: EnhanceConfig = EnhanceConfig(),
    solver_cfg: SolverConfig = SolverConfig(),
) -> EnhanceResult:
    """Estimate noise, split layers, brighten, suppress, recombine."""
    epsilon = estimate_global_noise(y)
    maps = assemble_maps(
        epsilon,
        None,
        solver_cfg.iterations,
        solver_cfg.lambda_scale,
        shape=(y.height, y.width),
    )
    smooth, trace = solve_tv(y, maps, solver_cfg)
    detail = decompose(y, smooth)
    gained, gain = luminance_gain(smooth, cfg)
    suppressed = suppress_detail(detail, maps, cfg.detail_alpha)
    output = PlanarImage(np.clip(gained.data + suppressed.data, 0.0, 1.0))
    return EnhanceResult(
        output=output,
        smooth=smooth,
        detail=detail,
        gain=gain,
        epsilon=epsilon,
        maps=maps,
        trace=trace,
    )


def enhance(
    y: PlanarImage,
    cfg: EnhanceConfig = EnhanceConfig(),
    solver_cfg: SolverConfig = SolverConfig(),
) -> PlanarImage:
    """Restored image in [0, 1]; see :func:`enhance_with_diagnostics`."""
    return enhance_with_diagnostics(y, cfg, solver_cfg).output
