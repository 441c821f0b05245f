"""Blind noise level estimation and balancing-map assembly.

A fixed Laplacian-difference stencil is almost insensitive to image
structure, so the mean absolute response over the image interior,
suitably scaled, recovers the standard deviation of additive Gaussian
noise per channel.  Those per-channel scalars seed the per-iteration
balancing maps used by the TV solver, optionally corrected by a raw
residual stack.
"""

from __future__ import annotations

import numpy as np

from .image import GlobalNoiseVariation, NoiseMapStack, PlanarImage

__all__ = ["ESTIMATOR_KERNEL", "estimate_global_noise", "assemble_maps"]

ESTIMATOR_KERNEL = np.array(
    [[1, -2, 1], [-2, 4, -2], [1, -2, 1]], dtype=np.int64
)
ESTIMATOR_KERNEL.flags.writeable = False

# E|k . noise| for i.i.d. N(0, s^2) is 6 s sqrt(2/pi); invert that.
_SCALE = float(np.sqrt(np.pi / 2.0)) / 6.0


def estimate_global_noise(img: PlanarImage) -> GlobalNoiseVariation:
    """Per-channel Gaussian noise standard deviation estimate.

    The stencil is applied at the (h-2)(w-2) interior positions only,
    with no boundary padding; the kernel is flip-symmetric so
    convolution and correlation coincide.
    """
    if img.height < 3 or img.width < 3:
        raise ValueError(
            f"image is {img.height}x{img.width}; the estimator needs at least 3x3"
        )
    p = img.data
    response = (
        p[:, :-2, :-2]
        - 2.0 * p[:, :-2, 1:-1]
        + p[:, :-2, 2:]
        - 2.0 * p[:, 1:-1, :-2]
        + 4.0 * p[:, 1:-1, 1:-1]
        - 2.0 * p[:, 1:-1, 2:]
        + p[:, 2:, :-2]
        - 2.0 * p[:, 2:, 1:-1]
        + p[:, 2:, 2:]
    )
    interior = (img.height - 2) * (img.width - 2)
    per_channel = _SCALE * np.abs(response).sum(axis=(1, 2)) / interior
    return GlobalNoiseVariation(per_channel)


def assemble_maps(
    epsilon: GlobalNoiseVariation,
    residual: NoiseMapStack | None,
    iterations: int,
    lambda_scale: float = 1.0,
    *,
    shape: tuple[int, int] | None = None,
) -> NoiseMapStack:
    """Build the activated per-iteration balancing maps.

    Each slice is residual + epsilon (residual defaults to zero), with
    non-positive entries replaced by the channel's epsilon, then scaled
    by ``lambda_scale``.  ``shape`` gives (height, width) when no
    residual carries them.
    """
    if not lambda_scale >= 0:
        raise ValueError(f"lambda_scale must be non-negative, got {lambda_scale}")
    if iterations < 1:
        raise ValueError(f"iteration count must be at least 1, got {iterations}")
    channels = epsilon.channels
    if residual is not None:
        if residual.channels != channels:
            raise ValueError(
                f"residual has {residual.channels} channels, epsilon has {channels}"
            )
        if residual.iterations not in (1, iterations):
            raise ValueError(
                f"residual stack has {residual.iterations} iterations; "
                f"expected 1 or {iterations}"
            )
        if shape is not None and shape != (residual.height, residual.width):
            raise ValueError(
                f"shape {shape} disagrees with residual "
                f"{residual.height}x{residual.width}"
            )
        r = residual.data.astype(np.float64)
        if r.shape[0] == 1 and iterations > 1:
            r = np.broadcast_to(r, (iterations,) + r.shape[1:])
    elif shape is None:
        raise ValueError("shape is required when no residual is given")
    else:
        r = np.zeros((iterations, channels) + tuple(shape), dtype=np.float64)
    eps = epsilon.per_channel.reshape(1, channels, 1, 1)
    raw = r + eps
    activated = np.where(raw > 0.0, raw, np.broadcast_to(eps, raw.shape))
    return NoiseMapStack(
        (activated * lambda_scale).astype(np.float32), activated=True
    )
