"""Adaptive total-variation denoising and low-light image enhancement.

The package splits an image into a noise-free smooth layer and a
detail layer by unrolling an ADMM iteration for weighted anisotropic
TV minimization, where the per-pixel weights come from a blind noise
level estimate.  A classical enhancement pipeline brightens the smooth
layer and suppresses noise in the detail layer under the guidance of
the same weight maps.
"""

from .image import (
    RHO_FLOOR,
    FileFormatError,
    GlobalNoiseVariation,
    GradientField,
    NoiseMapStack,
    PlanarImage,
    SolverConfig,
    encode_map_stack,
    encode_png,
    decode_map_stack,
    image_bit_depth,
    load_image,
    load_map_stack,
    save_image,
    save_map_stack,
)
from .metrics import MetricReport, measure, psnr, ssim
from .noise import ESTIMATOR_KERNEL, assemble_maps, estimate_global_noise
from .restore import (
    REC709_LUMA,
    EnhanceConfig,
    EnhanceResult,
    decompose,
    enhance,
    enhance_with_diagnostics,
    luminance_gain,
    mean_luminance,
    suppress_detail,
)
from .solver import (
    AdmmState,
    IterationRecord,
    TransferSpectrum,
    admm_step,
    div_adjoint,
    grad,
    initial_state,
    primal_residual,
    rho_schedule,
    shrink,
    solve_tv,
    transfer_spectrum,
    tv_objective,
    x_update,
    z_update,
)

__version__ = "0.1.0"

__all__ = [
    "RHO_FLOOR",
    "FileFormatError",
    "PlanarImage",
    "GradientField",
    "NoiseMapStack",
    "GlobalNoiseVariation",
    "SolverConfig",
    "EnhanceConfig",
    "EnhanceResult",
    "MetricReport",
    "TransferSpectrum",
    "AdmmState",
    "IterationRecord",
    "ESTIMATOR_KERNEL",
    "REC709_LUMA",
    "load_image",
    "save_image",
    "encode_png",
    "image_bit_depth",
    "load_map_stack",
    "save_map_stack",
    "encode_map_stack",
    "decode_map_stack",
    "estimate_global_noise",
    "assemble_maps",
    "grad",
    "div_adjoint",
    "transfer_spectrum",
    "x_update",
    "shrink",
    "z_update",
    "initial_state",
    "admm_step",
    "rho_schedule",
    "tv_objective",
    "primal_residual",
    "solve_tv",
    "decompose",
    "mean_luminance",
    "luminance_gain",
    "suppress_detail",
    "enhance",
    "enhance_with_diagnostics",
    "psnr",
    "ssim",
    "measure",
    "__version__",
]
