"""Command-line front end: estimate, denoise, enhance, metrics.

Exit status is 0 on success, 1 for usage errors (bad flags or flag
values, caught before any computation), and 2 for runtime failures
(unreadable files, shape mismatches).  No output file is written on a
nonzero exit: every product is rendered in memory and the files are
committed together at the end.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .image import (
    NoiseMapStack,
    PlanarImage,
    SolverConfig,
    encode_map_stack,
    encode_png,
    image_bit_depth,
    load_image,
    load_map_stack,
)
from .metrics import psnr, ssim
from .noise import assemble_maps, estimate_global_noise
from .restore import EnhanceConfig, decompose, luminance_gain, suppress_detail
from .solver import IterationRecord, rho_schedule, solve_tv

__all__ = ["main"]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

_DETAIL_OFFSET = 0.5  # detail layers are signed; PNG emission recenters them


class UsageError(Exception):
    """Bad flags or flag values; reported before any computation."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on its own; route through UsageError instead
    def error(self, message):
        raise UsageError(message)


class _OutputSet:
    """Collects rendered outputs and writes them only when all succeed."""

    def __init__(self) -> None:
        self._items: list[tuple[Path, bytes]] = []

    def add(self, path: str | Path, payload: bytes) -> None:
        self._items.append((Path(path), payload))

    def commit(self) -> None:
        staged: list[tuple[Path, Path]] = []
        try:
            for final, payload in self._items:
                tmp = final.with_name(f".{final.name}.{os.getpid()}.part")
                tmp.write_bytes(payload)
                staged.append((tmp, final))
            for tmp, final in staged:
                os.replace(tmp, final)
        except BaseException:
            for tmp, _ in staged:
                tmp.unlink(missing_ok=True)
            raise


def _trace_csv(trace: list[IterationRecord]) -> bytes:
    lines = ["k,objective,primal_residual"]
    for rec in trace:
        lines.append(f"{rec.iteration},{rec.objective!r},{rec.primal_residual!r}")
    return ("\n".join(lines) + "\n").encode("ascii")


def _epsilon_line(values: np.ndarray) -> str:
    if values.shape[0] == 3:
        return "epsilon r={:.6f} g={:.6f} b={:.6f}".format(*values)
    return f"epsilon gray={values[0]:.6f}"


def _resolve_maps(img: PlanarImage, map_path: str | None, cfg: SolverConfig) -> NoiseMapStack:
    """Maps for the solve: loaded from file, or estimated from the image.

    A loaded activated stack is used directly, scaled by lambda_scale.
    A raw residual stack is combined with the estimated noise level
    first.  Without a file the maps are spatially constant per channel.
    """
    if map_path is None:
        epsilon = estimate_global_noise(img)
        return assemble_maps(
            epsilon,
            None,
            cfg.iterations,
            cfg.lambda_scale,
            shape=(img.height, img.width),
        )
    stack = load_map_stack(map_path)
    if (stack.channels, stack.height, stack.width) != (
        img.channels,
        img.height,
        img.width,
    ):
        raise ValueError(
            f"map stack planes are {stack.channels}x{stack.height}x{stack.width}, "
            f"image is {img.channels}x{img.height}x{img.width}"
        )
    if stack.iterations not in (1, cfg.iterations):
        raise ValueError(
            f"map stack has {stack.iterations} iterations; expected 1 or {cfg.iterations}"
        )
    if stack.activated:
        return NoiseMapStack(
            stack.data * np.float32(cfg.lambda_scale), activated=True
        )
    epsilon = estimate_global_noise(img)
    return assemble_maps(epsilon, stack, cfg.iterations, cfg.lambda_scale)


def _solver_config(args: argparse.Namespace) -> SolverConfig:
    return SolverConfig(
        iterations=args.iters,
        rho=rho_schedule(args.rho, args.iters, args.rho_mode, args.rho_factor),
        lambda_scale=args.lambda_scale,
    )


def _enhance_config(args: argparse.Namespace) -> EnhanceConfig:
    if args.gain == "auto":
        mode, fixed = "auto", 1.0
    else:
        try:
            fixed = float(args.gain)
        except ValueError:
            raise UsageError(f"--gain must be 'auto' or a number, got {args.gain!r}")
        mode = "fixed"
    return EnhanceConfig(
        gain_mode=mode,
        fixed_gain=fixed,
        target_luma=args.target_luma,
        gain_cap=args.gain_cap,
        detail_alpha=args.detail_alpha,
    )


def _bit_depth_for(args: argparse.Namespace, input_path: str) -> int:
    return args.bit_depth if args.bit_depth else image_bit_depth(input_path)


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--iters", type=int, default=8, metavar="K",
                   help="number of unrolled iterations (default 8)")
    p.add_argument("--rho", type=float, default=2.0, metavar="R",
                   help="penalty parameter seed (default 2)")
    p.add_argument("--rho-mode", choices=("constant", "geometric"), default="constant",
                   help="penalty schedule across iterations (default constant)")
    p.add_argument("--rho-factor", type=float, default=1.0, metavar="F",
                   help="per-iteration growth factor for the geometric schedule")
    p.add_argument("--lambda-scale", type=float, default=1.0, metavar="S",
                   help="global multiplier on the balancing maps (default 1)")


def _add_emission_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--map", metavar="PATH",
                   help="UTVM map stack to use instead of estimating one")
    p.add_argument("--bit-depth", type=int, choices=(8, 16), default=None,
                   help="output PNG bit depth (default: match the input)")
    p.add_argument("--emit-smooth", metavar="PATH", help="also write the smooth layer PNG")
    p.add_argument("--emit-detail", metavar="PATH",
                   help=f"write the detail layer PNG, offset-encoded as {_DETAIL_OFFSET} + detail")
    p.add_argument("--emit-map", metavar="PATH", help="write the balancing maps as a UTVM file")
    p.add_argument("--trace", metavar="PATH",
                   help="write per-iteration diagnostics CSV (k,objective,primal_residual)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="tvenhance",
        description="Adaptive TV denoising and low-light enhancement.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_est = sub.add_parser("estimate",
                           help="print per-channel noise level estimates")
    p_est.add_argument("input")
    p_est.add_argument("--out", metavar="PATH",
                       help="write the assembled balancing maps as a UTVM file")
    p_est.add_argument("--iters", type=int, default=8, metavar="K")
    p_est.add_argument("--lambda-scale", type=float, default=1.0, metavar="S")

    p_den = sub.add_parser("denoise",
                           help="write the TV smooth layer of an image")
    p_den.add_argument("input")
    p_den.add_argument("--out", required=True, metavar="PATH")
    _add_solver_flags(p_den)
    _add_emission_flags(p_den)

    p_enh = sub.add_parser("enhance",
                           help="denoise, brighten, and restore detail")
    p_enh.add_argument("input")
    p_enh.add_argument("--out", required=True, metavar="PATH")
    p_enh.add_argument("--gain", default="auto", metavar="auto|G",
                       help="scalar gain on the smooth layer, or 'auto' (default)")
    p_enh.add_argument("--target-luma", type=float, default=0.4, metavar="T",
                       help="auto mode mean-luminance target (default 0.4)")
    p_enh.add_argument("--gain-cap", type=float, default=32.0, metavar="G",
                       help="upper bound on the auto gain (default 32)")
    p_enh.add_argument("--detail-alpha", type=float, default=1.0, metavar="A",
                       help="detail suppression strength (default 1)")
    _add_solver_flags(p_enh)
    _add_emission_flags(p_enh)

    p_met = sub.add_parser("metrics",
                           help="print psnr and ssim between two images")
    p_met.add_argument("a")
    p_met.add_argument("b")
    return parser


def _cmd_estimate(args: argparse.Namespace) -> int:
    img = load_image(args.input)
    epsilon = estimate_global_noise(img)
    if args.out:
        maps = assemble_maps(
            epsilon,
            None,
            args.iters,
            args.lambda_scale,
            shape=(img.height, img.width),
        )
        outputs = _OutputSet()
        outputs.add(args.out, encode_map_stack(maps))
        outputs.commit()
    print(_epsilon_line(epsilon.per_channel))
    return EXIT_OK


def _denoise_products(args: argparse.Namespace, cfg: SolverConfig) -> _OutputSet:
    img = load_image(args.input)
    depth = _bit_depth_for(args, args.input)
    maps = _resolve_maps(img, args.map, cfg)
    smooth, trace = solve_tv(img, maps, cfg)
    outputs = _OutputSet()
    outputs.add(args.out, encode_png(smooth, depth))
    if args.emit_smooth:
        outputs.add(args.emit_smooth, encode_png(smooth, depth))
    if args.emit_detail:
        detail = decompose(img, smooth)
        outputs.add(
            args.emit_detail,
            encode_png(PlanarImage(_DETAIL_OFFSET + detail.data), depth),
        )
    if args.emit_map:
        outputs.add(args.emit_map, encode_map_stack(maps))
    if args.trace:
        outputs.add(args.trace, _trace_csv(trace))
    return outputs


def _cmd_denoise(args: argparse.Namespace, cfg: SolverConfig) -> int:
    _denoise_products(args, cfg).commit()
    return EXIT_OK


def _cmd_enhance(args: argparse.Namespace, cfg: SolverConfig, ecfg: EnhanceConfig) -> int:
    img = load_image(args.input)
    depth = _bit_depth_for(args, args.input)
    maps = _resolve_maps(img, args.map, cfg)
    smooth, trace = solve_tv(img, maps, cfg)
    detail = decompose(img, smooth)
    gained, gain = luminance_gain(smooth, ecfg)
    suppressed = suppress_detail(detail, maps, ecfg.detail_alpha)
    output = PlanarImage(np.clip(gained.data + suppressed.data, 0.0, 1.0))
    outputs = _OutputSet()
    outputs.add(args.out, encode_png(output, depth))
    if args.emit_smooth:
        outputs.add(args.emit_smooth, encode_png(smooth, depth))
    if args.emit_detail:
        outputs.add(
            args.emit_detail,
            encode_png(PlanarImage(_DETAIL_OFFSET + detail.data), depth),
        )
    if args.emit_map:
        outputs.add(args.emit_map, encode_map_stack(maps))
    if args.trace:
        outputs.add(args.trace, _trace_csv(trace))
    outputs.commit()
    print(f"gain={gain}")
    return EXIT_OK


def _cmd_metrics(args: argparse.Namespace) -> int:
    a = load_image(args.a)
    b = load_image(args.b)
    print(f"psnr={psnr(a, b):.4f} ssim={ssim(a, b):.4f}")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"tvenhance: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    # flag validation happens before any file is touched
    try:
        cfg = None
        ecfg = None
        if args.command in ("denoise", "enhance"):
            cfg = _solver_config(args)
        if args.command == "enhance":
            ecfg = _enhance_config(args)
        if args.command == "estimate":
            if args.iters < 1:
                raise UsageError(f"--iters must be at least 1, got {args.iters}")
            if args.lambda_scale < 0:
                raise UsageError(f"--lambda-scale must be non-negative, got {args.lambda_scale}")
    except (UsageError, ValueError) as exc:
        print(f"tvenhance: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.command == "estimate":
            return _cmd_estimate(args)
        if args.command == "denoise":
            return _cmd_denoise(args, cfg)
        if args.command == "enhance":
            return _cmd_enhance(args, cfg, ecfg)
        return _cmd_metrics(args)
    except (ValueError, OSError, ArithmeticError) as exc:
        print(f"tvenhance: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
