"""Core containers and file I/O for images and balancing-map stacks.

Images are stacks of per-channel planes in (channels, height, width)
layout, held as float64 and treated as immutable.  Map stacks add a
leading iteration axis and are stored in float32, matching their
on-disk representation so that save/load round-trips are bit-exact.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

__all__ = [
    "RHO_FLOOR",
    "FileFormatError",
    "PlanarImage",
    "GradientField",
    "NoiseMapStack",
    "GlobalNoiseVariation",
    "SolverConfig",
    "load_image",
    "save_image",
    "encode_png",
    "image_bit_depth",
    "load_map_stack",
    "save_map_stack",
    "encode_map_stack",
    "decode_map_stack",
]

# Lower bound on the ADMM penalty, guarding the divisions by rho.
RHO_FLOOR = 1e-6

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
_MAP_MAGIC = b"UTVM"
_MAP_VERSION = 1
_MAP_FLAG_ACTIVATED = 0x1
_MAP_HEADER = struct.Struct("<4sIIIIII")


class FileFormatError(ValueError):
    """Unreadable, malformed, or unsupported image / map file."""


def _frozen(arr: np.ndarray) -> np.ndarray:
    view = arr.view()
    view.flags.writeable = False
    return view


@dataclass(frozen=True, eq=False)
class PlanarImage:
    """Multi-channel intensity image, shape (channels, height, width).

    File loaders produce values in [0, 1]; solver intermediates may
    leave that range and are only clamped when encoded back to disk.
    """

    data: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise ValueError(f"expected (channels, height, width), got shape {arr.shape}")
        if arr.shape[0] not in (1, 3):
            raise ValueError(f"channel count must be 1 or 3, got {arr.shape[0]}")
        if arr.shape[1] < 1 or arr.shape[2] < 1:
            raise ValueError(f"image dimensions must be positive, got {arr.shape[1:]}")
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True, eq=False)
class GradientField:
    """Horizontal and vertical forward-difference planes per channel."""

    horizontal: np.ndarray
    vertical: np.ndarray

    def __post_init__(self) -> None:
        h = np.asarray(self.horizontal, dtype=np.float64)
        v = np.asarray(self.vertical, dtype=np.float64)
        if h.ndim != 3 or v.ndim != 3:
            raise ValueError("gradient components must be (channels, height, width)")
        if h.shape != v.shape:
            raise ValueError(f"component shapes differ: {h.shape} vs {v.shape}")
        if h.shape[0] not in (1, 3):
            raise ValueError(f"channel count must be 1 or 3, got {h.shape[0]}")
        object.__setattr__(self, "horizontal", _frozen(h))
        object.__setattr__(self, "vertical", _frozen(v))

    @property
    def channels(self) -> int:
        return self.horizontal.shape[0]

    @property
    def height(self) -> int:
        return self.horizontal.shape[1]

    @property
    def width(self) -> int:
        return self.horizontal.shape[2]


@dataclass(frozen=True, eq=False)
class NoiseMapStack:
    """Per-iteration, per-channel balancing maps, shape (K, channels, h, w).

    ``activated`` marks a stack that went through the positivity
    activation (all entries >= 0, ready for the solver); otherwise the
    stack holds raw residual corrections that may be negative.  Data is
    float32, the storage precision of the UTVM file format.
    """

    data: np.ndarray
    activated: bool = True

    def __post_init__(self) -> None:
        arr = np.asarray(self.data, dtype=np.float32)
        if arr.ndim != 4:
            raise ValueError(f"expected (iterations, channels, height, width), got {arr.shape}")
        if arr.shape[0] < 1:
            raise ValueError("iteration count must be at least 1")
        if arr.shape[1] not in (1, 3):
            raise ValueError(f"channel count must be 1 or 3, got {arr.shape[1]}")
        if arr.shape[2] < 1 or arr.shape[3] < 1:
            raise ValueError(f"map dimensions must be positive, got {arr.shape[2:]}")
        if self.activated and not np.all(arr >= 0):
            raise ValueError("activated map stack contains negative entries")
        object.__setattr__(self, "data", _frozen(arr))

    @property
    def iterations(self) -> int:
        return self.data.shape[0]

    @property
    def channels(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[2]

    @property
    def width(self) -> int:
        return self.data.shape[3]

    def iteration_plane(self, k: int) -> np.ndarray:
        """Map for solver iteration ``k`` (0-based), upcast to float64.

        A single-iteration stack broadcasts to every k.
        """
        idx = k if self.iterations > 1 else 0
        return self.data[idx].astype(np.float64)


@dataclass(frozen=True, eq=False)
class GlobalNoiseVariation:
    """Per-channel scalar noise level estimates, each >= 0."""

    per_channel: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.per_channel, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] not in (1, 3):
            raise ValueError(f"expected 1 or 3 per-channel values, got shape {arr.shape}")
        if not np.all(arr >= 0):
            raise ValueError("noise variation estimates must be non-negative")
        object.__setattr__(self, "per_channel", _frozen(arr))

    @property
    def channels(self) -> int:
        return self.per_channel.shape[0]


@dataclass(frozen=True)
class SolverConfig:
    """Settings for the unrolled TV solver.

    ``rho`` holds one penalty value per iteration.  ``lambda_scale`` is
    a global multiplier on the balancing maps; it is consumed where
    maps are assembled (enhancement pipeline and CLI), while
    :func:`tvenhance.solver.solve_tv` applies map slices as given.
    ``keep_iterates`` retains each iterate image in the solve trace.
    """

    iterations: int = 8
    rho: tuple[float, ...] = (2.0,) * 8
    lambda_scale: float = 1.0
    keep_iterates: bool = False

    def __post_init__(self) -> None:
        if self.iterations < 1:
            raise ValueError(f"iteration count must be at least 1, got {self.iterations}")
        if len(self.rho) != self.iterations:
            raise ValueError(
                f"need one rho per iteration: got {len(self.rho)} values for "
                f"{self.iterations} iterations"
            )
        for k, r in enumerate(self.rho):
            if not (r > 0) or r < RHO_FLOOR:
                raise ValueError(f"rho[{k}]={r} violates the {RHO_FLOOR} floor")
        if not (self.lambda_scale >= 0) or not np.isfinite(self.lambda_scale):
            raise ValueError(f"lambda_scale must be non-negative, got {self.lambda_scale}")


# --- image files ---------------------------------------------------------


def load_image(path: str | Path) -> PlanarImage:
    """Load an 8- or 16-bit PNG or binary PPM/PGM as unit-interval planes.

    Values are divided by the format's maximum (255, 65535, or the PPM
    header maxval).  Images smaller than 3x3 are rejected.
    """
    raw = Path(path).read_bytes()
    if raw.startswith(_PNG_SIGNATURE):
        img = _decode_png(raw, str(path))
    elif raw[:2] in (b"P5", b"P6"):
        img = _decode_pnm(raw, str(path))
    else:
        raise FileFormatError(f"unsupported image format: {path}")
    if img.height < 3 or img.width < 3:
        raise FileFormatError(
            f"image {path} is {img.height}x{img.width}; at least 3x3 required"
        )
    return img


def _planes_from_decoded(arr: np.ndarray, scale: float, path: str) -> PlanarImage:
    if arr.ndim == 2:
        planes = arr[np.newaxis, :, :]
    elif arr.ndim == 3 and arr.shape[2] == 3:
        planes = arr[:, :, ::-1].transpose(2, 0, 1)  # BGR file order to RGB
    else:
        raise FileFormatError(f"unsupported channel layout {arr.shape} in {path}")
    return PlanarImage(planes.astype(np.float64) / scale)


def _decode_png(raw: bytes, path: str) -> PlanarImage:
    arr = cv2.imdecode(np.frombuffer(raw, np.uint8), cv2.IMREAD_UNCHANGED)
    if arr is None:
        raise FileFormatError(f"could not decode PNG: {path}")
    if arr.dtype == np.uint8:
        scale = 255.0
    elif arr.dtype == np.uint16:
        scale = 65535.0
    else:
        raise FileFormatError(f"unsupported PNG bit depth ({arr.dtype}) in {path}")
    return _planes_from_decoded(arr, scale, path)


def _decode_pnm(raw: bytes, path: str) -> PlanarImage:
    magic = raw[:2]
    width, height, maxval, pos = _pnm_header_fields(raw, path)
    if not (1 <= maxval <= 65535):
        raise FileFormatError(f"PNM maxval {maxval} out of range in {path}")
    channels = 3 if magic == b"P6" else 1
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
    count = width * height * channels
    body = raw[pos : pos + count * dtype.itemsize]
    if len(body) != count * dtype.itemsize:
        raise FileFormatError(f"truncated PNM raster in {path}")
    samples = np.frombuffer(body, dtype=dtype).astype(np.float64) / maxval
    if channels == 3:
        planes = samples.reshape(height, width, 3).transpose(2, 0, 1)
    else:
        planes = samples.reshape(1, height, width)
    return PlanarImage(planes)


def _quantize(img: PlanarImage, bit_depth: int) -> np.ndarray:
    if bit_depth not in (8, 16):
        raise ValueError(f"bit depth must be 8 or 16, got {bit_depth}")
    peak = 255.0 if bit_depth == 8 else 65535.0
    # floor(x + 0.5) rounds halves away from zero for the clamped x >= 0
    q = np.floor(np.clip(img.data, 0.0, 1.0) * peak + 0.5)
    return q.astype(np.uint8 if bit_depth == 8 else np.uint16)


def encode_png(img: PlanarImage, bit_depth: int = 8) -> bytes:
    """Clamp to [0, 1], quantize, and encode as PNG bytes."""
    q = _quantize(img, bit_depth)
    if img.channels == 3:
        pixels = q.transpose(1, 2, 0)[:, :, ::-1]  # RGB planes to BGR file order
    else:
        pixels = q[0]
    ok, buf = cv2.imencode(".png", np.ascontiguousarray(pixels))
    if not ok:
        raise FileFormatError("PNG encoding failed")
    return buf.tobytes()


def save_image(img: PlanarImage, path: str | Path, bit_depth: int = 8) -> None:
    """Write ``img`` as a PNG at the given bit depth."""
    Path(path).write_bytes(encode_png(img, bit_depth))


def image_bit_depth(path: str | Path) -> int:
    """Bits per sample of an image file (8 or 16), read from its header."""
    raw = Path(path).read_bytes()
    if raw.startswith(_PNG_SIGNATURE):
        if len(raw) < 25:
            raise FileFormatError(f"truncated PNG header in {path}")
        return 16 if raw[24] == 16 else 8
    if raw[:2] in (b"P5", b"P6"):
        return 16 if _pnm_header_fields(raw, str(path))[2] > 255 else 8
    raise FileFormatError(f"unsupported image format: {path}")


def _pnm_header_fields(raw: bytes, path: str) -> tuple[int, int, int, int]:
    """(width, height, maxval, raster offset) from a binary PNM header."""
    pos = 2
    fields: list[int] = []
    while len(fields) < 3:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and not raw[pos : pos + 1].isspace():
            pos += 1
        token = raw[start:pos]
        if not token.isdigit():
            raise FileFormatError(f"malformed PNM header in {path}")
        fields.append(int(token))
    # exactly one whitespace byte separates the header from the raster
    return fields[0], fields[1], fields[2], pos + 1


# --- UTVM map stack files -------------------------------------------------


def encode_map_stack(stack: NoiseMapStack) -> bytes:
    """Serialize a map stack to the UTVM binary layout (little-endian)."""
    flags = _MAP_FLAG_ACTIVATED if stack.activated else 0
    header = _MAP_HEADER.pack(
        _MAP_MAGIC,
        _MAP_VERSION,
        flags,
        stack.iterations,
        stack.channels,
        stack.height,
        stack.width,
    )
    return header + stack.data.astype("<f4").tobytes()


def decode_map_stack(raw: bytes, source: str = "<bytes>") -> NoiseMapStack:
    if len(raw) < _MAP_HEADER.size:
        raise FileFormatError(f"map file {source} shorter than its header")
    magic, version, flags, iters, channels, height, width = _MAP_HEADER.unpack_from(raw)
    if magic != _MAP_MAGIC:
        raise FileFormatError(f"bad magic {magic!r} in map file {source}")
    if version != _MAP_VERSION:
        raise FileFormatError(f"unsupported map format version {version} in {source}")
    count = iters * channels * height * width
    expected = _MAP_HEADER.size + 4 * count
    if len(raw) != expected:
        raise FileFormatError(
            f"map file {source} holds {len(raw)} bytes, expected {expected} "
            f"for a {iters}x{channels}x{height}x{width} stack"
        )
    data = np.frombuffer(raw, dtype="<f4", offset=_MAP_HEADER.size)
    data = data.reshape(iters, channels, height, width).astype(np.float32)
    activated = bool(flags & _MAP_FLAG_ACTIVATED)
    try:
        return NoiseMapStack(data, activated=activated)
    except ValueError as exc:
        raise FileFormatError(f"invalid map stack in {source}: {exc}") from exc


def load_map_stack(path: str | Path) -> NoiseMapStack:
    """Read a UTVM map stack file."""
    return decode_map_stack(Path(path).read_bytes(), str(path))


def save_map_stack(stack: NoiseMapStack, path: str | Path) -> None:
    """Write a UTVM map stack file; load_map_stack inverts it bit-exactly."""
    Path(path).write_bytes(encode_map_stack(stack))
