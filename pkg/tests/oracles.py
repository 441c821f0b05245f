"""Independent reference implementations the tests check the package against.

Everything here is deliberately written without reusing package
internals: dense matrices are built by explicit index loops, finite
differences use concatenation instead of np.roll, and convolution goes
through scipy.
"""

from __future__ import annotations

import numpy as np
from scipy.signal import convolve2d

LAPLACIAN_STENCIL = np.array([[1, -2, 1], [-2, 4, -2], [1, -2, 1]], dtype=np.float64)


def dense_difference_matrices(height: int, width: int) -> tuple[np.ndarray, np.ndarray]:
    """Materialized circular forward-difference operators on flattened images."""
    n = height * width
    dx = np.zeros((n, n))
    dy = np.zeros((n, n))
    for i in range(height):
        for j in range(width):
            r = i * width + j
            dx[r, i * width + (j + 1) % width] += 1.0
            dx[r, r] -= 1.0
            dy[r, ((i + 1) % height) * width + j] += 1.0
            dy[r, r] -= 1.0
    return dx, dy


def dense_x_solve(
    y: np.ndarray,
    u_h: np.ndarray,
    u_v: np.ndarray,
    z_h: np.ndarray,
    z_v: np.ndarray,
    rho: float,
) -> np.ndarray:
    """Direct solve of (I + rho D^T D) x = y + rho D^T u - D^T z, one plane."""
    height, width = y.shape
    dx, dy = dense_difference_matrices(height, width)
    a = np.eye(height * width) + rho * (dx.T @ dx + dy.T @ dy)
    rhs = (
        y.ravel()
        + rho * (dx.T @ u_h.ravel() + dy.T @ u_v.ravel())
        - (dx.T @ z_h.ravel() + dy.T @ z_v.ravel())
    )
    return np.linalg.solve(a, rhs).reshape(height, width)


def ref_forward_diff(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Circular forward differences via concatenation."""
    dh = np.concatenate([a[..., 1:], a[..., :1]], axis=-1) - a
    dv = np.concatenate([a[..., 1:, :], a[..., :1, :]], axis=-2) - a
    return dh, dv


def ref_adjoint_diff(dh: np.ndarray, dv: np.ndarray) -> np.ndarray:
    """Adjoint of ref_forward_diff via concatenation."""
    ah = np.concatenate([dh[..., -1:], dh[..., :-1]], axis=-1) - dh
    av = np.concatenate([dv[..., -1:, :], dv[..., :-1, :]], axis=-2) - dv
    return ah + av


def ref_objective(x: np.ndarray, y: np.ndarray, m: np.ndarray) -> float:
    """0.5 ||x - y||^2 + sum m |Dx| over both difference components."""
    dh, dv = ref_forward_diff(x)
    return float(
        0.5 * np.sum((x - y) ** 2) + np.sum(m * np.abs(dh)) + np.sum(m * np.abs(dv))
    )


def subgradient_reference(
    y: np.ndarray, m: np.ndarray, steps: int = 5000, step_scale: float = 0.5
) -> float:
    """Best objective of a diminishing-step subgradient descent from y."""
    x = y.copy()
    best = ref_objective(x, y, m)
    for t in range(1, steps + 1):
        dh, dv = ref_forward_diff(x)
        g = (x - y) + ref_adjoint_diff(m * np.sign(dh), m * np.sign(dv))
        x = x - (step_scale / np.sqrt(t)) * g
        best = min(best, ref_objective(x, y, m))
    return best


def grid_prox_l1(v: float, m: float, rho: float, lo: float = -2.0, hi: float = 2.0,
                 step: float = 1e-4) -> float:
    """Grid-search minimizer of (rho/2)(x - v)^2 + m |x|."""
    grid = np.arange(lo, hi + step, step)
    values = 0.5 * rho * (grid - v) ** 2 + m * np.abs(grid)
    return float(grid[np.argmin(values)])


def conv_noise_estimate(plane: np.ndarray) -> float:
    """Interior-only stencil estimate via scipy's 2-D convolution."""
    h, w = plane.shape
    response = convolve2d(plane, LAPLACIAN_STENCIL, mode="valid")
    return float(
        np.sqrt(np.pi / 2.0) * np.abs(response).sum() / (6.0 * (h - 2) * (w - 2))
    )


def checkerboard(height: int, width: int, values: tuple[float, float] = (1.0, -1.0)) -> np.ndarray:
    i, j = np.indices((height, width))
    return np.where((i + j) % 2 == 0, values[0], values[1]).astype(np.float64)
