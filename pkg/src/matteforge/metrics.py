"""Matting error measures over the unknown region, and the multi-scale Charbonnier loss.

Grad and Conn follow the usual benchmark conventions (Gaussian-derivative
gradients with sigma 1.4; threshold-swept connectivity with a 0.15
tolerance). Their constants are keyword arguments because implementations
in the wild disagree on details.
"""
from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass

import numpy as np
import scipy.ndimage as ndi

from .core import UNKNOWN, DiagnosticWarning, as_plane, as_trimap, check_same_hw

CHARBONNIER_EPS = 1e-6
SAD_SCALE = 1000.0


@dataclass(frozen=True)
class MetricReport:
    sad: float
    sad_raw: float
    mse: float
    grad: float
    conn: float
    pixel_count: int

    def as_dict(self) -> dict:
        return asdict(self)


def _prep(alpha_hat, alpha, unknown):
    alpha_hat = as_plane(alpha_hat, "alpha_hat")
    alpha = as_plane(alpha, "alpha")
    unknown = np.asarray(unknown, dtype=bool)
    check_same_hw(alpha_hat, alpha, unknown, names=("alpha_hat", "alpha", "unknown"))
    if not unknown.any():
        raise ValueError("unknown region is empty")
    return alpha_hat, alpha, unknown


def avg_pool(plane, level: int) -> np.ndarray:
    """Mean over non-overlapping ``2**level`` blocks; ragged edge blocks use their own size."""
    p = as_plane(plane)
    if not 0 <= level <= 4:
        raise ValueError(f"level must be in [0, 4], got {level}")
    if level == 0:
        return p.copy()
    k = 2 ** level
    h, w = p.shape
    ys = np.arange(0, h, k)
    xs = np.arange(0, w, k)
    sums = np.add.reduceat(np.add.reduceat(p, ys, axis=0), xs, axis=1)
    cy = np.minimum(ys + k, h) - ys
    cx = np.minimum(xs + k, w) - xs
    return sums / np.outer(cy, cx)


def charbonnier_loss(alpha_hat, alpha, unknown, eps: float = CHARBONNIER_EPS) -> float:
    alpha_hat, alpha, unknown = _prep(alpha_hat, alpha, unknown)
    d = alpha_hat[unknown] - alpha[unknown]
    return float(np.mean(np.sqrt(d * d + eps * eps)))


def multiscale_loss(alpha_hat, alpha, trimap, eps: float = CHARBONNIER_EPS) -> float:
    """``sum_l 2**-l * charbonnier(pool_l(alpha_hat), pool_l(alpha))`` for l = 0..4.

    A pooled block counts as unknown when any of its pixels is unknown.
    """
    trimap = as_trimap(trimap)
    unknown = trimap == UNKNOWN
    alpha_hat, alpha, unknown = _prep(alpha_hat, alpha, unknown)
    u = unknown.astype(np.float64)
    total = 0.0
    for level in range(5):
        mask = avg_pool(u, level) > 0.0
        total += 2.0 ** (-level) * charbonnier_loss(
            avg_pool(alpha_hat, level), avg_pool(alpha, level), mask, eps
        )
    return total


def sad_raw(alpha_hat, alpha, unknown) -> float:
    alpha_hat, alpha, unknown = _prep(alpha_hat, alpha, unknown)
    return float(np.sum(np.abs(alpha_hat[unknown] - alpha[unknown])))


def sad(alpha_hat, alpha, unknown) -> float:
    """Sum of absolute differences over the unknown region, divided by 1000."""
    return sad_raw(alpha_hat, alpha, unknown) / SAD_SCALE


def mse(alpha_hat, alpha, unknown) -> float:
    alpha_hat, alpha, unknown = _prep(alpha_hat, alpha, unknown)
    d = alpha_hat[unknown] - alpha[unknown]
    return float(np.sum(d * d) / d.size)


def gaussian_derivative_kernel(sigma: float = 1.4, epsilon: float = 1e-2) -> np.ndarray:
    """2-D x-derivative-of-Gaussian kernel, unit L2 norm (benchmark construction)."""
    half = int(np.ceil(sigma * np.sqrt(-2.0 * np.log(np.sqrt(2.0 * np.pi) * sigma * epsilon))))
    u = np.arange(-half, half + 1, dtype=np.float64)
    g = np.exp(-(u**2) / (2.0 * sigma**2)) / (sigma * np.sqrt(2.0 * np.pi))
    dg = -u * g / sigma**2
    hx = np.outer(g, dg)
    return hx / np.sqrt(np.sum(hx * hx))


def gaussian_gradient(plane, sigma: float = 1.4) -> tuple[np.ndarray, np.ndarray]:
    hx = gaussian_derivative_kernel(sigma)
    p = as_plane(plane)
    gx = ndi.convolve(p, hx, mode="nearest")
    gy = ndi.convolve(p, hx.T, mode="nearest")
    return gx, gy


def grad_error(alpha_hat, alpha, unknown, sigma: float = 1.4, q: float = 2.0) -> float:
    """Gradient error: ``sum_unknown | |grad alpha_hat| - |grad alpha| |**q / 1000``."""
    alpha_hat, alpha, unknown = _prep(alpha_hat, alpha, unknown)
    px, py = gaussian_gradient(alpha_hat, sigma)
    gx, gy = gaussian_gradient(alpha, sigma)
    diff = np.abs(np.sqrt(px * px + py * py) - np.sqrt(gx * gx + gy * gy))
    return float(np.sum(diff[unknown] ** q)) / SAD_SCALE


def _largest_component(mask: np.ndarray) -> np.ndarray:
    labels, n = ndi.label(mask)  # 4-connectivity
    if n == 0:
        return np.zeros_like(mask)
    counts = np.bincount(labels.ravel())
    counts[0] = 0
    return labels == int(np.argmax(counts))


def connectivity_levels(alpha_hat, alpha, step: float = 0.1) -> np.ndarray:
    """Per-pixel level ``l``: the last threshold at which the pixel stays in the shared source.

    Pixels never disconnected over the sweep get 1.
    """
    n = int(round(1.0 / step))
    thresholds = [round(k * step, 12) for k in range(n)]  # 0, step, ..., 1 - step
    l_map = np.full(alpha.shape, -1.0)
    for k in range(1, n):
        th = thresholds[k]
        omega = _largest_component((alpha_hat >= th) & (alpha >= th))
        flag = (l_map == -1.0) & ~omega
        l_map[flag] = thresholds[k - 1]
    l_map[l_map == -1.0] = 1.0
    return l_map


def conn_error(alpha_hat, alpha, unknown, step: float = 0.1, tolerance: float = 0.15) -> float:
    """Connectivity error over the unknown region, divided by 1000.

    Returns 0 with a :class:`DiagnosticWarning` when prediction and truth share
    no pixel at the first threshold.
    """
    alpha_hat, alpha, unknown = _prep(alpha_hat, alpha, unknown)
    if not np.any((alpha_hat >= step) & (alpha >= step)):
        warnings.warn("no shared connected source at any threshold", DiagnosticWarning)
        return 0.0
    l_map = connectivity_levels(alpha_hat, alpha, step)
    d_hat = alpha_hat - l_map
    d = alpha - l_map
    phi_hat = 1.0 - d_hat * (d_hat >= tolerance)
    phi = 1.0 - d * (d >= tolerance)
    return float(np.sum(np.abs(phi_hat - phi)[unknown])) / SAD_SCALE


def evaluate(alpha_hat, alpha, trimap) -> MetricReport:
    """All four metrics over ``trimap == UNKNOWN``."""
    unknown = as_trimap(trimap) == UNKNOWN
    raw = sad_raw(alpha_hat, alpha, unknown)
    return MetricReport(
        sad=raw / SAD_SCALE,
        sad_raw=raw,
        mse=mse(alpha_hat, alpha, unknown),
        grad=grad_error(alpha_hat, alpha, unknown),
        conn=conn_error(alpha_hat, alpha, unknown),
        pixel_count=int(unknown.sum()),
    )
