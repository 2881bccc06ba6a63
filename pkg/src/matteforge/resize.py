"""Separable bilinear resampling with half-pixel centres and edge clamping.

Each axis is resampled by a sparse ``(n_out, n_in)`` weight matrix with at
most two non-zeros per row. The same matrices give the exact adjoint used
for back-propagating through an upsampling.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp


@lru_cache(maxsize=256)
def _weights(n_out: int, n_in: int) -> sp.csr_matrix:
    if n_out < 1 or n_in < 1:
        raise ValueError(f"sizes must be positive, got {n_out} <- {n_in}")
    if n_out == n_in:
        return sp.identity(n_out, format="csr", dtype=np.float64)
    src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    i0 = np.floor(src).astype(np.int64)
    i1 = np.minimum(i0 + 1, n_in - 1)
    t = src - i0
    rows = np.repeat(np.arange(n_out), 2)
    cols = np.stack([i0, i1], axis=1).ravel()
    vals = np.stack([1.0 - t, t], axis=1).ravel()
    # duplicate (row, col) entries at the clamped edge are summed by csr
    m = sp.csr_matrix((vals, (rows, cols)), shape=(n_out, n_in))
    m.sum_duplicates()
    m.eliminate_zeros()
    return m


def axis_weights(n_out: int, n_in: int) -> sp.csr_matrix:
    """Sparse bilinear interpolation matrix mapping ``n_in`` samples to ``n_out``."""
    return _weights(int(n_out), int(n_in))


def resize(img, height: int, width: int) -> np.ndarray:
    """Bilinear resize of a plane ``(H, W)`` or image ``(H, W, C)``."""
    a = np.asarray(img, dtype=np.float64)
    if a.shape[0] == height and a.shape[1] == width:
        return a.copy()
    wy = axis_weights(height, a.shape[0])
    wx = axis_weights(width, a.shape[1])
    if a.ndim == 2:
        return _apply(wy, wx, a)
    return np.stack([_apply(wy, wx, a[..., c]) for c in range(a.shape[2])], axis=2)


def _apply(wy, wx, plane: np.ndarray) -> np.ndarray:
    tmp = wy @ plane
    return np.ascontiguousarray((wx @ tmp.T).T)


def resize_adjoint(grad, in_height: int, in_width: int) -> np.ndarray:
    """Transpose of :func:`resize` applied to a plane of output gradients."""
    g = np.asarray(grad, dtype=np.float64)
    wy = axis_weights(g.shape[0], in_height)
    wx = axis_weights(g.shape[1], in_width)
    tmp = wy.T @ g
    return np.ascontiguousarray((wx.T @ tmp.T).T)
