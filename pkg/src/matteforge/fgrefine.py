"""Foreground re-estimation: make F smooth where alpha is small.

The cost

    C(Fh, F) = 1/2 sum_i sum_c  a_i^2 (Fh_i - F_i)^2
                              + kappa (1 - a_i)^2 sum_{j ~ i} (Fh_i - Fh_j)^2

is quadratic in ``Fh``. Its stationarity condition gives a Jacobi fixed
point which is iterated at full resolution (:func:`simple_refine`) or
coarse-to-fine (:func:`multiscale_refine`). Neighbour sums run over in-grid
pixels only, so the ``4`` of an interior pixel becomes the actual neighbour
count at the image border.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph
import scipy.sparse.linalg as spla

from . import _backend
from .core import ConfigError, as_color, as_plane, check_same_hw
from .resize import resize


class RankDeficientError(np.linalg.LinAlgError):
    """The stationarity system is singular (a component has zero opacity everywhere)."""

    def __init__(self, components):
        self.components = components
        super().__init__(
            f"{len(components)} connected component(s) have alpha == 0 everywhere; "
            "pin one pixel per component"
        )


@dataclass(frozen=True)
class RefineConfig:
    kappa: float = 1.0
    scales: int = 6
    iters: int = 20

    def __post_init__(self):
        if not self.kappa > 0:
            raise ConfigError(f"kappa must be positive, got {self.kappa}")
        if self.scales < 1:
            raise ConfigError(f"scales must be >= 1, got {self.scales}")
        if self.iters < 1:
            raise ConfigError(f"iters must be >= 1, got {self.iters}")


def _check(fhat, itilde, alpha):
    fhat = as_color(fhat, "fhat")
    itilde = as_color(itilde, "itilde")
    alpha = as_plane(alpha, "alpha")
    check_same_hw(fhat, itilde, alpha, names=("fhat", "itilde", "alpha"))
    return fhat, itilde, alpha


def coupling_weights(alpha, kappa: float) -> tuple[np.ndarray, np.ndarray]:
    """Neighbour couplings ``kappa*((1-a_i)^2 + (1-a_j)^2)`` and the diagonal.

    Returns ``(weights, den)`` where ``weights`` has shape (4, H, W) in
    up/down/left/right order, zero for off-grid neighbours, and
    ``den = a^2 + sum(weights)`` accumulated in that same order.
    """
    a = as_plane(alpha, "alpha")
    q = (1.0 - a) ** 2
    w = np.zeros((4,) + a.shape)
    w[0, 1:, :] = kappa * (q[1:, :] + q[:-1, :])
    w[1, :-1, :] = kappa * (q[:-1, :] + q[1:, :])
    w[2, :, 1:] = kappa * (q[:, 1:] + q[:, :-1])
    w[3, :, :-1] = kappa * (q[:, :-1] + q[:, 1:])
    den = a * a
    for k in range(4):
        den = den + w[k]
    return w, den


def fg_cost(fhat, fg, alpha, kappa: float) -> float:
    """Value of the re-estimation cost for a candidate foreground ``fhat``."""
    fhat, fg, alpha = _check(fhat, fg, alpha)
    if not kappa > 0:
        raise ConfigError("kappa must be positive")
    a = alpha[..., None]
    data = np.sum(a * a * (fhat - fg) ** 2)
    q = ((1.0 - alpha) ** 2)[..., None]
    dv = (fhat[1:] - fhat[:-1]) ** 2
    dh = (fhat[:, 1:] - fhat[:, :-1]) ** 2
    # each unordered pair is counted once from each side, weighted by its own pixel
    smooth = np.sum((q[1:] + q[:-1]) * dv) + np.sum((q[:, 1:] + q[:, :-1]) * dh)
    return 0.5 * float(data + kappa * smooth)


def fg_cost_gradient(fhat, fg, alpha, kappa: float) -> np.ndarray:
    """Partial derivatives of :func:`fg_cost` with respect to every ``fhat`` entry."""
    fhat, fg, alpha = _check(fhat, fg, alpha)
    w, den = coupling_weights(alpha, kappa)
    a = alpha[..., None]
    g = den[..., None] * fhat - a * a * fg
    g[1:] -= w[0, 1:, :, None] * fhat[:-1]
    g[:-1] -= w[1, :-1, :, None] * fhat[1:]
    g[:, 1:] -= w[2, :, 1:, None] * fhat[:, :-1]
    g[:, :-1] -= w[3, :, :-1, None] * fhat[:, 1:]
    return g


def jacobi_sweep(fhat, itilde, alpha, kappa: float) -> np.ndarray:
    """One simultaneous fixed-point update of every pixel and channel."""
    return simple_refine(itilde, alpha, fhat, kappa, 1)


def simple_refine(itilde, alpha, f_init, kappa: float, iters: int) -> np.ndarray:
    """Apply ``iters`` Jacobi sweeps starting from ``f_init``.

    ``itilde`` is the premultiplied foreground ``alpha * F``.
    """
    f_init, itilde, alpha = _check(f_init, itilde, alpha)
    if not kappa > 0:
        raise ConfigError("kappa must be positive")
    if iters < 0:
        raise ConfigError("iters must be non-negative")
    if iters == 0:
        return f_init.copy()
    w, den = coupling_weights(alpha, kappa)
    data = alpha[..., None] * itilde
    return _backend.jacobi_iterate(f_init, data, w, den, int(iters), _backend.thread_count())


def level_shape(height: int, width: int, s: int) -> tuple[int, int]:
    """Image size at pyramid level ``s`` (level 0 is full resolution)."""
    f = 2.0 ** (-s)
    return max(1, int(round(height * f))), max(1, int(round(width * f)))


def multiscale_refine(fg, alpha, config: RefineConfig | None = None) -> np.ndarray:
    """Coarse-to-fine re-estimation of ``fg``.

    Level ``s`` (from ``scales - 1`` down to 0) runs ``2**s * iters`` sweeps on
    inputs bilinearly resized by ``2**-s``; each level starts from the
    upsampled result of the previous one.
    """
    cfg = config or RefineConfig()
    fg = as_color(fg, "fg")
    alpha = as_plane(alpha, "alpha")
    h, w = check_same_hw(fg, alpha, names=("fg", "alpha"))
    if min(h, w) * 2.0 ** (-(cfg.scales - 1)) < 1.0:
        raise ConfigError(
            f"{cfg.scales} scales is too many for a {h}x{w} image"
        )
    itilde = alpha[..., None] * fg
    f_init = fg
    for s in range(cfg.scales - 1, -1, -1):
        hs, ws = level_shape(h, w, s)
        it_s = resize(itilde, hs, ws)
        a_s = resize(alpha, hs, ws)
        f_init = resize(f_init, hs, ws)
        f_init = simple_refine(it_s, a_s, f_init, cfg.kappa, (2 ** s) * cfg.iters)
    return f_init


def system_matrix(alpha, kappa: float) -> sp.csr_matrix:
    """Sparse symmetric matrix ``L`` of the stationarity system ``L Fh = alpha * itilde``."""
    a = as_plane(alpha, "alpha")
    h, w = a.shape
    n = h * w
    wts, den = coupling_weights(a, kappa)
    idx = np.arange(n).reshape(h, w)
    rows = [idx.ravel()]
    cols = [idx.ravel()]
    vals = [den.ravel()]
    pairs = (
        (0, idx[1:, :], idx[:-1, :], (slice(1, None), slice(None))),
        (1, idx[:-1, :], idx[1:, :], (slice(None, -1), slice(None))),
        (2, idx[:, 1:], idx[:, :-1], (slice(None), slice(1, None))),
        (3, idx[:, :-1], idx[:, 1:], (slice(None), slice(None, -1))),
    )
    for k, i, j, sl in pairs:
        rows.append(i.ravel())
        cols.append(j.ravel())
        vals.append(-wts[k][sl].ravel())
    m = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    return m


def singular_components(alpha, kappa: float) -> list[np.ndarray]:
    """Flat pixel indices of every coupled component whose opacity is zero throughout."""
    a = as_plane(alpha, "alpha")
    m = system_matrix(a, kappa)
    off = m - sp.diags(m.diagonal())
    off.eliminate_zeros()
    ncomp, labels = csgraph.connected_components(off, directed=False)
    flat = a.ravel()
    out = []
    for c in range(ncomp):
        members = np.flatnonzero(labels == c)
        if np.all(flat[members] == 0.0):
            out.append(members)
    return out


def solve_dense_oracle(itilde, alpha, kappa: float, pin=None) -> np.ndarray:
    """Exact minimiser of the cost by a sparse direct solve (test oracle).

    If some component has zero opacity everywhere the system is singular:
    :class:`RankDeficientError` is raised unless ``pin`` (a color image) is
    given, in which case the first pixel of each such component is fixed to
    its ``pin`` value.
    """
    itilde = as_color(itilde, "itilde")
    alpha = as_plane(alpha, "alpha")
    h, w = check_same_hw(itilde, alpha, names=("itilde", "alpha"))
    if not kappa > 0:
        raise ConfigError("kappa must be positive")
    m = system_matrix(alpha, kappa).tolil()
    rhs = (alpha[..., None] * itilde).reshape(-1, 3).copy()
    bad = singular_components(alpha, kappa)
    if bad:
        if pin is None:
            raise RankDeficientError(bad)
        pin = as_color(pin, "pin").reshape(-1, 3)
        for members in bad:
            p = members[0]
            m.rows[p] = [p]
            m.data[p] = [1.0]
            rhs[p] = pin[p]
    m = m.tocsc()
    lu = spla.splu(m)
    sol = lu.solve(rhs)
    return sol.reshape(h, w, 3)
