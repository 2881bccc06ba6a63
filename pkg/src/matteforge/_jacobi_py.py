"""Pure NumPy Jacobi sweeps; the fallback when the compiled kernel is missing."""
import numpy as np


def jacobi_iterate(fhat, data, weights, den, iters, threads=0):
    """Run ``iters`` simultaneous sweeps.

    ``data`` is ``alpha * itilde`` of shape (H, W, 3); ``weights`` holds the
    up/down/left/right coupling planes, zero where the neighbour is off-grid;
    ``den`` is their sum plus ``alpha**2``. Pixels with ``den == 0`` keep their
    incoming value. ``threads`` is accepted for signature parity and ignored.
    """
    f = np.array(fhat, dtype=np.float64, order="C", copy=True)
    wu, wd, wl, wr = (w[..., None] for w in weights)
    live = den > 0.0
    safe = np.where(live, den, 1.0)[..., None]
    live = live[..., None]
    nb = np.zeros_like(f)
    for _ in range(iters):
        num = data.copy()
        nb[...] = 0.0
        nb[1:] = f[:-1]
        num += wu * nb
        nb[...] = 0.0
        nb[:-1] = f[1:]
        num += wd * nb
        nb[...] = 0.0
        nb[:, 1:] = f[:, :-1]
        num += wl * nb
        nb[...] = 0.0
        nb[:, :-1] = f[:, 1:]
        num += wr * nb
        f = np.where(live, num / safe, f)
    return f
