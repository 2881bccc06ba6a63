import importlib
import os
import subprocess
import sys

import numpy as np
import pytest

from matteforge import _backend, _jacobi_py
from matteforge.fgrefine import coupling_weights


def _inputs(rng, h=23, w=17):
    fg = rng.random((h, w, 3))
    alpha = rng.random((h, w))
    alpha[rng.random((h, w)) < 0.3] = 0.0
    w_, den = coupling_weights(alpha, 1.0)
    return rng.random((h, w, 3)), alpha[..., None] * (alpha[..., None] * fg), w_, den


@pytest.mark.skipif(_backend.BACKEND != "cython", reason="compiled kernel not built")
@pytest.mark.parametrize("threads", [1, 2, 4])
def test_compiled_matches_fallback_bitwise(rng, threads):
    from matteforge import _jacobi

    f0, data, w, den = _inputs(rng)
    a = _jacobi.jacobi_iterate(f0, data, w, den, 37, threads)
    b = _jacobi_py.jacobi_iterate(f0, data, w, den, 37)
    assert np.array_equal(a, b)


def test_degenerate_denominator_keeps_value():
    f0 = np.full((1, 1, 3), 0.25)
    out = _backend.jacobi_iterate(f0, np.zeros((1, 1, 3)), np.zeros((4, 1, 1)), np.zeros((1, 1)), 3)
    np.testing.assert_array_equal(out, f0)


def test_pure_python_switch():
    code = "import matteforge._backend as b; print(b.BACKEND)"
    env = dict(os.environ, MATTEFORGE_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_thread_count_env(monkeypatch):
    monkeypatch.setenv("MATTEFORGE_THREADS", "3")
    assert _backend.thread_count() == 3
    monkeypatch.setenv("MATTEFORGE_THREADS", "0")
    assert _backend.thread_count() >= 1
