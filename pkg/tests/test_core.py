import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from matteforge.core import (
    BG,
    FG,
    UNKNOWN,
    ShapeError,
    assumption1_gradient,
    assumption2_violation,
    composite,
    neighbors4,
    region_boundary,
)


def brute_boundary(mask):
    h, w = mask.shape
    out = np.zeros_like(mask)
    for y, x in itertools.product(range(h), range(w)):
        closed = {(y, x)} | neighbors4((y, x), (h, w))
        inside = any(mask[p] for p in closed)
        outside = any(not mask[p] for p in closed)
        out[y, x] = inside and outside
    return out


class TestComposite:
    def test_midpoint(self):
        fg = np.ones((4, 5, 3))
        bg = np.zeros((4, 5, 3))
        out = composite(fg, bg, np.full((4, 5), 0.5))
        np.testing.assert_array_equal(out, 0.5)

    def test_identity_cases(self, rng):
        fg = rng.random((6, 6, 3))
        bg = rng.random((6, 6, 3))
        np.testing.assert_array_equal(composite(fg, bg, np.ones((6, 6))), fg)
        np.testing.assert_array_equal(composite(fg, bg, np.zeros((6, 6))), bg)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            composite(np.zeros((4, 4, 3)), np.zeros((4, 5, 3)), np.zeros((4, 4)))

    def test_alpha_recoverable(self, rng):
        fg = rng.random((32, 32, 3))
        bg = rng.random((32, 32, 3))
        alpha = rng.random((32, 32))
        img = composite(fg, bg, alpha)
        sep = np.abs(fg - bg) > 0.1
        rec = (img - bg) / np.where(sep, fg - bg, 1.0)
        a3 = np.broadcast_to(alpha[..., None], rec.shape)
        np.testing.assert_allclose(rec[sep], a3[sep], atol=1e-6)


class TestNeighbors:
    def test_interior(self):
        assert neighbors4((5, 5), (10, 10)) == {(4, 5), (6, 5), (5, 4), (5, 6)}

    def test_corner(self):
        assert neighbors4((0, 0), (10, 10)) == {(0, 1), (1, 0)}

    def test_edge_has_three(self):
        assert len(neighbors4((0, 4), (10, 10))) == 3

    def test_degenerate_grid(self):
        assert neighbors4((0, 0), (1, 1)) == set()

    def test_out_of_bounds(self):
        with pytest.raises(IndexError):
            neighbors4((3, 0), (3, 3))

    @given(st.integers(1, 6), st.integers(1, 6), st.data())
    def test_symmetric(self, h, w, data):
        i = (data.draw(st.integers(0, h - 1)), data.draw(st.integers(0, w - 1)))
        for j in neighbors4(i, (h, w)):
            assert i in neighbors4(j, (h, w))


masks = st.tuples(st.integers(1, 9), st.integers(1, 9)).flatmap(
    lambda hw: arrays(np.bool_, hw)
)


class TestRegionBoundary:
    def test_full_and_empty(self):
        assert not region_boundary(np.ones((6, 7), bool)).any()
        assert not region_boundary(np.zeros((6, 7), bool)).any()

    def test_single_pixel(self):
        m = np.zeros((5, 5), bool)
        m[2, 2] = True
        b = region_boundary(m)
        np.testing.assert_array_equal(b, brute_boundary(m))
        expected = {(2, 2)} | neighbors4((2, 2), (5, 5))
        assert set(zip(*np.nonzero(b))) == expected

    @settings(max_examples=200)
    @given(masks)
    def test_matches_definition(self, m):
        np.testing.assert_array_equal(region_boundary(m), brute_boundary(m))

    @given(masks)
    def test_complement_symmetry(self, m):
        np.testing.assert_array_equal(region_boundary(m), region_boundary(~m))

    @given(masks)
    def test_within_one_step_dilations(self, m):
        from scipy.ndimage import binary_dilation

        cross = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], bool)
        dil_in = binary_dilation(m, cross) if m.any() else m
        dil_out = binary_dilation(~m, cross) if (~m).any() else ~m
        b = region_boundary(m)
        assert not (b & ~(dil_in & dil_out)).any()


def square_trimap(n=8):
    t = np.full((n, n), UNKNOWN)
    t[:2, :] = BG
    t[-2:, :] = FG
    return t


class TestAssumption2:
    def test_perfect(self):
        t = square_trimap()
        alpha = np.where(t == BG, 0.0, 1.0)
        # unknown rows adjacent to BG must be 0, adjacent to FG must be 1
        alpha[2, :] = 0.0
        alpha[5, :] = 1.0
        alpha[3:5, :] = 0.4
        assert tuple(assumption2_violation(alpha, t)) == (0.0, 0.0, 0.0)

    def test_constant_half(self):
        t = square_trimap()
        r = assumption2_violation(np.full((8, 8), 0.5), t)
        assert tuple(r) == (0.5, 0.5, 0.5)

    def test_single_violation_matches_enumeration(self):
        t = square_trimap()
        alpha = np.where(t == BG, 0.0, 1.0)
        alpha[2, :] = 0.0
        alpha[5, :] = 1.0
        alpha[3:5, :] = 0.4
        alpha[5, 3] = 0.3
        r = assumption2_violation(alpha, t)
        fg_band = brute_boundary(t == FG)
        bg_band = brute_boundary(t == BG)
        devs_fg = [abs(1 - alpha[p]) for p in zip(*np.nonzero(fg_band))]
        devs_bg = [abs(alpha[p]) for p in zip(*np.nonzero(bg_band))]
        assert r.max_fg_dev == pytest.approx(0.7)
        assert r.max_fg_dev == max(devs_fg)
        assert r.max_bg_dev == max(devs_bg) == 0.0
        assert r.mean_dev == pytest.approx(np.mean(devs_fg + devs_bg))

    def test_empty_bands(self):
        t = np.full((4, 4), UNKNOWN)
        assert tuple(assumption2_violation(np.full((4, 4), 0.3), t)) == (0.0, 0.0, 0.0)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            assumption2_violation(np.zeros((4, 4)), np.zeros((4, 5)))


def test_assumption1_gradient_zero_for_constant_fg():
    alpha = np.zeros((6, 6))
    alpha[2:4, 2:4] = 1.0
    assert assumption1_gradient(np.full((6, 6, 3), 0.3), alpha) == 0.0
