from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from skimage.metrics import structural_similarity

from conftest import image_arrays
from oracles import checkerboard
from tvenhance import MetricReport, PlanarImage, measure, psnr, ssim


class TestPsnr:
    def test_identical_inputs_are_infinite(self):
        rng = np.random.default_rng(30)
        a = PlanarImage(rng.uniform(0, 1, (3, 8, 8)))
        assert psnr(a, a) == math.inf

    def test_uniform_offset_is_twenty_db(self):
        rng = np.random.default_rng(31)
        base = rng.uniform(0, 0.9, (1, 12, 12))
        a = PlanarImage(base)
        b = PlanarImage(base + 0.1)
        assert psnr(a, b) == pytest.approx(20.0, abs=1e-9)

    def test_single_pixel_error(self):
        base = np.full((1, 10, 10), 0.25)
        bumped = base.copy()
        bumped[0, 0, 0] += 1.0  # MSE 1/100
        assert psnr(PlanarImage(base), PlanarImage(bumped)) == pytest.approx(20.0)

    def test_strictly_decreasing_in_error(self):
        base = PlanarImage(np.full((1, 8, 8), 0.2))
        values = [
            psnr(base, PlanarImage(np.full((1, 8, 8), 0.2 + offset)))
            for offset in (0.01, 0.05, 0.1, 0.4)
        ]
        assert values == sorted(values, reverse=True)
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            psnr(PlanarImage(np.zeros((1, 8, 8))), PlanarImage(np.zeros((1, 8, 9))))

    @given(a=image_arrays(min_side=4, lo=0.0, hi=1.0))
    def test_symmetry(self, a):
        x = PlanarImage(a)
        y = PlanarImage(np.clip(a + 0.125, 0, 1))
        assert psnr(x, y) == psnr(y, x)


class TestSsim:
    def test_self_similarity_is_exactly_one(self):
        rng = np.random.default_rng(32)
        a = PlanarImage(rng.uniform(0, 1, (3, 16, 16)))
        assert ssim(a, a) == 1.0

    def test_inverted_checkerboard_is_anticorrelated(self):
        board = checkerboard(16, 16, values=(1.0, 0.0))[np.newaxis]
        a = PlanarImage(board)
        b = PlanarImage(1.0 - board)
        assert ssim(a, b) < 0.0

    def test_uniform_offset_costs_only_luminance(self):
        rng = np.random.default_rng(33)
        base = rng.uniform(0, 0.9, (1, 24, 24))
        value = ssim(PlanarImage(base), PlanarImage(base + 0.05))
        assert 0.8 < value < 1.0

    def test_matches_skimage_reference(self):
        rng = np.random.default_rng(34)
        a = rng.uniform(0, 1, (3, 20, 28))
        b = np.clip(a + rng.normal(0, 0.08, a.shape), 0, 1)
        expected = np.mean(
            [
                structural_similarity(
                    a[c],
                    b[c],
                    win_size=11,
                    gaussian_weights=True,
                    sigma=1.5,
                    use_sample_covariance=False,
                    data_range=1.0,
                )
                for c in range(3)
            ]
        )
        assert ssim(PlanarImage(a), PlanarImage(b)) == pytest.approx(expected, abs=1e-12)

    def test_too_small_image(self):
        small = PlanarImage(np.zeros((1, 10, 12)))
        with pytest.raises(ValueError, match="11x11"):
            ssim(small, small)

    @given(a=image_arrays(min_side=11, max_side=14, lo=0.0, hi=1.0, channels=1))
    def test_symmetry(self, a):
        x = PlanarImage(a)
        y = PlanarImage(1.0 - a)
        assert ssim(x, y) == pytest.approx(ssim(y, x), abs=1e-12)


def test_measure_bundles_both():
    rng = np.random.default_rng(35)
    a = PlanarImage(rng.uniform(0, 1, (1, 16, 16)))
    report = measure(a, a)
    assert isinstance(report, MetricReport)
    assert report.psnr_db == math.inf
    assert report.ssim == 1.0
