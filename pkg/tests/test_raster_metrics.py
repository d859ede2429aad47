from __future__ import annotations

import math

import numpy as np
import pytest
from skimage.metrics import structural_similarity

from mrweb.raster import (
    DimensionMismatch,
    EmbeddingVector,
    EmptyRegionError,
    PSNR_CAP_DB,
    RasterImage,
    clip_cosine,
    mae,
    mean_color_lab,
    nemd,
    pad_pair,
    psnr,
    ssim,
)
from mrweb.resources import BoundingBox

from conftest import noisy_copy, random_image, solid


def gray_replicated(values, width, height=1):
    """Image whose three channels all carry the given per-pixel values."""
    arr = np.array(values, dtype=np.uint8).reshape(height, width)
    return RasterImage(np.stack([arr] * 3, axis=-1))


class TestPadPair:
    def test_equal_sized_pair_returned_unchanged(self):
        a = random_image(30, 20, seed=1)
        b = random_image(30, 20, seed=2)
        pa, pb = pad_pair(a, b, seed=42)
        assert pa is a and pb is b

    def test_common_bounding_size_and_determinism(self):
        a = random_image(100, 50, seed=1)
        b = random_image(80, 60, seed=2)
        pa1, pb1 = pad_pair(a, b, seed=42)
        pa2, pb2 = pad_pair(a, b, seed=42)
        assert (pa1.width, pa1.height) == (100, 60)
        assert (pb1.width, pb1.height) == (100, 60)
        assert np.array_equal(pa1.array, pa2.array)
        assert np.array_equal(pb1.array, pb2.array)

    def test_content_anchored_top_left(self):
        a = random_image(100, 50, seed=1)
        b = random_image(80, 60, seed=2)
        pa, pb = pad_pair(a, b, seed=42)
        assert np.array_equal(pa.array[:50, :100], a.array)
        assert np.array_equal(pb.array[:60, :80], b.array)

    def test_different_seeds_give_different_padding(self):
        a = random_image(100, 50, seed=1)
        b = random_image(80, 60, seed=2)
        pa1, _ = pad_pair(a, b, seed=1)
        pa2, _ = pad_pair(a, b, seed=2)
        assert not np.array_equal(pa1.array[50:, :], pa2.array[50:, :])


class TestMae:
    def test_identity(self):
        img = random_image(16, 16, seed=3)
        assert mae(img, img) == 0.0

    def test_black_vs_white(self):
        assert mae(solid(8, 8, (0, 0, 0)), solid(8, 8, (255, 255, 255))) == 255.0

    def test_hand_computed_two_pixel_case(self):
        # per-pixel |0-50| and |100-100| over 2 pixels x 3 channels
        a = gray_replicated([0, 100], width=2)
        b = gray_replicated([50, 100], width=2)
        assert mae(a, b) == pytest.approx(25.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            mae(solid(4, 4, (0, 0, 0)), solid(5, 4, (0, 0, 0)))

    def test_symmetry(self):
        a, b = random_image(20, 14, seed=4), random_image(20, 14, seed=5)
        assert mae(a, b) == mae(b, a)


class TestPsnr:
    def test_identity_returns_cap(self):
        img = random_image(12, 12, seed=6)
        assert psnr(img, img) == PSNR_CAP_DB

    def test_maximal_difference_is_zero_db(self):
        assert psnr(solid(8, 8, (0, 0, 0)), solid(8, 8, (255, 255, 255))) == pytest.approx(0.0)

    def test_uniform_difference_51(self):
        a = solid(10, 10, (100, 100, 100))
        b = solid(10, 10, (151, 151, 151))
        assert psnr(a, b) == pytest.approx(10 * math.log10(255**2 / 51**2), abs=1e-3)
        assert psnr(a, b) == pytest.approx(13.979, abs=1e-3)

    def test_symmetry(self):
        a, b = random_image(20, 14, seed=7), random_image(20, 14, seed=8)
        assert psnr(a, b) == psnr(b, a)


class TestSsim:
    def test_identity(self):
        img = random_image(32, 24, seed=9)
        assert ssim(img, img) == pytest.approx(1.0, abs=1e-9)

    def test_negative_image_scores_low(self):
        base = random_image(50, 70, seed=10)
        negative = RasterImage(255 - base.array)
        value = ssim(base, negative)
        assert value < 0.5
        # and agrees with the independent reference implementation
        reference = structural_similarity(
            base.grayscale(),
            negative.grayscale(),
            win_size=11,
            gaussian_weights=True,
            sigma=1.5,
            use_sample_covariance=False,
            K1=0.01,
            K2=0.03,
            data_range=255,
        )
        assert value == pytest.approx(reference, abs=1e-9)

    def test_matches_reference_implementation_on_random_pairs(self):
        for seed in range(5):
            a = random_image(40, 30, seed=100 + seed)
            b = random_image(40, 30, seed=200 + seed)
            reference = structural_similarity(
                a.grayscale(),
                b.grayscale(),
                win_size=11,
                gaussian_weights=True,
                sigma=1.5,
                use_sample_covariance=False,
                K1=0.01,
                K2=0.03,
                data_range=255,
            )
            assert ssim(a, b) == pytest.approx(reference, abs=1e-9)

    def test_constant_images_reduce_to_luminance_term(self):
        a = solid(20, 20, (60, 60, 60))
        b = solid(20, 20, (180, 180, 180))
        c1 = (0.01 * 255) ** 2
        mu1, mu2 = 60.0, 180.0
        closed_form = (2 * mu1 * mu2 + c1) / (mu1**2 + mu2**2 + c1)
        assert ssim(a, b) == pytest.approx(closed_form, abs=1e-12)

    def test_too_small_image_rejected(self):
        with pytest.raises(ValueError, match="11x11"):
            ssim(solid(10, 10, (0, 0, 0)), solid(10, 10, (0, 0, 0)))

    def test_symmetry(self):
        a, b = random_image(25, 18, seed=11), random_image(25, 18, seed=12)
        assert ssim(a, b) == pytest.approx(ssim(b, a), abs=1e-12)


class TestNemd:
    def test_identity(self):
        img = random_image(16, 16, seed=13)
        assert nemd(img, img) == 1.0

    def test_black_reference_white_candidate(self):
        assert nemd(solid(9, 9, (0, 0, 0)), solid(9, 9, (255, 255, 255))) == 0.0

    def test_asymmetry_from_reference_bound(self):
        gray = solid(12, 12, (127, 127, 127))
        white = solid(12, 12, (255, 255, 255))
        # reference gray: worst case 128 equals the actual distance
        assert nemd(gray, white) == 0.0
        # reference white: worst case 255, so the same distance scores higher
        assert nemd(white, gray) == pytest.approx(1.0 - 128.0 / 255.0, abs=1e-12)
        assert nemd(white, gray) == pytest.approx(0.498, abs=0.01)

    def test_range(self):
        for seed in range(10):
            a = random_image(15, 15, seed=300 + seed)
            b = random_image(15, 15, seed=400 + seed)
            assert 0.0 <= nemd(a, b) <= 1.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            nemd(solid(4, 4, (0, 0, 0)), solid(4, 5, (0, 0, 0)))


class TestNoiseMonotonicity:
    def test_mae_increases_and_nemd_decreases_with_noise_amplitude(self):
        base = random_image(40, 30, seed=50)
        amplitudes = [5.0, 20.0, 80.0]
        mae_means = []
        nemd_means = []
        for sigma in amplitudes:
            mae_values = []
            nemd_values = []
            for seed in range(20):
                noisy = noisy_copy(base, sigma, seed=1000 + seed)
                mae_values.append(mae(base, noisy))
                nemd_values.append(nemd(base, noisy))
            mae_means.append(np.mean(mae_values))
            nemd_means.append(np.mean(nemd_values))
        assert mae_means[0] < mae_means[1] < mae_means[2]
        assert nemd_means[0] > nemd_means[1] > nemd_means[2]


class TestClipCosine:
    def test_identity(self):
        v = EmbeddingVector(np.array([0.5, -1.0, 2.0]))
        assert clip_cosine(v, v) == pytest.approx(1.0)

    def test_orthogonal(self):
        a = EmbeddingVector(np.array([1.0, 0.0]))
        b = EmbeddingVector(np.array([0.0, 1.0]))
        assert clip_cosine(a, b) == 0.0

    def test_hand_computed(self):
        a = EmbeddingVector(np.array([1.0, 2.0, 3.0]))
        b = EmbeddingVector(np.array([4.0, 5.0, 6.0]))
        expected = 32.0 / (math.sqrt(14.0) * math.sqrt(77.0))
        assert clip_cosine(a, b) == pytest.approx(expected, abs=1e-12)
        assert clip_cosine(a, b) == pytest.approx(0.9746, abs=1e-4)

    def test_symmetry(self):
        rng = np.random.default_rng(14)
        a = EmbeddingVector(rng.normal(size=32))
        b = EmbeddingVector(rng.normal(size=32))
        assert clip_cosine(a, b) == clip_cosine(b, a)

    def test_dimension_mismatch(self):
        a = EmbeddingVector(np.array([1.0, 2.0]))
        b = EmbeddingVector(np.array([1.0, 2.0, 3.0]))
        with pytest.raises(DimensionMismatch):
            clip_cosine(a, b)

    def test_zero_vector_rejected_at_construction(self):
        with pytest.raises(ValueError, match="zero norm"):
            EmbeddingVector(np.zeros(4))

    def test_from_json(self):
        v = EmbeddingVector.from_json("[1.5, -2.0, 0.25]")
        assert v.values.tolist() == [1.5, -2.0, 0.25]


class TestMeanColorLab:
    def test_white_region(self):
        img = solid(20, 20, (255, 255, 255))
        l, a, b = mean_color_lab(img, BoundingBox(2, 2, 10, 10))
        assert l == pytest.approx(100.0, abs=0.1)
        assert a == pytest.approx(0.0, abs=0.1)
        assert b == pytest.approx(0.0, abs=0.1)

    def test_black_region(self):
        img = solid(20, 20, (0, 0, 0))
        assert mean_color_lab(img, BoundingBox(0, 0, 20, 20)) == pytest.approx(
            (0.0, 0.0, 0.0), abs=0.1
        )

    def test_red_region(self):
        img = solid(20, 20, (255, 0, 0))
        l, a, b = mean_color_lab(img, BoundingBox(5, 5, 15, 15))
        assert l == pytest.approx(53.24, abs=0.1)
        assert a == pytest.approx(80.09, abs=0.1)
        assert b == pytest.approx(67.20, abs=0.1)

    def test_box_clamped_to_image(self):
        img = solid(10, 10, (0, 128, 255))
        inside = mean_color_lab(img, BoundingBox(0, 0, 10, 10))
        overflowing = mean_color_lab(img, BoundingBox(-5, -5, 40, 40))
        assert overflowing == pytest.approx(inside, abs=1e-9)

    def test_empty_intersection_rejected(self):
        img = solid(10, 10, (0, 0, 0))
        with pytest.raises(EmptyRegionError):
            mean_color_lab(img, BoundingBox(50, 50, 60, 60))


class TestRasterImage:
    def test_shape_validation(self):
        with pytest.raises(ValueError):
            RasterImage(np.zeros((4, 4), dtype=np.uint8))

    def test_png_round_trip(self, tmp_path):
        img = random_image(17, 9, seed=77)
        path = tmp_path / "img.png"
        img.save(path)
        assert np.array_equal(RasterImage.load(path).array, img.array)
