"""GLCM counting, normalization and texture feature tests."""

import math

import numpy as np
import pytest

from modules.errors import ComputationError, InputError
from modules.glcm import (
    DIRECTIONS,
    FeatureVector,
    Glcm,
    OffsetSpec,
    compute_glcm,
    contrast,
    cooccurrence_counts,
    energy,
    entropy,
    extract_features,
    features_of,
    homogeneity,
    image_glcm,
    normalize,
    render_glcm,
)
from modules.imaging import QuantizedImage, WindowSpec

STEPS = {0: (1, 0), 45: (1, -1), 90: (0, -1), 135: (-1, -1)}


def brute_force_counts(pixels, levels, distance, direction, symmetric, average):
    """Visit every pixel and look up its partner one offset away."""
    height, width = pixels.shape
    counts = np.zeros((levels, levels), dtype=np.int64)
    directions = DIRECTIONS if average else (direction,)
    for r in directions:
        dx, dy = STEPS[r][0] * distance, STEPS[r][1] * distance
        for y in range(height):
            for x in range(width):
                nx, ny = x + dx, y + dy
                if 0 <= nx < width and 0 <= ny < height:
                    counts[pixels[y, x], pixels[ny, nx]] += 1
    if symmetric:
        counts = counts + counts.T
    return counts


def whole(image):
    return WindowSpec(0, 0, image.width)


class TestCooccurrence:
    def test_canonical_asymmetric(self, canonical_window):
        glcm = compute_glcm(canonical_window, whole(canonical_window), OffsetSpec(1, 0, symmetric=False))
        expected = np.zeros((4, 4), dtype=np.int64)
        for (i, j), n in {(0, 0): 2, (0, 1): 2, (1, 1): 2, (0, 2): 1, (2, 2): 3, (2, 3): 1, (3, 3): 1}.items():
            expected[i, j] = n
        assert np.array_equal(glcm.counts, expected)
        assert glcm.total == 12

    def test_canonical_symmetric(self, canonical_window):
        glcm = compute_glcm(canonical_window, whole(canonical_window), OffsetSpec(1, 0, symmetric=True))
        expected = {
            (0, 0): 4, (0, 1): 2, (1, 0): 2, (1, 1): 4, (0, 2): 1,
            (2, 0): 1, (2, 2): 6, (2, 3): 1, (3, 2): 1, (3, 3): 2,
        }
        for i in range(4):
            for j in range(4):
                assert glcm.counts[i, j] == expected.get((i, j), 0)
        assert glcm.total == 24
        assert np.array_equal(glcm.counts, glcm.counts.T)

    def test_constant_window(self):
        image = QuantizedImage(np.full((5, 5), 3, dtype=np.uint8), 8)
        for direction in DIRECTIONS:
            counts = compute_glcm(image, whole(image), OffsetSpec(1, direction)).counts
            assert np.count_nonzero(counts) == 1
            assert counts[3, 3] > 0

    def test_matches_brute_force(self, rng):
        checked = 0
        while checked < 200:
            side = int(rng.integers(2, 7))
            levels = int(rng.integers(2, 5))
            pixels = rng.integers(0, levels, size=(side, side)).astype(np.uint8)
            distance = int(rng.integers(1, 4))
            direction = int(rng.choice(DIRECTIONS))
            symmetric, average = bool(rng.integers(2)), bool(rng.integers(2))
            offset = OffsetSpec(distance, direction, symmetric, average)

            expected = brute_force_counts(pixels, levels, distance, direction, symmetric, average)
            assert np.array_equal(cooccurrence_counts(pixels, levels, offset), expected)

            image = QuantizedImage(pixels, levels)
            if expected.sum() == 0:
                with pytest.raises(InputError):
                    compute_glcm(image, whole(image), offset)
            else:
                assert np.array_equal(compute_glcm(image, whole(image), offset).counts, expected)
            checked += 1

    def test_average_directions_accumulates_all_four(self, rng):
        pixels = rng.integers(0, 4, size=(6, 6)).astype(np.uint8)
        single = sum(cooccurrence_counts(pixels, 4, OffsetSpec(1, r, symmetric=False)) for r in DIRECTIONS)
        averaged = cooccurrence_counts(pixels, 4, OffsetSpec(1, 0, symmetric=True, average_directions=True))
        assert np.array_equal(averaged, single + single.T)

    def test_window_in_larger_image(self):
        pixels = np.zeros((6, 6), dtype=np.uint8)
        pixels[3:, 3:] = 1
        image = QuantizedImage(pixels, 2)
        counts = compute_glcm(image, WindowSpec(3, 3, 3), OffsetSpec(1, 0, symmetric=False)).counts
        assert counts.tolist() == [[0, 0], [0, 6]]

    def test_window_too_small_for_offset(self):
        image = QuantizedImage(np.zeros((4, 4), dtype=np.uint8), 2)
        with pytest.raises(InputError):
            compute_glcm(image, WindowSpec(0, 0, 2), OffsetSpec(2, 0))

    def test_window_outside_image(self):
        image = QuantizedImage(np.zeros((4, 4), dtype=np.uint8), 2)
        with pytest.raises(InputError):
            compute_glcm(image, WindowSpec(2, 0, 4), OffsetSpec())

    @pytest.mark.parametrize("distance, direction", [(0, 0), (1, 30), (-1, 90)])
    def test_bad_offset(self, distance, direction):
        with pytest.raises(InputError):
            OffsetSpec(distance, direction)


class TestNormalize:
    def test_uniform_split(self):
        p = normalize(Glcm(2, np.array([[2, 0], [0, 2]]), OffsetSpec())).p
        assert p.tolist() == [[0.5, 0.0], [0.0, 0.5]]

    def test_canonical_cell(self, canonical_window):
        p = normalize(compute_glcm(canonical_window, whole(canonical_window), OffsetSpec())).p
        assert p[2, 2] == pytest.approx(0.25, abs=1e-15)

    def test_zero_total(self):
        with pytest.raises(ComputationError):
            normalize(Glcm(2, np.zeros((2, 2), dtype=np.int64), OffsetSpec()))


class TestFeatures:
    def test_constant_window(self):
        image = QuantizedImage(np.full((6, 6), 5, dtype=np.uint8), 8)
        values = extract_features(image, whole(image), OffsetSpec())
        assert isinstance(values, FeatureVector)
        assert values == pytest.approx((1.0, 0.0, 1.0, 0.0), abs=1e-12)

    def test_checkerboard(self, checkerboard_image):
        values = extract_features(checkerboard_image, whole(checkerboard_image), OffsetSpec(1, 0))
        assert values == pytest.approx((0.5, 1.0, 0.5, math.log(2)), abs=1e-12)

    @pytest.mark.parametrize("levels", [2, 4, 8, 16])
    def test_uniform_glcm_entropy(self, levels):
        p = normalize(Glcm(levels, np.ones((levels, levels), dtype=np.int64), OffsetSpec()))
        assert entropy(p) == pytest.approx(math.log(levels * levels), abs=1e-12)

    def test_contrast_of_canonical(self, canonical_window):
        p = normalize(compute_glcm(canonical_window, whole(canonical_window), OffsetSpec(1, 0, symmetric=False)))
        # off-diagonal pairs: (0,1) x2 at distance 1, (0,2) at 4, (2,3) at 1
        assert contrast(p) == pytest.approx((2 * 1 + 1 * 4 + 1 * 1) / 12, abs=1e-12)

    def test_homogeneity_is_one_only_on_diagonal(self):
        diagonal = normalize(Glcm(3, np.diag([1, 2, 3]), OffsetSpec()))
        assert homogeneity(diagonal) == pytest.approx(1.0, abs=1e-12)
        spread = normalize(Glcm(3, np.diag([1, 2, 3]) + np.eye(3, k=1, dtype=np.int64), OffsetSpec()))
        assert homogeneity(spread) < 1.0

    def test_canonical_symmetric_features(self, canonical_window):
        p = normalize(compute_glcm(canonical_window, whole(canonical_window), OffsetSpec(1, 0, symmetric=True)))
        cells = {(0, 0): 4, (0, 1): 2, (1, 0): 2, (1, 1): 4, (0, 2): 1, (2, 0): 1, (2, 2): 6, (2, 3): 1, (3, 2): 1, (3, 3): 2}
        expected_homogeneity = sum(n / 24 / (1 + (i - j) ** 2) for (i, j), n in cells.items())
        assert contrast(p) == pytest.approx(14 / 24, abs=1e-12)
        assert homogeneity(p) == pytest.approx(expected_homogeneity, abs=1e-12)
        assert homogeneity(p) == pytest.approx(19.4 / 24, abs=1e-12)

    def test_uniform_glcm_energy(self):
        p = normalize(Glcm(8, np.ones((8, 8), dtype=np.int64), OffsetSpec()))
        assert energy(p) == pytest.approx(1 / 64, abs=1e-12)

    def test_transposed_window(self, rng):
        for _ in range(200):
            levels = int(rng.integers(2, 9))
            side = int(rng.integers(3, 12))
            pixels = rng.integers(0, levels, size=(side, side)).astype(np.uint8)
            original, flipped = QuantizedImage(pixels, levels), QuantizedImage(np.ascontiguousarray(pixels.T), levels)
            distance = int(rng.integers(1, 3))

            # Transposing swaps the horizontal and vertical offsets and maps each diagonal onto itself.
            pairs = [(OffsetSpec(distance, 0), OffsetSpec(distance, 90)),
                     (OffsetSpec(distance, 90), OffsetSpec(distance, 0)),
                     (OffsetSpec(distance, 45), OffsetSpec(distance, 45)),
                     (OffsetSpec(distance, 135), OffsetSpec(distance, 135)),
                     (OffsetSpec(distance, 0, average_directions=True), OffsetSpec(distance, 0, average_directions=True))]
            for on_flipped, on_original in pairs:
                assert extract_features(flipped, whole(flipped), on_flipped) == extract_features(
                    original, whole(original), on_original
                )

    def test_level_permutation(self, rng):
        for _ in range(200):
            levels = int(rng.integers(2, 9))
            side = int(rng.integers(3, 12))
            pixels = rng.integers(0, levels, size=(side, side)).astype(np.uint8)
            relabel = rng.permutation(levels).astype(np.uint8)
            offset = OffsetSpec(1, int(rng.choice(DIRECTIONS)), bool(rng.integers(2)))
            before = extract_features(QuantizedImage(pixels, levels), WindowSpec(0, 0, side), offset)
            after = extract_features(QuantizedImage(relabel[pixels], levels), WindowSpec(0, 0, side), offset)
            assert after.energy == pytest.approx(before.energy, abs=1e-12)
            assert after.entropy == pytest.approx(before.entropy, abs=1e-12)

    def test_non_monotone_relabeling_changes_contrast(self):
        pixels = np.array([[0, 1, 0], [1, 0, 1], [0, 1, 0]], dtype=np.uint8)
        relabel = np.array([0, 2, 1], dtype=np.uint8)
        window = WindowSpec(0, 0, 3)
        before = extract_features(QuantizedImage(pixels, 3), window, OffsetSpec())
        after = extract_features(QuantizedImage(relabel[pixels], 3), window, OffsetSpec())
        assert before.contrast == pytest.approx(1.0, abs=1e-12)
        assert after.contrast == pytest.approx(4.0, abs=1e-12)
        assert after.energy == pytest.approx(before.energy, abs=1e-12)
        assert after.entropy == pytest.approx(before.entropy, abs=1e-12)


    def test_bounds_on_random_windows(self, rng):
        for _ in range(500):
            levels = int(rng.integers(2, 17))
            side = int(rng.integers(3, 20))
            image = QuantizedImage(rng.integers(0, levels, size=(side, side)).astype(np.uint8), levels)
            offset = OffsetSpec(int(rng.integers(1, 3)), int(rng.choice(DIRECTIONS)), bool(rng.integers(2)))
            glcm = compute_glcm(image, whole(image), offset)
            if offset.symmetric:
                assert np.array_equal(glcm.counts, glcm.counts.T)
            p = normalize(glcm)
            assert abs(p.p.sum() - 1.0) <= 1e-12
            assert np.all(p.p >= 0)
            h, c, e, s = features_of(p)
            assert 0.0 < h <= 1.0 + 1e-12
            assert 0.0 < e <= 1.0 + 1e-12
            assert c >= 0.0
            assert -1e-12 <= s <= 2 * math.log(levels) + 1e-12


class TestWholeImageAndRendering:
    def test_image_glcm_equals_full_window(self, canonical_window):
        offset = OffsetSpec(1, 45)
        assert np.array_equal(
            image_glcm(canonical_window, offset).counts,
            compute_glcm(canonical_window, whole(canonical_window), offset).counts,
        )

    def test_render_scales_cells(self, canonical_window):
        rendering = render_glcm(image_glcm(canonical_window, OffsetSpec()), scale=4)
        assert (rendering.width, rendering.height) == (16, 16)
        assert rendering.pixels.max() == 255
        # (1, 3) never co-occurs
        assert np.all(rendering.pixels[4:8, 12:16] == 0)
        block = rendering.pixels[8:12, 8:12]
        assert np.all(block == block[0, 0])

    def test_render_rejects_bad_scale(self, canonical_window):
        with pytest.raises(InputError):
            render_glcm(image_glcm(canonical_window, OffsetSpec()), scale=0)
