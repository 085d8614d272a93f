import logging
import math

import numpy as np
import pytest

from src.core.errors import ConfigError, DataError, DimensionError
from src.encoding.projection import Normalization, apply_normalization, full_bilinear, new_projector

from tests.conftest import make_projector


class TestNormalization:
    def test_signed_sqrt(self):
        out = apply_normalization(np.array([4.0, -9.0, 0.0]), Normalization.signed_sqrt())
        np.testing.assert_array_equal(out, [2.0, -3.0, 0.0])

    def test_sigmoid_of_zero(self):
        assert apply_normalization(np.array([0.0]), Normalization.sigmoid())[0] == 0.5

    def test_sigmoid_saturates_without_overflow(self):
        out = apply_normalization(np.array([-1000.0, 1000.0]), Normalization.sigmoid())
        np.testing.assert_allclose(out, [0.0, 1.0])

    def test_scale_divides(self):
        out = apply_normalization(np.array([4.0, -6.0]), Normalization.scale(2))
        np.testing.assert_array_equal(out, [2.0, -3.0])

    @pytest.mark.parametrize("factor", [0.0, -1.0, math.inf])
    def test_scale_factor_must_be_positive(self, factor):
        with pytest.raises(ConfigError):
            Normalization.scale(factor)

    def test_parse(self):
        assert Normalization.parse("ssqrt") == Normalization.signed_sqrt()
        assert Normalization.parse("scale:49").factor == 49.0
        with pytest.raises(ConfigError):
            Normalization.parse("l1")
        with pytest.raises(ConfigError):
            Normalization.parse("scale")

    def test_rejects_non_finite(self):
        with pytest.raises(DataError):
            apply_normalization(np.array([np.nan]), Normalization.identity())


class TestRMProjector:
    def test_first_sign_matrix_of_seed_zero(self):
        p = new_projector(0, 1, 4)
        np.testing.assert_array_equal(p.w1[:, 0], [-1, 1, 1, -1])

    def test_signs_are_rademacher_and_seeded(self):
        a, b = new_projector(7, 16, 64), new_projector(7, 16, 64)
        assert set(np.unique(a.w1).tolist()) <= {-1, 1}
        np.testing.assert_array_equal(a.w1, b.w1)
        np.testing.assert_array_equal(a.w2, b.w2)
        assert not np.array_equal(a.w1, new_projector(8, 16, 64).w1)

    def test_hand_computed_projection(self):
        p = make_projector([[1, -1]], [[1, 1]])
        np.testing.assert_allclose(p.project(np.array([1.0, 2.0])), [-3.0])

    def test_hand_computed_projection_signed_sqrt(self):
        p = make_projector([[1, -1]], [[1, 1]], Normalization.signed_sqrt())
        np.testing.assert_allclose(p.project(np.array([1.0, 2.0])), [-math.sqrt(3.0)])

    def test_zero_descriptor(self):
        p = new_projector(1, 8, 32)
        np.testing.assert_array_equal(p.project(np.zeros(8)), np.zeros(32))
        sig = new_projector(1, 8, 32, Normalization.sigmoid())
        np.testing.assert_array_equal(sig.project(np.zeros(8)), np.full(32, 0.5))

    def test_degree_two_homogeneity(self, rng):
        p = new_projector(3, 10, 50)
        x = rng.normal(size=10)
        np.testing.assert_allclose(p.project(-2.5 * x), 6.25 * p.project(x), rtol=1e-10)

    def test_rows_match_single_projection(self, rng):
        p = new_projector(3, 6, 20, chunk_rows=4)
        rows = rng.normal(size=(11, 6))
        block = p.project_rows(rows)
        for i, row in enumerate(rows):
            np.testing.assert_allclose(block[i], p.project(row), rtol=1e-12)
        np.testing.assert_allclose(p.project_sum(rows), block.sum(axis=0), rtol=1e-10)

    def test_warns_when_not_expanding(self, caplog):
        with caplog.at_level(logging.WARNING, logger="src.encoding.projection"):
            new_projector(0, 8, 2)
        assert "does not exceed" in caplog.text

    def test_rejects_bad_dimensions(self):
        with pytest.raises(DimensionError):
            new_projector(0, 0, 4)
        p = new_projector(0, 4, 8)
        with pytest.raises(DimensionError):
            p.project(np.zeros(5))
        with pytest.raises(DataError):
            p.project(np.array([0.0, np.nan, 0.0, 0.0]))

    def test_unbiased_kernel_estimate(self):
        gen = np.random.default_rng(7)
        c, d, seeds = 16, 4096, 32
        xs = gen.normal(size=(10, c))
        ys = xs + 0.5 * gen.normal(size=(10, c))
        exact = np.einsum("ij,ij->i", xs, ys) ** 2

        estimate = np.zeros(10)
        for seed in range(seeds):
            p = new_projector(1000 + seed, c, d)
            fx, fy = p.project_rows(xs), p.project_rows(ys)
            estimate += np.einsum("ij,ij->i", fx, fy) / d
        estimate /= seeds

        assert np.all(np.abs(estimate - exact) / exact < 0.05)

    def test_pooled_estimate_tracks_full_bilinear(self):
        gen = np.random.default_rng(11)
        c, d, seeds = 8, 4096, 32
        xs = gen.normal(size=(3, c))
        ys = xs + 0.3 * gen.normal(size=(3, c))
        exact = float(np.sum(full_bilinear(xs) * full_bilinear(ys)))

        estimate = 0.0
        for seed in range(seeds):
            p = new_projector(2000 + seed, c, d)
            estimate += float(p.project_sum(xs) @ p.project_sum(ys)) / d
        estimate /= seeds

        assert abs(estimate - exact) / exact < 0.10


class TestFullBilinear:
    def test_single_vector(self):
        np.testing.assert_array_equal(full_bilinear([np.array([1.0, 2.0])]), [[1, 2], [2, 4]])

    def test_two_vectors(self):
        out = full_bilinear([np.array([1.0, 0.0]), np.array([0.0, 1.0])])
        np.testing.assert_array_equal(out, np.eye(2))

    def test_empty_set(self):
        np.testing.assert_array_equal(full_bilinear([], c=3), np.zeros((3, 3)))
        with pytest.raises(DimensionError):
            full_bilinear([])

    def test_length_mismatch(self):
        with pytest.raises(DimensionError):
            full_bilinear([np.zeros(2), np.zeros(3)])
