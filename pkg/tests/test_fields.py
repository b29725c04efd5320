import numpy as np
import pytest
from hypothesis import given, strategies as st

from fieldtopo import Field2D, quantize, quantize_with_range, random_field


class TestQuantize:
    def test_endpoints_map_to_range_ends(self):
        assert quantize([0.0, 1.0], 255).tolist() == [0, 255]

    def test_constant_field_maps_to_zero(self):
        assert quantize([5, 5, 5], 255).tolist() == [0, 0, 0]

    def test_linear_map(self):
        # (v - 0) * 10 / 1 at 0, 0.5, 1 lands exactly on 0, 5, 10
        assert quantize([0.0, 0.5, 1.0], 10).tolist() == [0, 5, 10]

    def test_round_half_away_from_zero(self):
        # scaled values 0, 0.5, 1, 1.5, 2 round to 0, 1, 1, 2, 2
        assert quantize([0, 1, 2, 3, 4], 2).tolist() == [0, 1, 1, 2, 2]

    def test_empty_input_rejected(self):
        with pytest.raises(ValueError, match="empty field"):
            quantize([], 255)

    def test_max_level_must_be_positive(self):
        with pytest.raises(ValueError):
            quantize([1.0, 2.0], 0)

    def test_output_always_in_range(self):
        out = quantize(np.linspace(-3, 7, 1000), 17)
        assert out.min() == 0 and out.max() == 17

    @given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=50),
           st.integers(1, 300))
    def test_monotone(self, raw, max_level):
        out = quantize(raw, max_level)
        order = np.argsort(raw, kind="stable")
        assert (np.diff(out[order]) >= 0).all()

    def test_explicit_range_identity_on_matching_grid(self):
        v = np.arange(256)
        assert quantize_with_range(v, 0, 255, 255).tolist() == v.tolist()


class TestRandomField:
    def test_deterministic_for_seed(self):
        a = random_field((4, 4), "uniform", seed=123, max_level=255)
        b = random_field((4, 4), "uniform", seed=123, max_level=255)
        assert np.array_equal(a.values, b.values)

    def test_seed_changes_values(self):
        a = random_field((16, 16), "uniform", seed=1, max_level=255)
        b = random_field((16, 16), "uniform", seed=2, max_level=255)
        assert not np.array_equal(a.values, b.values)

    def test_single_level_range_is_all_zero(self):
        f = random_field((2, 2), "uniform", seed=0, max_level=0)
        assert f.values.sum() == 0

    def test_zero_dimension_rejected(self):
        with pytest.raises(ValueError):
            random_field((0, 4), "uniform", seed=0, max_level=255)

    def test_dims_are_width_height(self):
        f = random_field((5, 3), "uniform", seed=0, max_level=255)
        assert f.width == 5 and f.height == 3 and f.values.shape == (3, 5)

    def test_normal_is_quantized_into_range(self):
        f = random_field((32, 32), "normal", seed=9, max_level=16)
        assert f.values.min() >= 0 and f.values.max() <= 16

    def test_uniform_histogram_roughly_flat(self):
        # chi-square against the flat distribution: dof 255, so a healthy
        # draw sits near 255; 400 is a generous ceiling
        f = random_field((1280, 720), "uniform", seed=42, max_level=255)
        counts = np.bincount(f.values.ravel(), minlength=256)
        expected = f.cell_count / 256
        chi2 = ((counts - expected) ** 2 / expected).sum()
        assert chi2 < 400

    def test_3d_shape_and_range(self):
        f = random_field((4, 3, 5), "normal", seed=0, max_level=8)
        assert f.values.shape == (3, 4, 5)
        assert f.width == 4 and f.height == 3 and f.depth == 5


class TestFieldValidation:
    def test_values_must_fit_level_range(self):
        with pytest.raises(ValueError):
            Field2D(np.array([[0, 9]]), 8)

    def test_fields_are_immutable(self):
        f = Field2D(np.array([[1, 2]]), 8)
        with pytest.raises(ValueError):
            f.values[0, 0] = 3
