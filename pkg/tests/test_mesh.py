import numpy as np
import pytest

from fluxstep import (
    ConfigurationError,
    ModelError,
    StateField,
    make_grid,
    sample_function,
)


class TestMakeGrid:
    def test_unit_interval_101_points(self):
        g = make_grid(0, 1, 101)
        assert g.dx == pytest.approx(0.01, abs=0)
        assert g.x[50] == pytest.approx(0.5, abs=1e-15)
        assert g.x[0] == 0.0

    def test_three_points(self):
        g = make_grid(0, 1, 3)
        assert g.dx == 0.5

    def test_symmetric_grid(self):
        g = make_grid(-1, 1, 201)
        assert g.dx == pytest.approx(0.01)
        assert g.x[100] == pytest.approx(0.0, abs=1e-15)

    def test_rejects_too_few_points(self):
        with pytest.raises(ConfigurationError):
            make_grid(0, 1, 2)

    def test_rejects_non_increasing_bounds(self):
        with pytest.raises(ConfigurationError):
            make_grid(1, 1, 10)
        with pytest.raises(ConfigurationError):
            make_grid(2, 1, 10)

    @pytest.mark.parametrize(
        "x_min,x_max,n", [(0, 1, 101), (-1, 1, 201), (0, 0.99, 100), (0, 1, 3)]
    )
    def test_uniform_spacing_to_roundoff(self, x_min, x_max, n):
        g = make_grid(x_min, x_max, n)
        gaps = np.diff(g.x)
        eps = np.finfo(float).eps
        # each coordinate is exact to half an ulp of its own magnitude, so the
        # gap error scales with max|x|, not with dx
        scale = max(abs(g.dx), abs(x_min), abs(x_max))
        assert np.max(np.abs(gaps - g.dx)) <= 4 * eps * scale
        assert abs(g.x[-1] - x_max) <= 4 * eps * max(abs(x_max), 1.0)


class TestSampleFunction:
    def test_zero_function(self):
        g = make_grid(0, 1, 101)
        assert np.all(sample_function(g, lambda x: 0.0) == 0.0)

    def test_identity_sampling(self):
        g = make_grid(0, 1, 3)
        np.testing.assert_allclose(sample_function(g, lambda x: x), [0, 0.5, 1])

    def test_sod_density_split(self):
        g = make_grid(0, 1, 101)
        rho = sample_function(g, lambda x: 8.0 if x < 0.5 else 1.0)
        assert np.all(rho[:50] == 8.0)
        # the node at exactly x = 0.5 takes the right state
        assert np.all(rho[50:] == 1.0)

    def test_non_finite_sample_reports_coordinate(self):
        g = make_grid(0, 1, 11)
        with pytest.raises(ModelError, match="0.5"):
            sample_function(g, lambda x: np.inf if x == 0.5 else 0.0)


class TestStateField:
    def test_rejects_non_finite(self):
        g = make_grid(0, 1, 3)
        with pytest.raises(ModelError):
            StateField(g, [[0.0, np.nan, 1.0]])
        with pytest.raises(ModelError):
            StateField(g, [[0.0, np.inf, 1.0]])

    def test_shape_validation(self):
        g = make_grid(0, 1, 3)
        with pytest.raises(ConfigurationError):
            StateField(g, [[1.0, 2.0]])

    def test_values_are_read_only(self):
        g = make_grid(0, 1, 3)
        s = StateField(g, [[1.0, 2.0, 3.0]])
        with pytest.raises(ValueError):
            s.values[0, 0] = 7.0

    def test_row_vector_promoted_and_components_counted(self):
        g = make_grid(0, 1, 3)
        assert StateField(g, [1.0, 2.0, 3.0]).n_components == 1
        assert StateField(g, np.zeros((3, 3))).n_components == 3
