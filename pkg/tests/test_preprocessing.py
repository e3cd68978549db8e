import numpy as np
import pytest

from cyberagg.preprocessing import Standardizer


class TestStandardizer:
    def test_constant_column_maps_to_zero(self):
        X = np.array([[3.0, 1.0], [3.0, 2.0], [3.0, 3.0]])
        Z = Standardizer().fit(X).transform(X)
        assert np.all(Z[:, 0] == 0.0)

    def test_two_point_column_sample_sd(self):
        X = np.array([[0.0], [2.0]])
        Z = Standardizer().fit(X).transform(X)
        assert Z[:, 0] == pytest.approx([-0.7071067811865475, 0.7071067811865475])

    def test_training_columns_zero_mean_unit_sd(self, rng):
        X = rng.normal(3.0, 5.0, size=(50, 7))
        Z = Standardizer().fit(X).transform(X)
        assert np.max(np.abs(Z.mean(axis=0))) < 1e-9
        assert np.max(np.abs(Z.std(axis=0, ddof=1) - 1.0)) < 1e-9

    def test_single_row_transforms_to_zero(self):
        X = np.array([[4.0, 5.0]])
        Z = Standardizer().fit(X).transform(X)
        assert np.all(Z == 0.0)

    def test_width_mismatch(self):
        scaler = Standardizer().fit(np.zeros((3, 2)))
        with pytest.raises(ValueError, match="columns"):
            scaler.transform(np.zeros((3, 3)))

    def test_requires_fit(self):
        with pytest.raises(ValueError, match="fit"):
            Standardizer().transform(np.zeros((2, 2)))

    def test_test_rows_use_training_stats(self, rng):
        X_train = rng.normal(0, 1, size=(20, 3))
        X_test = rng.normal(10, 1, size=(5, 3))
        scaler = Standardizer().fit(X_train)
        Z = scaler.transform(X_test)
        assert Z.mean() > 5.0  # not re-centered on the test rows
