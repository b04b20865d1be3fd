import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from lamkit import numkit
from lamkit.errors import DegenerateBatch, ShapeError, ZeroNorm


class TestCovariance:
    def test_constant_rows_give_zero(self):
        x = np.full((4, 2), 3.7)
        assert np.array_equal(numkit.covariance(x), np.zeros((2, 2)))

    def test_hand_value_identity_rows(self):
        cov = numkit.covariance([[1.0, 0.0], [0.0, 1.0]])
        expected = np.array([[0.5, -0.5], [-0.5, 0.5]])
        np.testing.assert_allclose(cov, expected, atol=1e-15)

    def test_single_row_degenerate(self):
        with pytest.raises(DegenerateBatch):
            numkit.covariance([[1.0, 2.0]])

    def test_matches_numpy_oracle(self):
        gen = np.random.Generator(np.random.Philox(key=1))
        x = gen.standard_normal((20, 5))
        np.testing.assert_allclose(
            numkit.covariance(x), np.cov(x, rowvar=False), atol=1e-12
        )

    @given(
        arrays(
            np.float64,
            st.tuples(st.integers(2, 8), st.integers(1, 5)),
            elements=st.floats(-1e3, 1e3),
        )
    )
    def test_symmetric_psd(self, x):
        cov = numkit.covariance(x)
        assert np.array_equal(cov, cov.T)
        eigvals = np.linalg.eigvalsh(cov)
        assert eigvals.min() >= -1e-8 * max(1.0, abs(eigvals).max())


class TestFrobeniusSq:
    def test_zero(self):
        assert numkit.frobenius_sq(np.zeros((3, 3))) == 0.0

    def test_hand_values(self):
        assert numkit.frobenius_sq([[0.5, -0.5], [-0.5, 0.5]]) == 1.0
        assert numkit.frobenius_sq([[3.0, 4.0]]) == 25.0


class TestCosine:
    def test_identical(self):
        assert numkit.cosine([1.0, 0.0], [1.0, 0.0]) == 1.0

    def test_orthogonal(self):
        assert numkit.cosine([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_hand_value(self):
        assert numkit.cosine([1.0, 1.0], [1.0, 0.0]) == pytest.approx(
            1.0 / np.sqrt(2.0), abs=1e-12
        )

    def test_zero_norm(self):
        with pytest.raises(ZeroNorm):
            numkit.cosine([0.0, 0.0], [1.0, 0.0])

    def test_dim_mismatch(self):
        with pytest.raises(ShapeError):
            numkit.cosine([1.0], [1.0, 0.0])

    @given(
        arrays(np.float64, 4, elements=st.floats(-100, 100)),
        arrays(np.float64, 4, elements=st.floats(-100, 100)),
    )
    def test_clamped_and_symmetric(self, u, v):
        if np.linalg.norm(u) == 0 or np.linalg.norm(v) == 0:
            return
        c = numkit.cosine(u, v)
        assert -1.0 <= c <= 1.0
        assert c == pytest.approx(numkit.cosine(v, u), abs=1e-12)


class TestSoftmax:
    def test_uniform_from_zero_scores(self):
        np.testing.assert_allclose(numkit.softmax(np.zeros(12)), np.full(12, 1 / 12))

    def test_no_overflow(self):
        p = numkit.softmax([1000.0, 0.0])
        assert np.all(np.isfinite(p))
        assert p[0] == pytest.approx(1.0)
        assert p[1] == pytest.approx(0.0, abs=1e-300)

    def test_hand_value(self):
        np.testing.assert_allclose(
            numkit.softmax([np.log(2.0), 0.0]), [2 / 3, 1 / 3], atol=1e-15
        )

    @given(arrays(np.float64, st.integers(1, 10), elements=st.floats(-50, 50)))
    def test_sums_to_one(self, scores):
        p = numkit.softmax(scores)
        assert p.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(p >= 0)


class TestMatrixHelpers:
    def test_identity_matmul(self):
        x = np.arange(6.0).reshape(2, 3)
        np.testing.assert_array_equal(numkit.matmul(np.eye(2), x), x)

    def test_column_means(self):
        np.testing.assert_array_equal(
            numkit.column_means([[1.0, 3.0], [3.0, 5.0]]), [2.0, 4.0]
        )

    def test_matmul_shape_error(self):
        with pytest.raises(ShapeError):
            numkit.matmul(np.ones((2, 3)), np.ones((2, 3)))

    def test_transpose_copies(self):
        x = np.ones((2, 3))
        t = numkit.transpose(x)
        t[0, 0] = 5.0
        assert x[0, 0] == 1.0

    def test_add_scaled(self):
        out = numkit.add_scaled([[1.0, 2.0]], [[10.0, 20.0]], alpha=0.5)
        np.testing.assert_array_equal(out, [[6.0, 12.0]])
        with pytest.raises(ShapeError):
            numkit.add_scaled(np.ones((1, 2)), np.ones((2, 1)))
