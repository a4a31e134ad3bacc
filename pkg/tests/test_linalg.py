"""Tests for the dense complex linear-algebra helpers.

Derived expectations are computed by independent oracles (explicit index
loops, generic LU solves) rather than by the functions under test.
"""

import numpy as np
import pytest

from mmwcs.linalg import (
    DimensionMismatch,
    SingularSystemError,
    devec,
    hermitian_solve,
    khatri_rao,
    kron,
    mat_inner,
    vec,
)


def _random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _kron_oracle(a, b):
    """Four-index definition of the Kronecker product."""
    m, n = a.shape
    p, q = b.shape
    out = np.zeros((m * p, n * q), dtype=complex)
    for i in range(m):
        for j in range(n):
            for k in range(p):
                for l in range(q):
                    out[i * p + k, j * q + l] = a[i, j] * b[k, l]
    return out


class TestKron:
    def test_scalar_identity(self):
        b = np.array([[1.0 + 2j, 3.0], [0.0, -1j]])
        assert np.array_equal(kron(np.array([[1.0]]), b), b)

    def test_identity_pair(self):
        assert np.array_equal(kron(np.eye(2), np.eye(3)), np.eye(6))

    def test_matches_index_oracle(self):
        rng = np.random.default_rng(101)
        a = _random_complex(rng, 2, 3)
        b = _random_complex(rng, 4, 2)
        np.testing.assert_allclose(kron(a, b), _kron_oracle(a, b), rtol=0, atol=1e-14)

    def test_mixed_product_property(self):
        rng = np.random.default_rng(7)
        a, c = _random_complex(rng, 2, 2), _random_complex(rng, 2, 2)
        b, d = _random_complex(rng, 3, 3), _random_complex(rng, 3, 3)
        left = kron(a, b) @ kron(c, d)
        right = kron(a @ c, b @ d)
        np.testing.assert_allclose(left, right, rtol=1e-10)


class TestKhatriRao:
    def test_single_column_equals_kron(self):
        rng = np.random.default_rng(3)
        a = _random_complex(rng, 3, 1)
        b = _random_complex(rng, 2, 1)
        np.testing.assert_allclose(khatri_rao(a, b), kron(a, b), atol=1e-14)

    def test_identity_columns(self):
        out = khatri_rao(np.eye(2), np.eye(2))
        expected = np.zeros((4, 2))
        expected[0, 0] = 1.0
        expected[3, 1] = 1.0
        np.testing.assert_array_equal(out, expected)

    def test_matches_per_column_oracle(self):
        rng = np.random.default_rng(11)
        a = _random_complex(rng, 3, 2)
        b = _random_complex(rng, 4, 2)
        out = khatri_rao(a, b)
        for col in range(2):
            expected = _kron_oracle(a[:, [col]], b[:, [col]])
            np.testing.assert_allclose(out[:, [col]], expected, atol=1e-14)

    def test_column_count_mismatch(self):
        with pytest.raises(DimensionMismatch):
            khatri_rao(np.ones((2, 2)), np.ones((2, 3)))


class TestVecDevec:
    def test_vec_stacks_columns(self):
        m = np.array([[1.0, 3.0], [2.0, 4.0]])
        np.testing.assert_array_equal(vec(m), [1.0, 2.0, 3.0, 4.0])

    def test_roundtrip_all_shapes(self):
        for rows in range(1, 65):
            for cols in range(1, 65):
                m = (np.arange(rows * cols) + 1j * np.arange(rows * cols)[::-1]).reshape(rows, cols)
                assert np.array_equal(devec(vec(m), rows, cols), m)

    def test_devec_length_mismatch(self):
        with pytest.raises(DimensionMismatch):
            devec(np.ones(5), 2, 3)

    def test_vec_of_outer_product_is_kron(self):
        rng = np.random.default_rng(42)
        for _ in range(200):
            a = _random_complex(rng, 4)
            b = _random_complex(rng, 3)
            lhs = vec(np.outer(a, b.conj()))
            rhs = kron(b.conj()[:, None], a[:, None]).reshape(-1)
            np.testing.assert_allclose(lhs, rhs, rtol=0, atol=1e-12)


class TestMatInner:
    def test_self_inner_is_squared_norm(self):
        rng = np.random.default_rng(5)
        x = _random_complex(rng, 3, 4)
        assert mat_inner(x, x) == pytest.approx(np.linalg.norm(x) ** 2)

    def test_zero(self):
        assert mat_inner(np.zeros((2, 2)), np.ones((2, 2))) == 0

    def test_rank_one_sandwich_identity(self):
        # tr(Y (a b^H)^H) collapses to a^H Y b.
        rng = np.random.default_rng(9)
        y = _random_complex(rng, 5, 4)
        a = _random_complex(rng, 5)
        b = _random_complex(rng, 4)
        lhs = mat_inner(y, np.outer(a, b.conj()))
        rhs = a.conj() @ y @ b
        assert abs(lhs - rhs) / abs(rhs) < 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            mat_inner(np.ones((2, 2)), np.ones((3, 2)))


class TestHermitianSolve:
    def test_identity_system(self):
        g = np.array([1.0 + 1j, 2.0, -3j])
        np.testing.assert_allclose(hermitian_solve(np.eye(3), g), g, atol=1e-14)

    def test_one_by_one(self):
        out = hermitian_solve(np.array([[4.0]]), np.array([2.0 + 2j]))
        np.testing.assert_allclose(out, [0.5 + 0.5j], atol=1e-14)

    def test_matches_generic_dense_solver(self):
        rng = np.random.default_rng(77)
        a = _random_complex(rng, 5, 9)
        q = a @ a.conj().T
        g = _random_complex(rng, 5)
        expected = np.linalg.solve(q, g)
        np.testing.assert_allclose(hermitian_solve(q, g), expected, rtol=1e-10)

    @pytest.mark.parametrize("p", [1, 2, 3, 5, 8, 13, 21, 32])
    def test_backward_error_bound(self, p):
        rng = np.random.default_rng(p)
        a = _random_complex(rng, p, 2 * p + 1)
        q = a @ a.conj().T
        g = _random_complex(rng, p)
        z = hermitian_solve(q, g)
        assert np.linalg.norm(q @ z - g) <= 1e-8 * np.linalg.norm(g)

    def test_matrix_right_hand_side(self):
        rng = np.random.default_rng(13)
        a = _random_complex(rng, 4, 9)
        q = a @ a.conj().T
        g = _random_complex(rng, 4, 3)
        z = hermitian_solve(q, g)
        np.testing.assert_allclose(q @ z, g, rtol=1e-9, atol=1e-10)

    def test_rejects_non_hermitian(self):
        q = np.array([[1.0, 1.0], [0.0, 1.0]])
        with pytest.raises(ValueError, match="Hermitian"):
            hermitian_solve(q, np.ones(2))

    def test_rejects_singular_with_context(self):
        rng = np.random.default_rng(2)
        u = _random_complex(rng, 4)
        q = np.outer(u, u.conj())
        with pytest.raises(SingularSystemError, match="iteration 2"):
            hermitian_solve(q, np.ones(4), context="pursuit iteration 2")

    def test_rejects_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            hermitian_solve(np.eye(3), np.ones(2))
