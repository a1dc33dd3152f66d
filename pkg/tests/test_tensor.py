import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from hyperntf.errors import DataError, InvalidArgumentError
from hyperntf.tensor import (
    check_nonnegative,
    cp_reconstruct,
    fold,
    frobenius,
    hadamard,
    khatri_rao,
    khatri_rao_list,
    kronecker,
    mode_vec_product,
    mttkrp,
    rse,
    superdiag,
    unfold,
)


def cube_1_to_8():
    # entry (i, j, k) -> 1 + i + 2j + 4k with 0-based indices
    t = np.empty((2, 2, 2))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                t[i, j, k] = 1 + i + 2 * j + 4 * k
    return t


def naive_mttkrp(t, factors, mode):
    others = [factors[n] for n in reversed(range(t.ndim)) if n != mode]
    return unfold(t, mode) @ khatri_rao_list(others)


def rel(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300)


shapes = st.lists(st.integers(1, 5), min_size=2, max_size=4).map(tuple)


class TestUnfold:
    def test_matrix_mode0_is_identity(self, rng):
        a = rng.random((3, 4))
        np.testing.assert_array_equal(unfold(a, 0), a)

    def test_matrix_mode1_is_transpose(self, rng):
        a = rng.random((3, 4))
        np.testing.assert_array_equal(unfold(a, 1), a.T)

    def test_cube_rows(self):
        np.testing.assert_array_equal(unfold(cube_1_to_8(), 0), [[1, 3, 5, 7], [2, 4, 6, 8]])

    def test_cube_other_modes(self):
        t = cube_1_to_8()
        np.testing.assert_array_equal(unfold(t, 1), [[1, 2, 5, 6], [3, 4, 7, 8]])
        np.testing.assert_array_equal(unfold(t, 2), [[1, 2, 3, 4], [5, 6, 7, 8]])

    def test_fold_cube(self):
        m = np.array([[1.0, 3, 5, 7], [2, 4, 6, 8]])
        np.testing.assert_array_equal(fold(m, 0, (2, 2, 2)), cube_1_to_8())

    def test_fold_vector(self):
        assert fold(np.array([[1.0], [2.0]]), 0, (2,)).shape == (2,)

    def test_bad_mode(self):
        with pytest.raises(InvalidArgumentError):
            unfold(np.zeros((2, 2)), 2)

    def test_fold_shape_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            fold(np.zeros((2, 3)), 0, (2, 2, 2))

    @given(shapes, st.data())
    def test_roundtrip(self, dims, data):
        t = np.arange(np.prod(dims), dtype=float).reshape(dims)
        mode = data.draw(st.integers(0, len(dims) - 1))
        np.testing.assert_array_equal(fold(unfold(t, mode), mode, dims), t)


class TestProducts:
    def test_khatri_rao_identity(self):
        kr = khatri_rao(np.eye(2), np.eye(2))
        expected = np.zeros((4, 2))
        expected[0, 0] = expected[3, 1] = 1
        np.testing.assert_array_equal(kr, expected)

    def test_khatri_rao_single_column_is_kron(self, rng):
        a, b = rng.random((3, 1)), rng.random((4, 1))
        np.testing.assert_allclose(khatri_rao(a, b), kronecker(a, b))

    def test_khatri_rao_columnwise_kron(self, rng):
        a, b = rng.random((3, 2)), rng.random((4, 2))
        oracle = np.column_stack([np.kron(a[:, j], b[:, j]) for j in range(2)])
        np.testing.assert_allclose(khatri_rao(a, b), oracle, rtol=0, atol=1e-15)

    def test_khatri_rao_column_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            khatri_rao(np.ones((2, 2)), np.ones((2, 3)))

    def test_kronecker_identities(self, rng):
        np.testing.assert_array_equal(kronecker(np.eye(2), np.eye(2)), np.eye(4))
        a = rng.random((2, 3))
        np.testing.assert_array_equal(kronecker(a, np.ones((1, 1))), a)

    def test_kronecker_mixed_product(self, rng):
        a, b = rng.random((2, 3)), rng.random((4, 2))
        x, y = rng.random(3), rng.random(2)
        np.testing.assert_allclose(kronecker(a, b) @ np.kron(x, y), np.kron(a @ x, b @ y))

    def test_hadamard(self, rng):
        a = rng.random((3, 3))
        np.testing.assert_array_equal(hadamard(a, np.ones((3, 3))), a)
        np.testing.assert_array_equal(hadamard(a, np.zeros((3, 3))), np.zeros((3, 3)))
        with pytest.raises(InvalidArgumentError):
            hadamard(a, np.ones((2, 3)))

    @given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 4), st.integers(0, 2**32 - 1))
    def test_gram_of_khatri_rao(self, la, lb, J, seed):
        r = np.random.default_rng(seed)
        a, b = r.random((la, J)), r.random((lb, J))
        kr = khatri_rao(a, b)
        assert rel(kr.T @ kr, hadamard(a.T @ a, b.T @ b)) <= 1e-10


class TestModeProducts:
    def test_order1_is_dot(self, rng):
        v, w = rng.random(4), rng.random(4)
        assert float(mode_vec_product(v, w, 0)) == pytest.approx(v @ w)

    def test_basis_vector_slices(self, rng):
        t = rng.random((3, 4, 5))
        e = np.zeros(4)
        e[2] = 1
        np.testing.assert_array_equal(mode_vec_product(t, e, 1), t[:, 2, :])

    def test_rank1_full_contraction(self, rng):
        u, v, w = rng.random(3), rng.random(4), rng.random(5)
        t = np.einsum("i,j,k->ijk", u, v, w)
        r = mode_vec_product(mode_vec_product(mode_vec_product(t, w, 2), v, 1), u, 0)
        assert float(r) == pytest.approx((u @ u) * (v @ v) * (w @ w), rel=1e-12)


class TestMttkrp:
    def test_ones_gives_column_sums(self, rng):
        t = rng.random((3, 4, 5))
        f = [np.ones((3, 1)), np.ones((4, 1)), np.ones((5, 1))]
        np.testing.assert_allclose(mttkrp(t, f, 1)[:, 0], unfold(t, 1).sum(axis=1))

    def test_matches_naive(self, rng):
        t = rng.random((3, 4, 5))
        f = [rng.random((L, 2)) for L in t.shape]
        for mode in range(3):
            assert rel(mttkrp(t, f, mode), naive_mttkrp(t, f, mode)) <= 1e-10

    def test_rank1_proportional(self, rng):
        u, v, w = rng.random(3), rng.random(4), rng.random(5)
        t = np.einsum("i,j,k->ijk", u, v, w)
        col = mttkrp(t, [None, v[:, None], w[:, None]], 0)[:, 0]
        np.testing.assert_allclose(col, u * (v @ v) * (w @ w), rtol=1e-12)

    def test_accepts_reduced_list(self, rng):
        t = rng.random((3, 4, 5))
        f = [rng.random((L, 2)) for L in t.shape]
        np.testing.assert_array_equal(mttkrp(t, f, 1), mttkrp(t, [f[0], f[2]], 1))

    def test_rank_mismatch(self, rng):
        with pytest.raises(InvalidArgumentError):
            mttkrp(rng.random((3, 4, 5)), [np.ones((3, 2)), None, np.ones((5, 3))], 1)

    @given(st.lists(st.integers(1, 6), min_size=3, max_size=4), st.integers(1, 4), st.data())
    def test_property(self, dims, J, data):
        seed = data.draw(st.integers(0, 2**32 - 1))
        r = np.random.default_rng(seed)
        t = r.random(dims)
        f = [r.random((L, J)) for L in dims]
        mode = data.draw(st.integers(0, len(dims) - 1))
        assert rel(mttkrp(t, f, mode), naive_mttkrp(t, f, mode)) <= 1e-10


class TestReconstruction:
    def test_superdiag(self):
        assert superdiag(1, 3).shape == (1, 1, 1) and superdiag(1, 3).sum() == 1
        s = superdiag(2, 3)
        assert s[0, 0, 0] == s[1, 1, 1] == 1 and np.count_nonzero(s) == 2
        np.testing.assert_array_equal(superdiag(3, 2), np.eye(3))
        assert frobenius(superdiag(4, 3)) == pytest.approx(2.0)

    def test_rank1_outer(self, rng):
        u, v, w = rng.random(3), rng.random(4), rng.random(5)
        t = cp_reconstruct([u[:, None], v[:, None], w[:, None]])
        np.testing.assert_allclose(t, np.einsum("i,j,k->ijk", u, v, w))

    def test_ones_rank2(self):
        t = cp_reconstruct([np.ones((2, 2)), np.ones((3, 2)), np.ones((4, 2))])
        np.testing.assert_array_equal(t, np.full((2, 3, 4), 2.0))

    def test_unfolding_identity(self, rng):
        f = [rng.random((L, 3)) for L in (3, 4, 5, 2)]
        t = cp_reconstruct(f)
        for n in range(4):
            others = [f[i] for i in reversed(range(4)) if i != n]
            np.testing.assert_allclose(unfold(t, n), f[n] @ khatri_rao_list(others).T, rtol=1e-12)

    def test_rse(self, rng):
        x = rng.random((2, 3))
        assert rse(x, x) == 0
        assert rse(x, np.zeros_like(x)) == pytest.approx(1.0)
        with pytest.raises(InvalidArgumentError):
            rse(np.zeros((2, 2)), np.ones((2, 2)))


class TestValidation:
    def test_negative_entry_named(self):
        t = np.ones((2, 2, 2))
        t[1, 0, 1] = -1
        with pytest.raises(DataError, match=r"\(1, 0, 1\)"):
            check_nonnegative(t)

    def test_first_negative_in_storage_order(self):
        t = np.ones((2, 2))
        t[0, 1] = -1
        t[1, 0] = -2
        with pytest.raises(DataError, match=r"\(1, 0\)"):
            check_nonnegative(t)

    @given(arrays(np.float64, (3, 3), elements=st.floats(0, 10)))
    def test_nonnegative_passes(self, a):
        check_nonnegative(a)
