import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra import numpy as hnp

from ginv.core import (
    DEFAULT_TOL,
    ToleranceProfile,
    approx,
    as_matrix,
    full_rank_factorization,
    inverse,
    numerical_rank,
    pierce_decompose,
    relative_residual,
)
from ginv.errors import DimensionMismatch, NotIdempotent, Singular, ZeroMatrix
from ginv.forge import make_rng

from conftest import crandn

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def complex_matrices(max_n=6, square=True):
    def build(shape):
        return hnp.arrays(np.float64, (2, *shape), elements=finite).map(
            lambda a: a[0] + 1j * a[1])
    if square:
        shapes = st.integers(1, max_n).map(lambda n: (n, n))
    else:
        shapes = st.tuples(st.integers(1, max_n), st.integers(1, max_n))
    return shapes.flatmap(build)


def low_rank(rng, n, r, cols=None):
    cols = n if cols is None else cols
    if r == 0:
        return np.zeros((n, cols), complex)
    return crandn(rng, n, r) @ crandn(rng, r, cols)


class TestToleranceProfile:
    def test_defaults(self):
        assert DEFAULT_TOL.as_dict() == {"rank_rtol": 1e-9, "residual_rtol": 1e-9, "cond_max": 1e8}

    @pytest.mark.parametrize("field", ["rank_rtol", "residual_rtol", "cond_max"])
    @pytest.mark.parametrize("bad", [0.0, -1.0, float("nan"), float("inf")])
    def test_rejects_non_positive(self, field, bad):
        with pytest.raises(ValueError):
            ToleranceProfile(**{field: bad})

    def test_rank_rtol_below_one(self):
        with pytest.raises(ValueError):
            ToleranceProfile(rank_rtol=1.0)

    def test_round_trip(self):
        p = ToleranceProfile(1e-7, 1e-6, 1e6)
        assert ToleranceProfile.from_dict(p.as_dict()) == p
        assert p.with_(cond_max=None) == p
        with pytest.raises(ValueError):
            ToleranceProfile.from_dict({"bogus": 1})


class TestResidual:
    def test_definition(self):
        x = np.array([[3, 0], [0, 4]], complex)
        y = np.zeros((2, 2))
        assert relative_residual(x, y) == pytest.approx(5.0)
        assert relative_residual(2 * np.eye(2), np.eye(2)) == pytest.approx(np.sqrt(2) / np.sqrt(2))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            relative_residual(np.eye(2), np.eye(3))

    def test_approx(self):
        assert approx(np.eye(2), np.eye(2) + 1e-12)
        assert not approx(np.eye(2), 2 * np.eye(2))


class TestNumericalRank:
    @pytest.mark.parametrize("m, expected", [
        (np.eye(3), 3),
        ([[0, 1], [0, 0]], 1),
        ([[1, 1], [1, 1]], 1),
        (np.zeros((3, 3)), 0),
    ])
    def test_examples(self, m, expected):
        assert numerical_rank(m) == expected

    def test_scale_anchors_cutoff(self):
        assert numerical_rank([[1e-12]]) == 1
        assert numerical_rank([[1e-12]], scale=1.0) == 0

    @settings(max_examples=60, deadline=None)
    @given(complex_matrices(square=False))
    def test_adjoint_invariance(self, m):
        assert numerical_rank(m) == numerical_rank(m.conj().T)


class TestFullRankFactorization:
    def test_diag_example(self):
        f, g = full_rank_factorization(np.diag([2.0, 0.0]))
        assert f.shape == (2, 1) and g.shape == (1, 2)
        assert relative_residual(f @ g, np.diag([2.0, 0.0])) < 1e-15

    def test_identity_and_ones(self):
        for m, r in ((np.eye(2), 2), (np.ones((2, 2)), 1)):
            f, g = full_rank_factorization(m)
            assert f.shape[1] == r
            assert relative_residual(f @ g, m) < 1e-14

    def test_zero_matrix(self):
        with pytest.raises(ZeroMatrix):
            full_rank_factorization(np.zeros((3, 2)))

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 8, 10])
    def test_reconstruction_suite(self, n):
        # 500 random matrices of each rank r in 1..n
        for r in range(1, n + 1):
            rng = make_rng(11, n, r)
            for _ in range(500):
                m = low_rank(rng, n, r)
                f, g = full_rank_factorization(m)
                assert f.shape[1] == r
                assert relative_residual(f @ g, m) <= DEFAULT_TOL.residual_rtol


class TestInverse:
    def test_examples(self):
        assert np.allclose(inverse(np.eye(3)), np.eye(3))
        swap = np.array([[0, 1], [1, 0]], complex)
        assert np.allclose(inverse(swap), swap)
        with pytest.raises(Singular):
            inverse([[0, 1], [0, 0]])

    def test_condition_gate(self):
        with pytest.raises(Singular):
            inverse(np.diag([1.0, 1e-9 * 2]), ToleranceProfile(rank_rtol=1e-12))

    def test_non_square(self):
        with pytest.raises(DimensionMismatch):
            inverse(np.ones((2, 3)))

    def test_round_trip_suite(self):
        rng = make_rng(12)
        for _ in range(200):
            n = int(rng.integers(1, 9))
            q1, _ = np.linalg.qr(crandn(rng, n, n))
            q2, _ = np.linalg.qr(crandn(rng, n, n))
            m = (q1 * rng.uniform(0.5, 3.0, n)) @ q2
            assert relative_residual(inverse(inverse(m)), m) <= 10 * DEFAULT_TOL.residual_rtol


class TestPierce:
    def test_trivial_idempotents(self):
        x = np.array([[1, 2], [3, 4]], complex)
        z = np.zeros((2, 2))
        blocks = pierce_decompose(x, np.eye(2))
        assert all(np.array_equal(b, e) for b, e in zip(blocks, (x, z, z, z)))
        blocks = pierce_decompose(x, z)
        assert all(np.array_equal(b, e) for b, e in zip(blocks, (z, z, z, x)))

    def test_diag_example(self):
        x = np.array([[1, 2], [3, 4]], complex)
        got = pierce_decompose(x, np.diag([1.0, 0.0]))
        want = ([[1, 0], [0, 0]], [[0, 2], [0, 0]], [[0, 0], [3, 0]], [[0, 0], [0, 4]])
        for g, w in zip(got, want):
            assert np.array_equal(g, np.array(w, complex))

    def test_rejects_non_idempotent(self):
        with pytest.raises(NotIdempotent):
            pierce_decompose(np.eye(2), 2 * np.eye(2))

    @settings(max_examples=100, deadline=None)
    @given(complex_matrices(max_n=6), st.integers(0, 2**32 - 1))
    def test_blocks_sum_to_x_orthogonal(self, x, seed):
        rng = make_rng(seed)
        n = x.shape[0]
        r = int(rng.integers(0, n + 1))
        q, _ = np.linalg.qr(crandn(rng, n, n))
        p = q[:, :r] @ q[:, :r].conj().T
        total = sum(pierce_decompose(x, p))
        assert relative_residual(total, x) <= 1e-14

    @settings(max_examples=60, deadline=None)
    @given(complex_matrices(max_n=5), st.integers(0, 2**32 - 1))
    def test_blocks_sum_to_x_oblique(self, x, seed):
        # oblique p: rounding grows with ||p||^2
        rng = make_rng(seed)
        n = x.shape[0]
        r = int(rng.integers(0, n + 1))
        s = crandn(rng, n, n) + 3 * np.eye(n)
        p = s @ np.diag([1.0] * r + [0.0] * (n - r)) @ np.linalg.inv(s)
        tol = ToleranceProfile(residual_rtol=1e-6)
        total = sum(pierce_decompose(x, p, tol))
        assert relative_residual(total, x) <= 1e-14 * max(1.0, np.linalg.cond(s) ** 2)


def test_as_matrix_coerces():
    assert as_matrix(3).shape == (1, 1)
    assert as_matrix([[1, 2]]).dtype == np.complex128
    with pytest.raises(DimensionMismatch):
        as_matrix(np.zeros((2, 2, 2)))
