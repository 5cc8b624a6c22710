import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ginv.blocks import (
    BlockInstance,
    block_formula,
    block_hypotheses,
    permutation_conjugate,
    swap_route,
    transpose_route,
)
from ginv.core import DEFAULT_TOL, frobenius, relative_residual
from ginv.errors import DimensionMismatch, HypothesisViolation
from ginv.forge import forge_group_invertible, forge_lem31_instance, forge_thm32_instance, make_rng
from ginv.spectral import group_inverse

from conftest import crandn

SWAP = BlockInstance(0, 1, 1, 0)
WITNESS = BlockInstance(np.diag([1, 0]), [[0, 0], [0, 1]], [[0, 0], [0, 1]], np.diag([1, 0]))


def eye_instance(k=2):
    return BlockInstance(np.eye(k), np.zeros((k, k)), np.zeros((k, k)), np.eye(k))


class TestBlockInstance:
    def test_assemble_split_round_trip(self, rng):
        m = crandn(rng, 5, 5)
        inst = BlockInstance.split(m, 2, lam=1j)
        assert (inst.m, inst.n, inst.lam) == (2, 3, 1j)
        assert np.array_equal(inst.assemble(), m)

    def test_shape_validation(self):
        with pytest.raises(DimensionMismatch):
            BlockInstance(np.eye(2), np.zeros((2, 1)), np.zeros((2, 2)), np.eye(1))
        with pytest.raises(DimensionMismatch):
            BlockInstance.split(np.eye(3), 3)


class TestHypotheses:
    def test_scalar_swap(self):
        rep = block_hypotheses(SWAP, "THM32")
        assert all(v == 0 for v in rep.residuals.values())
        assert all(rep.flags.values()) and rep.passes()
        assert set(rep.residuals) == {"AB", "BD", "B(CB)^pi", "C(BC)^pi", "DC-lambda*CA"}

    def test_identity_diagonal(self):
        rep = block_hypotheses(eye_instance(), "THM32")
        assert all(v == 0 for v in rep.residuals.values()) and rep.passes()

    def test_ab_nonzero(self):
        rep = block_hypotheses(BlockInstance(1, 1, 0, 0), "THM32")
        assert rep.residuals["AB"] == pytest.approx(1.0)
        assert not rep.passes() and "AB" in rep.failing()

    def test_labels_per_theorem(self):
        inst = eye_instance()
        assert set(block_hypotheses(inst, "LEM31").residuals) == {"B", "D^pi C"}
        assert set(block_hypotheses(inst, "COR33").residuals) == {
            "CA", "DC", "B(CB)^pi", "C(BC)^pi", "AB-lambda*BD"}
        assert set(block_hypotheses(inst, "THM35").residuals) == {
            "CA", "DC", "(CB)^pi C", "(BC)^pi B", "AB-lambda*BD"}
        assert set(block_hypotheses(inst, "COR36").residuals) == {
            "AB", "BD", "(BC)^pi B", "(CB)^pi C", "DC-lambda*CA"}

    def test_missing_group_inverse_flagged(self):
        nil = np.array([[0, 1], [0, 0]], complex)
        inst = BlockInstance(nil, np.zeros((2, 2)), np.zeros((2, 2)), np.eye(2))
        rep = block_hypotheses(inst, "LEM31")
        assert rep.flags["A"] is False and "exists A" in rep.failing()

    def test_unknown_theorem(self):
        with pytest.raises(ValueError):
            block_hypotheses(SWAP, "THM99")

    def test_aliases(self):
        assert block_hypotheses(SWAP, "cor34").theorem_id == "THM32"
        assert block_hypotheses(SWAP, "COR37").theorem_id == "THM35"


class TestFormulas:
    def test_lem31_scalar(self):
        got = block_formula(BlockInstance(1, 0, 1, 1), "LEM31")
        assert np.allclose(got, [[1, 0], [-1, 1]])
        assert np.allclose(got, np.linalg.inv([[1, 0], [1, 1]]))

    def test_thm32_scalar_swap(self):
        oracle = group_inverse(SWAP.assemble()).inverse
        assert np.allclose(oracle, [[0, 1], [1, 0]])
        assert np.allclose(block_formula(SWAP, "THM32", "STATED"), 0)
        assert np.allclose(block_formula(SWAP, "THM32", "PROOF"), 0)
        assert np.allclose(block_formula(SWAP, "THM32", "CORRECTED"), oracle)

    def test_thm32_identity_diagonal(self):
        inst = eye_instance()
        stated = block_formula(inst, "THM32", "STATED")
        assert np.allclose(stated[:2, :2], 2 * np.eye(2))
        assert np.allclose(block_formula(inst, "THM32", "CORRECTED"), np.eye(4))

    def test_all_nonzero_witness(self):
        rep = block_hypotheses(WITNESS, "THM32")
        assert rep.passes()
        assert all(frobenius(getattr(WITNESS, x)) > 0 for x in "ABCD")
        oracle = group_inverse(WITNESS.assemble()).inverse
        assert relative_residual(block_formula(WITNESS, "THM32", "CORRECTED"), oracle) < 1e-14
        assert relative_residual(block_formula(WITNESS, "THM32", "STATED"), oracle) > 0.1

    def test_hypothesis_violation(self):
        with pytest.raises(HypothesisViolation) as info:
            block_formula(BlockInstance(1, 1, 0, 0), "THM32", "CORRECTED")
        assert "AB" in info.value.failing

    def test_variant_validation(self):
        with pytest.raises(ValueError):
            block_formula(BlockInstance(1, 0, 1, 1), "LEM31", "PROOF")
        with pytest.raises(ValueError):
            block_formula(SWAP, "THM32", "GUESS")

    def test_lem31_forged(self):
        rng = make_rng(31)
        for _ in range(50):
            m, n = (int(v) for v in rng.integers(1, 5, 2))
            inst = forge_lem31_instance(m, n, rng)
            oracle = group_inverse(inst.assemble()).inverse
            assert relative_residual(block_formula(inst, "LEM31"), oracle) <= 1e-8

    def test_corrected_matches_oracle_on_forged(self):
        rng = make_rng(32)
        for i in range(60):
            m, n = (int(v) for v in rng.integers(1, 5, 2))
            inst, _ = forge_thm32_instance(m, n, rng, conjugate=i % 2 == 1)
            routed = {"THM32": inst, "COR33": swap_route(inst), "THM35": transpose_route(inst),
                      "COR36": swap_route(transpose_route(inst))}
            for tid, x in routed.items():
                want = group_inverse(x.assemble()).inverse
                assert relative_residual(block_formula(x, tid, "CORRECTED"), want) <= 1e-8

    def test_ca_and_dc_vanish_under_thm32(self):
        # BD = 0 and DC = lam CA force BCA = 0, hence CA = C(BC)^# BCA = 0
        rng = make_rng(33)
        for i in range(60):
            m, n = (int(v) for v in rng.integers(1, 5, 2))
            inst, _ = forge_thm32_instance(m, n, rng, conjugate=True)
            assert frobenius(inst.C @ inst.A) <= 1e-9
            assert frobenius(inst.D @ inst.C) <= 1e-9


class TestRoutes:
    def test_permutation_example(self, rng):
        a, b, c, d = crandn(rng, 2, 2), crandn(rng, 2, 3), crandn(rng, 3, 2), crandn(rng, 3, 3)
        m = np.block([[a, b], [c, d]])
        jm = permutation_conjugate(m, 2, 3)
        assert np.array_equal(jm, np.block([[d, c], [b, a]]))
        assert np.array_equal(permutation_conjugate(jm, 3, 2), m)
        assert np.array_equal(swap_route(BlockInstance(a, b, c, d)).assemble(), jm)

    def test_permutation_shape(self):
        with pytest.raises(DimensionMismatch):
            permutation_conjugate(np.eye(3), 1, 1)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
    def test_oracle_commutes_with_routes(self, m, n, seed):
        rng = make_rng(seed)
        mat = forge_group_invertible(m + n, int(rng.integers(0, m + n + 1)), rng)
        x = group_inverse(mat).inverse
        jx = group_inverse(permutation_conjugate(mat, m, n)).inverse
        assert relative_residual(jx, permutation_conjugate(x, m, n)) <= 1e-10
        assert relative_residual(group_inverse(mat.T).inverse, x.T) <= 1e-10

    def test_transpose_route_involution(self, rng):
        inst = BlockInstance(crandn(rng, 2, 2), crandn(rng, 2, 3), crandn(rng, 3, 2),
                             crandn(rng, 3, 3), 2j)
        t = transpose_route(inst)
        assert np.array_equal(t.assemble(), inst.assemble().T)
        assert t.lam == pytest.approx(1 / 2j)
        back = transpose_route(t)
        assert np.array_equal(back.assemble(), inst.assemble()) and back.lam == pytest.approx(2j)

    def test_transpose_maps_hypotheses(self):
        rng = make_rng(34)
        pairs = {"CA": "AB", "DC": "BD", "(CB)^pi C": "B(CB)^pi",
                 "(BC)^pi B": "C(BC)^pi", "AB-lambda*BD": "DC-lambda*CA"}
        for _ in range(30):
            m, n = (int(v) for v in rng.integers(1, 5, 2))
            inst = transpose_route(forge_thm32_instance(m, n, rng, conjugate=True)[0])
            r35 = block_hypotheses(inst, "THM35")
            r32 = block_hypotheses(transpose_route(inst), "THM32")
            assert r35.passes() == r32.passes()
            for k35, k32 in pairs.items():
                assert abs(r35.residuals[k35] - r32.residuals[k32]) <= 1e-12
