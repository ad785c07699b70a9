from fractions import Fraction

import pytest

from pstab.curve_ktheory import CurveClass, CurveCtx
from pstab.errors import DomainError, PreconditionError
from pstab.numerics import K, IntPoly
from pstab.sheaf_euler import (
    SmSpec,
    cone_pair_classes,
    f_rd_class,
    f_rd_slope_argument,
    f_rd_test_class,
    gen_ideal_sheaf_conditions,
    gen_sheaf_conditions,
    gen_surface_pipeline,
    lemma51_bound,
    lemma51_count_gap,
    lemma54_threshold,
    sm_rank_det,
    torsionfree_length_check,
)


@pytest.mark.parametrize("n", range(1, 7))
def test_sm_zero_is_the_euler_sequence(n):
    assert sm_rank_det(SmSpec(n + 1, 0)) == (n, -1)


@pytest.mark.parametrize("m", range(1, 10))
def test_sm_on_a_line_is_a_line_bundle(m):
    assert sm_rank_det(SmSpec(2, m - 1)) == (1, -m)


def test_sm_general_values():
    assert sm_rank_det(SmSpec(3, 1)) == (3, -3)
    with pytest.raises(DomainError):
        SmSpec(0, 1)
    with pytest.raises(PreconditionError):
        sm_rank_det(SmSpec(3, 0, a_degree=1))


def test_lemma51_count_gap_turns_positive_at_the_bound():
    assert lemma51_bound(3, 2) == 4
    assert lemma51_count_gap(3, 2, 3) == 0
    assert lemma51_count_gap(3, 2, 4) == 3
    for dim_u in range(1, 5):
        for n in range(1, 4):
            bound = lemma51_bound(dim_u, n)
            assert lemma51_count_gap(dim_u, n, bound) > 0


def test_lemma54_threshold_clamps_at_zero():
    assert lemma54_threshold(3, 0) == 0
    assert lemma54_threshold(3, 4) == 6
    with pytest.raises(DomainError):
        lemma54_threshold(3, -1)


def test_cone_pair_classes_example():
    a, b = cone_pair_classes(CurveCtx(2), 2, 3)
    assert a == CurveClass(1, -23)
    assert b == CurveClass(5, -25)


def test_f_rd_classes():
    classes = f_rd_class(CurveCtx(2), 2, 3)
    assert classes.cokernel == CurveClass(4, -2)
    assert classes.det_exponent == -2
    assert classes.test_class == CurveClass(4, 10)
    assert f_rd_test_class(CurveCtx(2), 2, 3) == classes.test_class


def test_f_rd_degree_identity_on_a_grid():
    for g in range(0, 6):
        for r in range(1, 9):
            for d in range(-40, 41, 7):
                c = f_rd_class(CurveCtx(g), r, d)
                assert c.b_class.degree - c.a_class.degree == r * r * (g - 1) - r * d


def test_slope_argument_holds():
    result = f_rd_slope_argument(CurveCtx(2), 2, 3)
    assert result.holds
    assert result.quotients_checked > 0
    assert result.weak_form_failures == []


def test_slope_argument_weak_form_fails_in_genus_zero():
    result = f_rd_slope_argument(CurveCtx(0), 2, 3)
    assert result.holds
    assert CurveClass(1, 1) in result.weak_form_failures


def test_sheaf_conditions_on_a_point():
    out = gen_sheaf_conditions(0, IntPoly.from_expr(K * 0 + 3))
    assert len(out.items) == 1
    assert out.b_summands == ["0"]


def test_sheaf_conditions_on_a_curve():
    out = gen_sheaf_conditions(1, IntPoly.from_expr(2 * K + 3))
    assert out.b_summands == ["O(-1)"]
    assert out.metadata["sm_check"] == [1, -1]
    counted = [c for c in out.items if c.degree == 0 and c.block == "sheaf"]
    assert sorted((c.twist, c.expected) for c in counted) == [(-1, 1), (0, 3)]
    assert not out.warnings


def test_sheaf_conditions_on_a_curve_with_negative_value():
    out = gen_sheaf_conditions(1, IntPoly.from_expr(2 * K + 1))
    assert out.warnings
    assert out.b_summands == ["O(1)"]


def test_sheaf_conditions_on_a_surface():
    out = gen_sheaf_conditions(2, IntPoly.from_expr(K**2 + 3 * K + 2), dim_v=3)
    assert out.constants == {"m": 2, "p'(-1)": 0}
    assert out.blocks == ["sheaf", "iii_1", "iii_2", "iii_3", "iii_4", "iii_5"]
    assert len(out.b_summands) == 5
    assert out.block("iii_4")[0].obj == "O"
    assert out.block("iii_2")[0].det_degree == -2


def test_sheaf_conditions_preconditions():
    p = IntPoly.from_expr(K**2 + 1)
    with pytest.raises(PreconditionError):
        gen_sheaf_conditions(2, p)
    with pytest.raises(PreconditionError):
        gen_sheaf_conditions(1, p)
    with pytest.raises(DomainError):
        gen_sheaf_conditions(3, p)


def test_surface_pipeline_blocks():
    p = IntPoly.from_expr(K**2 + 3 * K + 2)
    out = gen_surface_pipeline(p, {"m0": 0, "m1": 3, "m2": 2, "m3": 1}, rank=2)
    assert out.blocks == ["sheaf conditions", "torsion freeness", "local freeness", "semistability"]
    assert len(out.block("torsion freeness")) == 6
    assert len(out.block("local freeness")) == 2
    assert len(out.block("semistability")) == 2
    assert out.metadata["active_pair"][1] == "O_H~^(5)(-1)"


def test_surface_pipeline_needs_every_constant():
    with pytest.raises(PreconditionError, match="m3"):
        gen_surface_pipeline(IntPoly.from_expr(K + 1), {"m0": 0, "m1": 1, "m2": 1})


def test_ideal_sheaf_conditions():
    out = gen_ideal_sheaf_conditions(2, 5)
    assert len(out.items) == 4
    assert {c.twist for c in out.items} == {2, 5}
    assert {c.expected for c in out.items if c.degree == 1} == {2}


def test_torsionfree_length_check():
    assert torsionfree_length_check(2, 1)
    assert not torsionfree_length_check(0, 0)


def test_sm_rank_over_determinant():
    for dim_v in range(2, 9):
        for m in range(0, 11):
            rank, det = sm_rank_det(SmSpec(dim_v, m))
            assert Fraction(rank, abs(det)) == Fraction(dim_v - 1, m + 1)
