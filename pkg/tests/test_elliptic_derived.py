import random
from itertools import combinations_with_replacement

import pytest

from pstab.curve_ktheory import CurveClass, euler_pairing
from pstab.elliptic_derived import (
    ELLIPTIC,
    Atom,
    EllipticObject,
    fm_atom,
    fm_kclass,
    fm_object,
    negate_label,
    object_hom,
    p_class_max_isoclasses,
    p_equivalence_classes,
    p_equivalent,
    theta_degree_general,
    theta_torsion,
    torsion_isoclasses,
)
from pstab.errors import DomainError, PreconditionError


@pytest.mark.parametrize(
    "source,image",
    [((1, 0), (0, -1)), ((1, -3), (-3, -1)), ((1, 2), (2, -1)), ((0, 1), (1, 0))],
)
def test_fm_kclass_vectors(source, image):
    assert fm_kclass(CurveClass(*source)) == CurveClass(*image)


def test_fm_kclass_twice_is_negation():
    rng = random.Random(11)
    for _ in range(1000):
        c = CurveClass(rng.randint(-50, 50), rng.randint(-50, 50))
        assert fm_kclass(fm_kclass(c)) == -c


def test_negate_label_fixes_base_point():
    assert negate_label("P") == "P"
    assert negate_label("x") == "-x"
    assert negate_label("-x") == "x"


def test_fm_of_negative_line_bundle_lands_in_degree_one():
    image = fm_atom(Atom(CurveClass(1, -3)))
    assert image == Atom(CurveClass(3, 1), 1)
    assert image.signed_class == fm_kclass(CurveClass(1, -3))


def test_fm_of_structure_sheaf_is_skyscraper_at_base_point():
    image = fm_object(EllipticObject.sheaf(CurveClass(1, 0)))
    assert image == EllipticObject((Atom(CurveClass(0, 1), 1, ("P",)),))


def test_fm_of_labelled_degree_zero_bundle_negates_points():
    image = fm_object(EllipticObject.sheaf(CurveClass(2, 0), ("q", "r")))
    assert image.atoms == (Atom(CurveClass(0, 2), 1, ("-q", "-r")),)


def test_fm_twice_on_torsion_is_inversion_and_shift():
    t = EllipticObject.torsion(["x"])
    twice = fm_object(fm_object(t))
    assert twice == EllipticObject((Atom(CurveClass(0, 1), 1, ("-x",)),))
    assert twice.kclass == -t.kclass


def test_atom_validation():
    with pytest.raises(DomainError):
        Atom(CurveClass(0, 2), 0, ("x",))
    with pytest.raises(DomainError):
        Atom(CurveClass(1, 1), 0, ("x",))
    with pytest.raises(DomainError):
        Atom(CurveClass(0, 0))
    with pytest.raises(DomainError):
        Atom(CurveClass(-1, 2))


def test_object_class_uses_signed_atoms():
    o = EllipticObject((Atom(CurveClass(0, 2), 1, ("x", "y")), Atom(CurveClass(1, 0))))
    assert o.kclass == CurveClass(1, -2)
    assert not o.is_torsion
    assert o.shifts == {0, 1}


def test_semistable_sheaf_detection():
    assert EllipticObject.sheaf(CurveClass(2, 1)).is_semistable_sheaf()
    mixed = EllipticObject((Atom(CurveClass(1, 0)), Atom(CurveClass(1, 1))))
    assert not mixed.is_semistable_sheaf()
    assert not EllipticObject.sheaf(CurveClass(1, 0), shift=1).is_semistable_sheaf()


def test_theta_divisor_of_torsion():
    theta = theta_torsion(EllipticObject.torsion(["y", "x", "x"]))
    assert theta.lines == ("x", "x", "y")
    assert theta.degree == 3
    assert theta.multiplicities == {"x": 2, "y": 1}
    with pytest.raises(PreconditionError):
        theta_torsion(EllipticObject.sheaf(CurveClass(1, 0)))


def test_p_equivalence_merges_isoclasses_at_one_point():
    objects = torsion_isoclasses("P", 4)
    assert len(objects) == 5
    assert p_equivalence_classes(objects) == [objects]
    assert p_equivalent(objects[0], objects[-1])
    assert not p_equivalent(EllipticObject.torsion(["x", "x"]), EllipticObject.torsion(["x", "y"]))


def test_partition_bound():
    assert [p_class_max_isoclasses(r) for r in range(1, 7)] == [1, 2, 3, 5, 7, 11]
    with pytest.raises(DomainError):
        p_class_max_isoclasses(0)


@pytest.mark.parametrize("g,r,d,expected", [(2, 2, 3, 45), (1, 1, 0, 4), (0, 1, 5, 0), (1, 2, 1, 25)])
def test_theta_degree_general(g, r, d, expected):
    assert theta_degree_general(g, r, d) == expected


def test_object_hom_bundle_to_torsion():
    hom = object_hom(ELLIPTIC, EllipticObject.sheaf(CurveClass(1, -3)), EllipticObject.torsion(["x", "y"]))
    assert hom.dims == {0: 2}
    assert hom.determined


def test_object_hom_respects_shifts():
    target = EllipticObject.torsion(["x", "y"]).shifted(1)
    hom = object_hom(ELLIPTIC, EllipticObject.sheaf(CurveClass(1, 0)), target)
    assert hom.dims == {1: 2}


def test_object_hom_between_torsion_sheaves():
    at_x = EllipticObject((Atom(CurveClass(0, 2), 0, ("x", "x")),))
    assert object_hom(ELLIPTIC, at_x, EllipticObject.torsion(["x"])).dims == {0: 1, 1: 1}
    assert object_hom(ELLIPTIC, at_x, EllipticObject.torsion(["y"])).dims == {}
    mixed = object_hom(ELLIPTIC, EllipticObject.torsion(["x", "y"]), EllipticObject.torsion(["x"]))
    assert mixed.indeterminate == {0, 1}
    assert mixed.get(0) is None


def test_fm_preserves_the_euler_pairing():
    rng = random.Random(13)
    for _ in range(1000):
        a, b = (CurveClass(rng.randint(-30, 30), rng.randint(-30, 30)) for _ in range(2))
        assert euler_pairing(ELLIPTIC, fm_kclass(a), fm_kclass(b)) == euler_pairing(ELLIPTIC, a, b)


def test_p_equivalence_is_an_equivalence_relation():
    objects = [
        EllipticObject.torsion(support)
        for length in range(1, 4)
        for support in combinations_with_replacement(["x", "y", "z"], length)
    ]
    objects += torsion_isoclasses("x", 3)
    for s in objects:
        assert p_equivalent(s, s)
        for t in objects:
            assert p_equivalent(s, t) == p_equivalent(t, s)
            if not p_equivalent(s, t):
                continue
            for u in objects:
                if p_equivalent(t, u):
                    assert p_equivalent(s, u)
