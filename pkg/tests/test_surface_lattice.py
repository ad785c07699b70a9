import random
from fractions import Fraction

import pytest

from pstab.errors import IntegralityError, PreconditionError, VerificationFailure
from pstab.numerics import K, BoxSearchResult, IntBox, IntPoly
from pstab.surface_lattice import (
    F_P,
    F_Q,
    ONE,
    POINT,
    POLARISATION,
    SurfaceClass,
    SurfaceReport,
    bogomolov_delta,
    bogomolov_family_identity,
    c2_of,
    chern_character,
    cup,
    euler_pairing_surface,
    fm_surface_class,
    hilbert_polynomial,
    hrr_chi,
    intersect,
    m1_m2_invariants,
    stability_slope_test,
    twist_by,
    verify_exa_sheaf_lemma,
    verify_torsionfree_lemma,
)

CH_E = chern_character(1, 2 * F_Q, 2)


def test_intersection_table():
    assert cup(F_Q, F_P) == POINT
    assert cup(F_Q, F_Q) == SurfaceClass()
    assert cup(F_P, F_P) == SurfaceClass()
    assert intersect(POLARISATION, POLARISATION) == 6


def test_cup_is_associative_on_the_basis():
    basis = [ONE, F_Q, F_P, POINT]
    for x in basis:
        for y in basis:
            for z in basis:
                assert cup(cup(x, y), z) == cup(x, cup(y, z))


def test_hrr_chi():
    assert hrr_chi(ONE) == 0
    assert hrr_chi(POINT) == 1
    assert hrr_chi(F_Q) == 1
    with pytest.raises(IntegralityError):
        hrr_chi(SurfaceClass(0, 0, 0, Fraction(1, 2)))


def test_chern_character_of_e():
    assert CH_E == SurfaceClass(1, 2, 0, -2)
    with pytest.raises(PreconditionError):
        chern_character(1, ONE, 0)


def test_self_pairing_of_e():
    assert euler_pairing_surface(CH_E, CH_E) == -4


def test_hilbert_polynomial_of_e():
    assert hilbert_polynomial(CH_E) == IntPoly.from_expr(3 * K**2 + 7 * K)


def test_fourier_mukai_on_the_lattice():
    image = fm_surface_class(CH_E)
    assert image == SurfaceClass(2, -1, -2, 0)
    assert c2_of(image) == 2
    assert intersect(SurfaceClass(0, image.aq, image.ap, 0), POLARISATION) == -5
    assert fm_surface_class(fm_surface_class(CH_E)) == -CH_E
    assert euler_pairing_surface(image, image) == euler_pairing_surface(CH_E, CH_E)


def test_bogomolov_delta():
    assert bogomolov_delta(SurfaceClass(0, -1, -3, 0), 3) == -6
    assert bogomolov_family_identity().ok


def test_stability_slope_test():
    c1 = SurfaceClass(0, -1, -2, 0)
    assert stability_slope_test(c1, 2, SurfaceClass(0, -1, 0, 0))
    assert not stability_slope_test(c1, 2, SurfaceClass(0, 0, -2, 0))
    with pytest.raises(PreconditionError):
        stability_slope_test(c1, 0, ONE)


def test_exa_sheaf_lemma_on_a_small_box():
    report = verify_exa_sheaf_lemma({"n_q": (1, 6), "n_p": (-80, 0)})
    assert report.ok
    assert report.searches["length >= 0"].empty


def test_exa_sheaf_identities_hold_on_another_box():
    report = verify_exa_sheaf_lemma({"n_q": (1, 3), "n_p": (-30, 0)})
    assert all(c.ok for c in report.checks)


def test_torsionfree_lemma_on_a_small_box():
    report = verify_torsionfree_lemma({"n_p": (-12, 12), "n_q": (-12, 12)})
    assert report.ok
    assert report.witnesses == {}
    assert any("printed form" in n for n in report.notes)


def test_moduli_invariants():
    report = m1_m2_invariants()
    assert report.ok
    assert any("3*k**2 + 7*k" in n and "k**2 + 7*k" in n for n in report.notes)


def _random_class(rng: random.Random) -> SurfaceClass:
    return SurfaceClass(*(rng.randint(-9, 9) for _ in range(4)))


def test_cup_is_commutative():
    rng = random.Random(17)
    for _ in range(300):
        x, y = _random_class(rng), _random_class(rng)
        assert cup(x, y) == cup(y, x)


def test_twists_compose():
    rng = random.Random(19)
    for _ in range(200):
        x = _random_class(rng)
        m, n = rng.randint(-6, 6), rng.randint(-6, 6)
        assert twist_by(x, m + n) == twist_by(twist_by(x, m), n)


def test_case_two_invariants_come_from_the_transform():
    checks = {c.name: c for c in m1_m2_invariants().checks}
    assert checks["c2 of h^0(FM(E)) in case 2"].ok
    assert checks["c1 of h^0(FM(E)) in case 2"].actual == str(SurfaceClass(0, -1, -2, 0))


def test_failed_report_raises_verification_failure():
    report = SurfaceReport("demo")
    report.check("one is two", 1, 2)
    with pytest.raises(VerificationFailure, match="one is two"):
        report.raise_for_failure()
    m1_m2_invariants().raise_for_failure()


def test_witness_is_carried_by_the_failure():
    report = SurfaceReport("demo")
    report.searches["n_q + n_p > 0"] = BoxSearchResult(
        empty=False, box=IntBox.of({"n_q": (0, 1), "n_p": (0, 1)}), constraints=["n_q + n_p > 0"], witness={"n_q": 1, "n_p": 0}
    )
    with pytest.raises(VerificationFailure) as info:
        report.raise_for_failure()
    assert info.value.witness == {"n_q": 1, "n_p": 0}
