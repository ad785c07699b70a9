"""
Sheaf-condition generators and Euler-triangle numerics.

The symmetric-power Euler complex S^m(V, a, b) gives the test objects that
force an object of D^b(X) to be a sheaf with a given Hilbert polynomial, and
the bundle F_{r,d} whose Hom-vanishing characterises semistability on a curve.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from pstab.curve_ktheory import CurveClass, CurveCtx, canonical_class, destabilizes, dual, euler_pairing, slope, twist
from pstab.errors import DomainError, InvariantViolation, PreconditionError
from pstab.numerics import IntPoly, binomial, ceil_div, poly_derivative_discrete

logger = logging.getLogger(__name__)

NONZERO = "i!=0"
SURFACE_CONSTANTS = ("m0", "m1", "m2", "m3")


# ==========================================
# S^m(V, O, L)
# ==========================================
@dataclass(frozen=True)
class SmSpec:
    """S^m(V, a, b) with a = O(a_degree) and b = L^{b_degree} for a base-point free L."""

    dim_v: int
    m: int
    a_degree: int = 0
    b_degree: int = 1

    def __post_init__(self):
        if self.dim_v < 1:
            raise DomainError(f"dim V must be >= 1, got {self.dim_v}")
        if self.m < 0:
            raise DomainError(f"m must be >= 0, got {self.m}")

    def __str__(self) -> str:
        return f"S^{self.m}(V,O,O(1))"


def sm_rank_det(spec: SmSpec) -> Tuple[int, int]:
    """(rank, exponent of L in the determinant) of S^m(V, O, L)."""
    if spec.a_degree != 0 or spec.b_degree != 1:
        raise PreconditionError(f"rank/det formulas need the base pair (O, L), got degrees ({spec.a_degree}, {spec.b_degree})")
    top = spec.m + spec.dim_v - 1
    return binomial(top, spec.m + 1), -binomial(top, spec.m)


def lemma51_bound(dim_u: int, n: int) -> int:
    """Smallest m with m >= (dim U - 1) n."""
    if dim_u < 1 or n < 1:
        raise DomainError(f"need dim U >= 1 and n >= 1, got ({dim_u}, {n})")
    return (dim_u - 1) * n


def lemma51_count_gap(dim_u: int, n: int, m: int) -> int:
    """
    dim U * C(n+m, n) - (dim U - 1) * C(n+1+m, n).

    Sections of U (x) O(m) on P^n minus the relations imposed by the
    (dim U - 1)-dimensional kernel; positive exactly when m >= (dim U - 1) n.
    """
    if dim_u < 1 or n < 1 or m < 0:
        raise DomainError(f"need dim U >= 1, n >= 1, m >= 0, got ({dim_u}, {n}, {m})")
    return dim_u * binomial(n + m, n) - (dim_u - 1) * binomial(n + 1 + m, n)


def lemma54_threshold(dim_v: int, hom_bc: int) -> int:
    if dim_v < 1:
        raise DomainError(f"dim V must be >= 1, got {dim_v}")
    if hom_bc < 0:
        raise DomainError(f"hom(b, c) must be >= 0, got {hom_bc}")
    return max(0, (dim_v - 1) * (hom_bc - 1))


# ==========================================
# The bundles A, B and F_{r,d} on a curve
# ==========================================
@dataclass(frozen=True)
class FrdClasses:
    a_class: CurveClass
    b_class: CurveClass
    cokernel: CurveClass
    test_class: CurveClass

    @property
    def det_exponent(self) -> int:
        """det(F) = L_1^{det_exponent}."""
        return self.cokernel.degree


def cone_pair_classes(ctx: CurveCtx, r: int, d: int) -> Tuple[CurveClass, CurveClass]:
    """The line bundle A and the rank r^2+1 bundle B with cokernel F_{r,d}."""
    if r < 1:
        raise DomainError(f"rank must be >= 1, got {r}")
    g, c = ctx.genus, ceil_div(d, r)
    a = CurveClass(1, r * d - 2 * g * r * r - (r * r + 1) * c - g - 1)
    b = CurveClass(r * r + 1, (r * r + 1) * (-g - 1 - c))
    return a, b


def f_rd_class(ctx: CurveCtx, r: int, d: int) -> FrdClasses:
    a, b = cone_pair_classes(ctx, r, d)
    g = ctx.genus
    cokernel = b - a
    if cokernel != CurveClass(r * r, r * r * (g - 1) - r * d):
        raise InvariantViolation(f"deg B - deg A = {cokernel.degree} != r^2(g-1) - rd for r={r}, d={d}, g={g}")
    return FrdClasses(a, b, cokernel, _serre_twist(ctx, cokernel))


def f_rd_test_class(ctx: CurveCtx, r: int, d: int) -> CurveClass:
    """F^dual (x) omega: rank r^2, degree r^2(g-1) + rd, slope mu(E) + g - 1."""
    return f_rd_class(ctx, r, d).test_class


def _serre_twist(ctx: CurveCtx, c: CurveClass) -> CurveClass:
    return twist(dual(c), canonical_class(ctx).degree)


@dataclass
class SlopeGapResult:
    holds: bool
    quotients_checked: int = 0
    counterexamples: List[CurveClass] = field(default_factory=list)
    weak_form_failures: List[CurveClass] = field(default_factory=list)


def f_rd_slope_argument(ctx: CurveCtx, r: int, d: int, degree_bound: int = 40) -> SlopeGapResult:
    """
    For every destabilising quotient class E'' of (r, d), check that
    mu(F) > mu(E'') + (g - 1) for the test class F, i.e. chi(E'', F) > 0.

    The weaker inequality mu(F) > mu(E'') - (g - 1) is tracked separately;
    it fails only in genus 0.
    """
    e = CurveClass(r, d)
    test = f_rd_test_class(ctx, r, d)
    mu_f, g = slope(test), ctx.genus
    result = SlopeGapResult(holds=True)
    for rq in range(1, r):
        for dq in range(-degree_bound, degree_bound + 1):
            q = CurveClass(rq, dq)
            if not destabilizes(ctx, e, q):
                continue
            result.quotients_checked += 1
            if not mu_f > slope(q) + (g - 1) or euler_pairing(ctx, q, test) <= 0:
                result.holds = False
                result.counterexamples.append(q)
            if not mu_f > slope(q) - (g - 1):
                result.weak_form_failures.append(q)
    return result


# ==========================================
# Condition lists
# ==========================================
@dataclass(frozen=True)
class SheafCondition:
    block: str
    obj: str
    degree: Union[int, str]
    twist: Union[int, str]
    expected: Optional[int]
    note: str = ""
    rank: Optional[int] = None
    det_degree: Optional[int] = None

    def as_dict(self) -> Dict:
        return {
            "block": self.block,
            "object": self.obj,
            "degree": self.degree,
            "twist": self.twist,
            "expected": self.expected,
            "rank": self.rank,
            "det_degree": self.det_degree,
            "note": self.note,
        }


@dataclass
class ConditionList:
    items: List[SheafCondition] = field(default_factory=list)
    constants: Dict[str, int] = field(default_factory=dict)
    b_summands: List[str] = field(default_factory=list)
    metadata: Dict[str, Union[int, str, List]] = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def add(self, *conditions: SheafCondition) -> None:
        for c in conditions:
            if c.expected is not None and c.expected < 0:
                raise InvariantViolation(f"negative expected dimension in {c}")
            self.items.append(c)

    def warn(self, message: str) -> None:
        logger.warning(message)
        self.warnings.append(message)

    @property
    def blocks(self) -> List[str]:
        seen: List[str] = []
        for c in self.items:
            if c.block not in seen:
                seen.append(c.block)
        return seen

    def block(self, name: str) -> List[SheafCondition]:
        return [c for c in self.items if c.block == name]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([c.as_dict() for c in self.items])

    def as_dict(self) -> Dict:
        return {
            "items": [c.as_dict() for c in self.items],
            "constants": dict(sorted(self.constants.items())),
            "b": self.b_summands,
            "metadata": self.metadata,
            "warnings": self.warnings,
        }


def _twist_label(k: int) -> str:
    return "O" if k == 0 else f"O({k})"


def _cohomology_grid(out: ConditionList, block: str, p: IntPoly, vanishing: Sequence[int], counted: Sequence[int]) -> None:
    """H^i(a(k)) = 0 for i != 0 on `vanishing`, h^0(a(k)) = p(k) on `counted`."""
    for k in vanishing:
        out.add(SheafCondition(block, _twist_label(-k), NONZERO, k, 0, f"H^i(a({k})) = 0"))
    for k in counted:
        value = p(k)
        if value < 0:
            out.warn(f"p({k}) = {value} < 0: no object has h^0(a({k})) = {value}, the conditions are unsatisfiable")
            out.add(SheafCondition(block, _twist_label(-k), 0, k, None, f"p({k}) = {value} is negative"))
        else:
            out.add(SheafCondition(block, _twist_label(-k), 0, k, value, f"h^0(a({k})) = p({k})"))


def gen_sheaf_conditions(n: int, p: IntPoly, dim_v: Optional[int] = None) -> ConditionList:
    """
    Conditions forcing an object a of D^b(X), dim X = n <= 2, to be a sheaf
    with Hilbert polynomial p, together with the test sheaf b.
    """
    if n not in (0, 1, 2):
        raise DomainError(f"dimension must be 0, 1 or 2, got {n}")
    if p.degree > n:
        raise PreconditionError(f"Hilbert polynomial {p} has degree {p.degree} > dim X = {n}")

    out = ConditionList(metadata={"dimension": n, "hilbert_polynomial": str(p)})
    if n == 0:
        out.add(SheafCondition("sheaf", "O", NONZERO, 0, 0, "H^i(a) = 0"))
        out.b_summands = ["0"]
        return out

    if n == 1:
        m = p(-1)
        _cohomology_grid(out, "sheaf", p, (-1, 0) + ((m,) if m not in (-1, 0) else ()), (-1, 0))
        if m < 0:
            out.warn(f"p(-1) = {m} < 0 cannot be the dimension of a vector space")
        out.b_summands = [_twist_label(-m)]
        out.add(SheafCondition("b", _twist_label(-m), NONZERO, 0, 0, "Hom(b, a[i]) = 0", rank=1, det_degree=-m))
        if m >= 1:
            rank, det = sm_rank_det(SmSpec(2, m - 1))
            out.metadata["sm_check"] = [rank, det]
            if (rank, det) != (1, -m):
                raise InvariantViolation(f"S^{m - 1}(V,O,O(1)) with dim V = 2 is not O(-{m}): got ({rank}, {det})")
        return out

    if dim_v is None:
        raise PreconditionError("dimension 2 needs dim V with a surjective evaluation map")
    raw_m = (dim_v - 1) * (p(0) - 1)
    m = lemma54_threshold(dim_v, p(0))
    if raw_m < 0:
        out.warn(f"m = (dim V - 1)(p(0) - 1) = {raw_m} is negative; using m = 0")
    dp = poly_derivative_discrete(p)
    shift = dp(-1)
    rank, det = sm_rank_det(SmSpec(dim_v, m))
    out.constants.update({"m": m, "p'(-1)": shift})
    out.metadata.update({"dim_v": dim_v, "sm_rank": rank, "sm_det": det, "derivative": str(dp)})

    _cohomology_grid(out, "sheaf", p, (-2, -1, 0), (-2, -1, 0))
    sm = str(SmSpec(dim_v, m))
    families = [
        ("iii_1", sm, rank, det),
        ("iii_2", f"{sm}(x)O(1)", rank, det + rank),
        ("iii_3", f"{sm}(x)O({-shift})", rank, det - rank * shift),
        ("iii_4", _twist_label(-shift), 1, -shift),
        ("iii_5", _twist_label(1 - shift), 1, 1 - shift),
    ]
    for block, obj, r, det_degree in families:
        out.add(SheafCondition(block, obj, NONZERO, 0, 0, "Hom(b_j, a[i]) = 0", rank=r, det_degree=det_degree))
    out.b_summands = [obj for _, obj, _, _ in families]
    return out


def gen_surface_pipeline(
    p: IntPoly,
    constants: Dict[str, int],
    dim_v: int = 3,
    rank: Optional[int] = None,
) -> ConditionList:
    """
    The four condition blocks forcing a semistable bundle with Hilbert
    polynomial p on a surface. m0..m3 exist but are not computable from p;
    they must be supplied.
    """
    missing = [name for name in SURFACE_CONSTANTS if name not in constants]
    if missing:
        raise PreconditionError(f"missing surface constants: {', '.join(missing)}")
    unknown = sorted(set(constants) - set(SURFACE_CONSTANTS))
    if unknown:
        raise PreconditionError(f"unknown surface constants: {', '.join(unknown)}")
    m0, m1, m2, m3 = (int(constants[name]) for name in SURFACE_CONSTANTS)

    # E(m0) is -2-regular; every block below is stated for the twisted sheaf
    q = p.shift(m0)
    out = ConditionList(constants={"m0": m0, "m1": m1, "m2": m2, "m3": m3})
    out.metadata.update({"hilbert_polynomial": str(p), "twisted_polynomial": str(q)})

    regularity = gen_sheaf_conditions(2, q, dim_v)
    for c in regularity.items:
        out.add(SheafCondition("sheaf conditions", c.obj, c.degree, c.twist, c.expected, c.note, c.rank, c.det_degree))
    out.b_summands = regularity.b_summands
    for w in regularity.warnings:
        out.warnings.append(w)

    for j in (0, 1):
        k = m1 - j
        for i in (0, 1):
            out.add(SheafCondition("torsion freeness", _twist_label(-k), i, k, 0, f"h^{i}(a({k})) = 0"))
    for j in (0, 1):
        k = m1 - j
        value = q(k)
        if value < 0:
            out.warn(f"p({k}) = {value} < 0 in the torsion-freeness block")
            value = None
        out.add(SheafCondition("torsion freeness", _twist_label(-k), 2, k, value, f"h^2(a({k})) = p({k})"))

    out.add(SheafCondition("local freeness", _twist_label(1 - m1), "*", "C_-4", None, "rows j=1 of torsion freeness", 1, 1 - m1))
    out.add(SheafCondition("local freeness", _twist_label(-m1), "*", "C_-5", None, "rows j=0 of torsion freeness", 1, -m1))

    copies = str(rank * rank + 1) if rank is not None else "r^2+1"
    curve = f"H~ in |{m2}H|"
    out.add(SheafCondition("semistability", "M", "*", "C_1", None, f"kernel of alpha, {curve}"))
    out.add(SheafCondition("semistability", f"O_H~^({copies})({-m3})", "*", "C_0", None, f"{curve}; a in cone(alpha)^perp"))
    out.metadata["active_pair"] = ["M", f"O_H~^({copies})({-m3})"]
    return out


def gen_ideal_sheaf_conditions(n: int, m: int) -> ConditionList:
    """
    Extra conditions forcing a sheaf with the invariants of L (x) J_Z,
    colength n, to be torsion free; m kills h^0 and h^1 of every L(k), k >= m.
    """
    if n < 0:
        raise DomainError(f"colength must be >= 0, got {n}")
    out = ConditionList(constants={"n": n, "m": m})
    for k in (m - n - 1, m):
        out.add(SheafCondition("ideal sheaf", _twist_label(-k), 0, k, 0, f"h^0(a({k})) = 0"))
        out.add(SheafCondition("ideal sheaf", _twist_label(-k), 1, k, n, f"h^1(a({k})) = n"))
    out.metadata["restriction_curve"] = f"smooth divisor in |{n + 1}H|"
    return out


def torsionfree_length_check(n: int, c1t_dot_h: int) -> bool:
    """A nonzero torsion T has length (n+1) c1(T).H on a curve in |(n+1)H|; check it exceeds n."""
    if n < 0 or c1t_dot_h < 0:
        raise DomainError(f"inputs must be nonnegative, got ({n}, {c1t_dot_h})")
    return (n + 1) * c1t_dot_h > n
