"""
P-stability data and the verdict engine.

A datum is a finite family of test objects C_i with prescribed hom tables
N_i^j, and optionally a pair (A, B) asking for a morphism psi: A -> B whose
cone is orthogonal to the object. Indices i > 0 are active (they take part
in the cone), indices i <= 0 are passive.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Set, Tuple

import pandas as pd

from pstab.curve_ktheory import STRUCTURE_SHEAF, CurveClass, CurveCtx, dual, euler_pairing, line_bundle, polarisation_class
from pstab.elliptic_derived import ELLIPTIC, EllipticObject, ObjectHom, fm_kclass, fm_object, object_hom, theta_degree_general
from pstab.errors import DomainError, InvariantViolation, PreconditionError
from pstab.sheaf_euler import cone_pair_classes, f_rd_test_class

logger = logging.getLogger(__name__)


class Direction(str, Enum):
    COVARIANT = "covariant"  # hom^j(C_i, e)
    CONTRAVARIANT = "contravariant"  # hom^j(e, C_i)


@dataclass(frozen=True)
class Condition:
    index: int
    obj: EllipticObject
    direction: Direction
    expected: Dict[int, int]
    exhaustive: bool = True
    # semistable sheaves of exactly this class are proved to meet the condition
    guarantee: Optional[CurveClass] = None
    label: str = ""

    def __post_init__(self):
        if any(v < 0 for v in self.expected.values()):
            raise DomainError(f"expected dimensions must be >= 0, got {self.expected}")
        object.__setattr__(self, "expected", dict(sorted(self.expected.items())))

    @property
    def active(self) -> bool:
        return self.index > 0

    @property
    def expected_chi(self) -> int:
        return sum((-1) ** j * n for j, n in self.expected.items())

    def name(self) -> str:
        return self.label or str(self.obj)


@dataclass(frozen=True)
class ConeDatum:
    a: EllipticObject
    b: EllipticObject
    direction: Direction = Direction.CONTRAVARIANT
    guarantee: Optional[CurveClass] = None

    @property
    def kclass(self) -> CurveClass:
        return self.b.kclass - self.a.kclass


@dataclass
class PDatum:
    name: str
    ctx: CurveCtx
    conditions: List[Condition] = field(default_factory=list)
    cone: Optional[ConeDatum] = None
    metadata: Dict = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.conditions = sorted(self.conditions, key=lambda c: c.index)
        indices = [c.index for c in self.conditions]
        if len(set(indices)) != len(indices):
            raise DomainError(f"condition indices must be distinct, got {indices}")
        if self.is_trivial:
            self.warn(f"datum '{self.name}' imposes nothing: every object passes")

    @property
    def is_trivial(self) -> bool:
        return self.cone is None and all(not c.exhaustive and not c.expected for c in self.conditions)

    @property
    def passive(self) -> List[Condition]:
        return [c for c in self.conditions if not c.active]

    def condition(self, index: int) -> Condition:
        for c in self.conditions:
            if c.index == index:
                return c
        raise KeyError(index)

    def warn(self, message: str) -> None:
        logger.warning(message)
        self.warnings.append(message)

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for c in self.conditions:
            for j, n in (c.expected.items() or [(None, None)]):
                rows.append(
                    {
                        "index": c.index,
                        "object": c.name(),
                        "direction": c.direction.value,
                        "degree": j,
                        "expected": n,
                        "exhaustive": c.exhaustive,
                    }
                )
        return pd.DataFrame(rows)


# ==========================================
# Hom tables, diffs and verdicts
# ==========================================
@dataclass
class HomTable:
    """N_i^j by (index, degree); absent entries are 0."""

    entries: Dict[Tuple[int, int], int] = field(default_factory=dict)
    directions: Dict[int, Direction] = field(default_factory=dict)

    def __post_init__(self):
        if any(v < 0 for v in self.entries.values()):
            raise DomainError("hom dimensions must be >= 0")

    def get(self, index: int, degree: int) -> int:
        return self.entries.get((index, degree), 0)

    def degrees(self, index: int) -> Set[int]:
        return {j for (i, j) in self.entries if i == index}

    @classmethod
    def expected_of(cls, datum: PDatum) -> "HomTable":
        entries = {(c.index, j): n for c in datum.conditions for j, n in c.expected.items() if n}
        return cls(entries, {c.index: c.direction for c in datum.conditions})

    def diff(self, other: "HomTable") -> List["Diff"]:
        keys = sorted(set(self.entries) | set(other.entries))
        return [Diff(i, j, self.get(i, j), other.get(i, j)) for i, j in keys if self.get(i, j) != other.get(i, j)]

    def to_frame(self) -> pd.DataFrame:
        rows = [
            {"index": i, "direction": self.directions.get(i, Direction.COVARIANT).value, "degree": j, "dim": n}
            for (i, j), n in sorted(self.entries.items())
        ]
        return pd.DataFrame(rows, columns=["index", "direction", "degree", "dim"])


@dataclass(frozen=True)
class Diff:
    index: int
    degree: Optional[int]
    expected: int
    actual: int

    def as_dict(self) -> Dict:
        return {"index": self.index, "degree": self.degree, "expected": self.expected, "actual": self.actual}


@dataclass(frozen=True)
class Blocking:
    index: int
    degree: int
    reason: str


class Orthogonality(str, Enum):
    VERIFIED = "verified"
    UNVERIFIED = "consistent-but-unverified"
    VIOLATED = "violated"


@dataclass(frozen=True)
class ConeReport:
    chi: Optional[int]
    orthogonality: Orthogonality
    reason: str = ""

    @property
    def consistent(self) -> bool:
        return self.orthogonality != Orthogonality.VIOLATED


class Status(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    INDETERMINATE = "indeterminate"


@dataclass
class Verdict:
    status: Status
    diffs: List[Diff] = field(default_factory=list)
    blocking: List[Blocking] = field(default_factory=list)
    cone_report: Optional[ConeReport] = None
    table: HomTable = field(default_factory=HomTable)
    warnings: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == Status.PASS

    def diff_frame(self) -> pd.DataFrame:
        return pd.DataFrame([d.as_dict() for d in self.diffs], columns=["index", "degree", "expected", "actual"])


def _decide(diffs: List[Diff], blocking: List[Blocking], cone_report: Optional[ConeReport]) -> Status:
    if diffs or (cone_report is not None and not cone_report.consistent):
        return Status.FAIL
    if blocking or (cone_report is not None and cone_report.orthogonality == Orthogonality.UNVERIFIED):
        return Status.INDETERMINATE
    return Status.PASS


def _guaranteed(guarantee: Optional[CurveClass], obj: Optional[EllipticObject]) -> bool:
    return guarantee is not None and obj is not None and obj.is_semistable_sheaf() and obj.sheaf_class() == guarantee


def _torsion_up_to_shift(obj: Optional[EllipticObject]) -> bool:
    return obj is not None and bool(obj.atoms) and len(obj.shifts) == 1 and all(a.is_torsion for a in obj.atoms)


def _hom_for(ctx: CurveCtx, c: Condition, obj: EllipticObject) -> ObjectHom:
    if c.direction == Direction.COVARIANT:
        return object_hom(ctx, c.obj, obj)
    return object_hom(ctx, obj, c.obj)


def _pair_chi(ctx: CurveCtx, direction: Direction, test: CurveClass, kclass: CurveClass) -> int:
    if direction == Direction.COVARIANT:
        return euler_pairing(ctx, test, kclass)
    return euler_pairing(ctx, kclass, test)


def check_object(
    datum: PDatum,
    obj: Optional[EllipticObject] = None,
    table: Optional[HomTable] = None,
    kclass: Optional[CurveClass] = None,
) -> Verdict:
    """
    Compare an object's hom tables against a datum.

    The object is given as formal atoms, or as a supplied HomTable (with an
    optional K-class for the cone check). Entries the slopes cannot decide
    make the verdict indeterminate unless a semistability guarantee of the
    condition covers the object; a chi mismatch still fails.
    """
    if obj is None and table is None:
        raise PreconditionError("check_object needs an object or a hom table")
    if table is not None:
        for i, direction in table.directions.items():
            if any(c.index == i and c.direction != direction for c in datum.conditions):
                raise PreconditionError(f"table direction for index {i} does not match the datum")
    if kclass is None and obj is not None:
        kclass = obj.kclass

    actual = HomTable(directions={c.index: c.direction for c in datum.conditions})
    diffs: List[Diff] = []
    blocking: List[Blocking] = []
    for c in datum.conditions:
        if table is not None:
            values = {j: table.get(c.index, j) for j in table.degrees(c.index) | set(c.expected)}
            undecided: Set[int] = set()
            reasons: List[str] = []
        else:
            hom = _hom_for(datum.ctx, c, obj)
            values = dict(hom.dims)
            undecided, reasons = set(hom.indeterminate), hom.reasons
        if undecided and _guaranteed(c.guarantee, obj):
            for j in undecided:
                values[j] = c.expected.get(j, 0)
            undecided = set()

        degrees = set(c.expected) | set(values) | undecided if c.exhaustive else set(c.expected)
        for j in sorted(degrees):
            if j in undecided:
                blocking.append(Blocking(c.index, j, "; ".join(reasons)))
                continue
            value = values.get(j, 0)
            if value:
                actual.entries[(c.index, j)] = value
            if value != c.expected.get(j, 0):
                diffs.append(Diff(c.index, j, c.expected.get(j, 0), value))

        if c.exhaustive and kclass is not None and not any(d.index == c.index for d in diffs):
            chi = _pair_chi(datum.ctx, c.direction, c.obj.kclass, kclass)
            if chi != c.expected_chi:
                diffs.append(Diff(c.index, None, c.expected_chi, chi))

    cone_report = _cone_report(datum, obj, kclass) if datum.cone is not None else None
    diffs.sort(key=lambda d: (d.index, d.degree if d.degree is not None else float("-inf")))
    status = _decide(diffs, blocking, cone_report)
    verdict = Verdict(status, diffs, blocking, cone_report, actual, list(datum.warnings))
    if status == Status.PASS:
        _revalidate(datum, verdict, kclass)
    logger.info("=====> %s: %s (%d diffs, %d blocking)", datum.name, status.value, len(diffs), len(blocking))
    return verdict


def _cone_report(datum: PDatum, obj: Optional[EllipticObject], kclass: Optional[CurveClass]) -> ConeReport:
    cone = datum.cone
    if kclass is None:
        return ConeReport(None, Orthogonality.UNVERIFIED, "object class unknown")
    chi = _pair_chi(datum.ctx, cone.direction, cone.kclass, kclass)
    if chi != 0:
        return ConeReport(chi, Orthogonality.VIOLATED, "chi(object, cone) != 0")
    if _torsion_up_to_shift(obj) and cone.kclass.rank == 0:
        return ConeReport(chi, Orthogonality.VERIFIED, "a general psi has cone supported away from the object")
    if _guaranteed(cone.guarantee, obj):
        return ConeReport(chi, Orthogonality.VERIFIED, "object and cone are sheaves with chi = 0")
    return ConeReport(chi, Orthogonality.UNVERIFIED, "Hom-vanishing for a general psi is not decided by K-theory")


def _revalidate(datum: PDatum, verdict: Verdict, kclass: Optional[CurveClass]) -> None:
    """A pass must agree with Riemann-Roch on every exhaustive condition."""
    if kclass is None:
        return
    for c in datum.conditions:
        if not c.exhaustive:
            continue
        chi = _pair_chi(datum.ctx, c.direction, c.obj.kclass, kclass)
        table_chi = sum((-1) ** j * verdict.table.get(c.index, j) for j in verdict.table.degrees(c.index))
        if chi != table_chi or chi != c.expected_chi:
            raise InvariantViolation(f"pass verdict for {datum.name} disagrees with chi at index {c.index}")


def check_class(datum: PDatum, kclass: CurveClass) -> List[Diff]:
    """chi-level diffs of a bare K-class against every exhaustive condition."""
    out = []
    for c in datum.conditions:
        if c.exhaustive:
            chi = _pair_chi(datum.ctx, c.direction, c.obj.kclass, kclass)
            if chi != c.expected_chi:
                out.append(Diff(c.index, None, c.expected_chi, chi))
    return out


@dataclass(frozen=True)
class ConeNumerics:
    hom_ab: Optional[int]
    chi_ab: int
    injective_plausible: bool
    cone_class: CurveClass


def cone_numerics(datum: PDatum) -> ConeNumerics:
    """Necessary numerics for a morphism psi: A -> B to exist and be injective."""
    if datum.cone is None:
        raise PreconditionError(f"datum '{datum.name}' has no cone")
    a, b = datum.cone.a, datum.cone.b
    hom = object_hom(datum.ctx, a, b)
    hom0 = hom.get(0)
    rank_a = sum(x.kclass.rank for x in a.atoms)
    rank_b = sum(x.kclass.rank for x in b.atoms)
    plausible = bool(hom0) and rank_a <= rank_b
    return ConeNumerics(hom0, euler_pairing(datum.ctx, a.kclass, b.kclass), plausible, datum.cone.kclass)


# ==========================================
# Generators
# ==========================================
def gen_datum_prop12(ctx: CurveCtx, r: int, d: int) -> PDatum:
    """
    Passive datum whose stable objects are the semistable bundles of rank r
    and degree d, for d > (2g - 2 + D) r.

    The second condition is read as hom(L^dual, e) = h^0(E(1)), which is the
    value d - r(g-1-D) given by chi(E(k)) = rDk + d - r(g-1); the literal
    hom(L, e) would be d - r(g-1+D). Both are kept in the metadata.
    """
    D, g = ctx.require_polarisation(), ctx.genus
    if r < 1:
        raise DomainError(f"rank must be >= 1, got {r}")
    if d <= (2 * g - 2 + D) * r:
        raise PreconditionError(f"need d > (2g-2+D) r = {(2 * g - 2 + D) * r}, got d={d}")

    e = CurveClass(r, d)
    k0 = r * (g - 1 - D) - d
    l_dual = dual(polarisation_class(ctx))
    twisted = line_bundle(D * k0)
    test = f_rd_test_class(ctx, r, d)
    conditions = [
        Condition(0, EllipticObject.sheaf(STRUCTURE_SHEAF), Direction.COVARIANT, {0: d - r * (g - 1)}, label="O"),
        Condition(-1, EllipticObject.sheaf(l_dual), Direction.COVARIANT, {0: d - r * (g - 1 - D)}, label="L^dual"),
        Condition(-2, EllipticObject.sheaf(twisted), Direction.COVARIANT, {0: euler_pairing(ctx, twisted, e)}, label=f"L^{k0}"),
        Condition(-3, EllipticObject.sheaf(test), Direction.CONTRAVARIANT, {}, guarantee=e, label="F_rd"),
    ]
    datum = PDatum(f"prop12(g={g},D={D},r={r},d={d})", ctx, conditions)
    literal = d - r * (g - 1 + D)
    datum.metadata["hom_L_readings"] = {"E(1)": d - r * (g - 1 - D), "literal": literal}
    datum.warn(f"hom(L, e): printed value {d - r * (g - 1 - D)} matches h^0(E(1)); the literal pairing gives {literal}")
    return datum


def gen_datum_prop14(ctx: CurveCtx, r: int, d: int) -> PDatum:
    """Datum with cone (A, B) whose stable objects are semistable of rank r, degree -d."""
    a, b = cone_pair_classes(ctx, r, d)
    value = theta_degree_general(ctx.genus, r, d)
    e = CurveClass(r, -d)
    for name, c in (("A", a), ("B", b)):
        if -euler_pairing(ctx, e, c) != value:
            raise InvariantViolation(f"-chi(e, {name}) = {-euler_pairing(ctx, e, c)} != {value}")
    a_obj, b_obj = EllipticObject.sheaf(a), EllipticObject.sheaf(b)
    conditions = [
        Condition(1, a_obj, Direction.CONTRAVARIANT, {1: value}, label="A"),
        Condition(0, b_obj, Direction.CONTRAVARIANT, {1: value}, label="B"),
    ]
    datum = PDatum(
        f"prop14(g={ctx.genus},r={r},d={d})",
        ctx,
        conditions,
        cone=ConeDatum(a_obj, b_obj, Direction.CONTRAVARIANT, guarantee=e),
    )
    datum.metadata.update({"A": [a.rank, a.degree], "B": [b.rank, b.degree], "expected": value})
    return datum


def gen_datum_elliptic_torsion(r: int) -> PDatum:
    """Torsion sheaves of length r on an elliptic curve, via alpha: O(-3P) -> O."""
    if r < 1:
        raise DomainError(f"length must be >= 1, got {r}")
    source = EllipticObject.sheaf(line_bundle(-3))
    target = EllipticObject.sheaf(STRUCTURE_SHEAF)
    conditions = [
        Condition(1, source, Direction.COVARIANT, {0: r}, label="O(-3P)"),
        Condition(0, target, Direction.COVARIANT, {0: r}, label="O"),
    ]
    return PDatum(
        f"elliptic-torsion(r={r})",
        ELLIPTIC,
        conditions,
        cone=ConeDatum(source, target, Direction.CONTRAVARIANT, guarantee=CurveClass(0, r)),
    )


def fm_push_datum(datum: PDatum) -> PDatum:
    """Transport a datum on an elliptic curve along the Fourier-Mukai equivalence."""
    if datum.ctx.genus != 1:
        raise PreconditionError(f"Fourier-Mukai transport needs an elliptic curve, got genus {datum.ctx.genus}")

    def push_guarantee(c: Optional[CurveClass]) -> Optional[CurveClass]:
        if c is None:
            return None
        image = fm_kclass(c)
        return image if image.is_sheaf_class else None

    conditions = [
        Condition(
            c.index,
            fm_object(c.obj),
            c.direction,
            dict(c.expected),
            c.exhaustive,
            push_guarantee(c.guarantee),
            f"FM({c.name()})",
        )
        for c in datum.conditions
    ]
    cone = None
    if datum.cone is not None:
        cone = ConeDatum(
            fm_object(datum.cone.a),
            fm_object(datum.cone.b),
            datum.cone.direction,
            push_guarantee(datum.cone.guarantee),
        )
    pushed = PDatum(f"FM({datum.name})", datum.ctx, conditions, cone, dict(datum.metadata))
    if cone is not None and datum.cone.guarantee is not None and cone.guarantee is None:
        pushed.warn(f"cone guarantee {datum.cone.guarantee} maps to a shifted class; dropped")
    return pushed
