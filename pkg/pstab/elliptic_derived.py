"""
Formal derived objects on a curve: finite direct sums of shifted semistable
atoms. On an elliptic curve (g = 1) they carry the Fourier-Mukai action of the
Poincare bundle, theta divisors of torsion sheaves and P-equivalence.

An atom with shift i stands for the sheaf placed in cohomological degree i,
i.e. E[-i], so its K-class is (-1)^i times the sheaf class.
"""

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Set, Tuple

from pstab.config import BASE_POINT_LABEL
from pstab.curve_ktheory import CurveClass, CurveCtx, HomDims, euler_pairing, hom_dims_semistable, slope
from pstab.errors import DomainError, InvariantViolation, PreconditionError
from pstab.numerics import ceil_div, integer_partitions, partition_count

logger = logging.getLogger(__name__)

ELLIPTIC = CurveCtx(genus=1)


def negate_label(label: str) -> str:
    """Formal inverse of a point under the group law; the base point is fixed."""
    if label == BASE_POINT_LABEL:
        return label
    return label[1:] if label.startswith("-") else f"-{label}"


@dataclass(frozen=True)
class Atom:
    kclass: CurveClass
    shift: int = 0
    support: Tuple[str, ...] = ()

    def __post_init__(self):
        c = self.kclass
        if not c.is_sheaf_class or (c.rank == 0 and c.degree == 0):
            raise DomainError(f"atom class {c} is not a nonzero sheaf class")
        object.__setattr__(self, "support", tuple(sorted(self.support)))
        if c.rank == 0 and len(self.support) != c.degree:
            raise DomainError(f"torsion atom {c} needs {c.degree} support labels, got {len(self.support)}")
        if c.rank > 0 and self.support and (c.degree != 0 or len(self.support) != c.rank):
            raise DomainError(f"point labels are only allowed on degree-0 bundles, one per rank: {c}")

    @property
    def is_torsion(self) -> bool:
        return self.kclass.rank == 0

    @property
    def signed_class(self) -> CurveClass:
        return self.kclass.shift(self.shift)

    def shifted(self, n: int) -> "Atom":
        return Atom(self.kclass, self.shift + n, self.support)

    def __str__(self) -> str:
        labels = f"{{{','.join(self.support)}}}" if self.support else ""
        return f"{self.kclass}{labels}@{self.shift}"


@dataclass(frozen=True)
class EllipticObject:
    atoms: Tuple[Atom, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(sorted(self.atoms, key=_atom_key)))

    @classmethod
    def sheaf(cls, kclass: CurveClass, support: Iterable[str] = (), shift: int = 0) -> "EllipticObject":
        return cls((Atom(kclass, shift, tuple(support)),))

    @classmethod
    def torsion(cls, support: Iterable[str]) -> "EllipticObject":
        labels = tuple(support)
        return cls((Atom(CurveClass(0, len(labels)), 0, labels),))

    @property
    def kclass(self) -> CurveClass:
        total = CurveClass(0, 0)
        for atom in self.atoms:
            total = total + atom.signed_class
        return total

    @property
    def is_zero(self) -> bool:
        return not self.atoms

    @property
    def is_torsion(self) -> bool:
        return bool(self.atoms) and all(a.is_torsion and a.shift == 0 for a in self.atoms)

    @property
    def length(self) -> int:
        return sum(a.kclass.degree for a in self.atoms if a.is_torsion)

    @property
    def support(self) -> Counter:
        return Counter(label for a in self.atoms if a.is_torsion for label in a.support)

    @property
    def shifts(self) -> Set[int]:
        return {a.shift for a in self.atoms}

    def is_semistable_sheaf(self) -> bool:
        """A sheaf in degree 0 whose atoms all share one slope (torsion counts as one slope)."""
        if not self.atoms or self.shifts != {0}:
            return False
        if all(a.is_torsion for a in self.atoms):
            return True
        if any(a.is_torsion for a in self.atoms):
            return False
        return len({slope(a.kclass) for a in self.atoms}) == 1

    def sheaf_class(self) -> CurveClass:
        total = CurveClass(0, 0)
        for atom in self.atoms:
            total = total + atom.kclass
        return total

    def shifted(self, n: int) -> "EllipticObject":
        return EllipticObject(tuple(a.shifted(n) for a in self.atoms))

    def __add__(self, other: "EllipticObject") -> "EllipticObject":
        return EllipticObject(self.atoms + other.atoms)

    def __str__(self) -> str:
        return " + ".join(str(a) for a in self.atoms) if self.atoms else "0"


def _atom_key(atom: Atom):
    return (atom.shift, atom.kclass.rank, atom.kclass.degree, atom.support)


@dataclass(frozen=True)
class ThetaDivisor:
    lines: Tuple[str, ...]
    ambient: str
    degree: int

    @property
    def multiplicities(self) -> Dict[str, int]:
        return dict(sorted(Counter(self.lines).items()))


# ==========================================
# Fourier-Mukai transform of the Poincare bundle
# ==========================================
def fm_kclass(c: CurveClass) -> CurveClass:
    """(r, d) -> (d, -r); applying it twice negates the class."""
    return CurveClass(c.degree, -c.rank)


def fm_atom(atom: Atom) -> Atom:
    r, d = atom.kclass.rank, atom.kclass.degree
    if r == 0:
        return Atom(CurveClass(d, 0), atom.shift, atom.support)
    if d > 0:
        return Atom(CurveClass(d, -r), atom.shift)
    if d < 0:
        return Atom(CurveClass(-d, r), atom.shift + 1)
    labels = atom.support or (BASE_POINT_LABEL,) * r
    if not atom.support:
        logger.debug("unlabelled degree-0 bundle %s read as supported at the base point", atom)
    return Atom(CurveClass(0, r), atom.shift + 1, tuple(negate_label(p) for p in labels))


def fm_object(o: EllipticObject) -> EllipticObject:
    image = EllipticObject(tuple(fm_atom(a) for a in o.atoms))
    if image.kclass != fm_kclass(o.kclass):
        raise InvariantViolation(f"FM image {image} does not carry the class {fm_kclass(o.kclass)}")
    return image


# ==========================================
# Theta divisors and P-equivalence
# ==========================================
THETA_AMBIENT = "P(Hom(O(-3P),O)^dual)"


def theta_torsion(t: EllipticObject) -> ThetaDivisor:
    if not t.is_torsion:
        raise PreconditionError(f"theta divisor of lines is defined for torsion sheaves, got {t}")
    lines = tuple(sorted(t.support.elements()))
    return ThetaDivisor(lines=lines, ambient=THETA_AMBIENT, degree=len(lines))


def p_equivalent(t1: EllipticObject, t2: EllipticObject) -> bool:
    return theta_torsion(t1).lines == theta_torsion(t2).lines


def p_class_max_isoclasses(r: int) -> int:
    if r < 1:
        raise DomainError(f"length must be positive, got {r}")
    return partition_count(r)


def theta_degree_general(g: int, r: int, d: int) -> int:
    if r < 1:
        raise DomainError(f"rank must be positive, got {r}")
    value = (2 * g + ceil_div(d, r) - Fraction(d, r)) * (r**3 + r)
    if value.denominator != 1:
        raise InvariantViolation(f"theta degree for g={g}, r={r}, d={d} is not integral: {value}")
    return int(value)


# ==========================================
# Hom tables between formal objects
# ==========================================
def atom_ext(ctx: CurveCtx, a: Atom, b: Atom) -> HomDims:
    """(Ext^0, Ext^1) between the underlying sheaves of two atoms."""
    disjoint = a.support and b.support and not set(a.support) & set(b.support)
    chi = euler_pairing(ctx, a.kclass, b.kclass)
    if a.is_torsion and b.is_torsion and disjoint:
        return HomDims(chi, 0, 0, "disjoint supports")
    if a.is_torsion and b.is_torsion and len(set(a.support)) == len(set(b.support)) == 1:
        # O/m^a and O/m^b at the same point
        n = min(a.kclass.degree, b.kclass.degree)
        return HomDims(chi, n, n, "torsion at one common point")
    if ctx.genus == 1 and not a.is_torsion and not b.is_torsion and disjoint:
        # degree-0 bundles with no common Jordan-Hoelder point
        return HomDims(chi, 0, 0, "no common Jordan-Hoelder factor")
    return hom_dims_semistable(ctx, a.kclass, b.kclass)


@dataclass
class ObjectHom:
    """hom^j(source, target) by degree j; undecided degrees are listed separately."""

    dims: Dict[int, int] = field(default_factory=dict)
    indeterminate: Set[int] = field(default_factory=set)
    reasons: List[str] = field(default_factory=list)

    @property
    def determined(self) -> bool:
        return not self.indeterminate

    def get(self, j: int) -> Optional[int]:
        if j in self.indeterminate:
            return None
        return self.dims.get(j, 0)


def object_hom(ctx: CurveCtx, source: EllipticObject, target: EllipticObject) -> ObjectHom:
    """hom^j(X, Y) = sum over atom pairs of ext^{j + deg x - deg y}(x, y)."""
    result = ObjectHom()
    for x in source.atoms:
        for y in target.atoms:
            ext = atom_ext(ctx, x, y)
            offset = y.shift - x.shift
            if not ext.determined:
                result.indeterminate.update({offset, offset + 1})
                result.reasons.append(f"{x} -> {y}: {ext.reason} (chi={ext.chi})")
                continue
            for k, value in ((0, ext.hom0), (1, ext.hom1)):
                if value:
                    result.dims[offset + k] = result.dims.get(offset + k, 0) + value
    result.dims = {j: v for j, v in sorted(result.dims.items()) if v}
    return result


def torsion_isoclasses(point: str, r: int) -> List[EllipticObject]:
    """Torsion sheaves of length r supported at one point, one per partition of r."""
    if r < 1:
        raise DomainError(f"length must be positive, got {r}")
    return [
        EllipticObject(tuple(Atom(CurveClass(0, part), 0, (point,) * part) for part in parts))
        for parts in integer_partitions(r)
    ]


def p_equivalence_classes(objects: Iterable[EllipticObject]) -> List[List[EllipticObject]]:
    """Group torsion objects by their theta divisor, in first-seen order."""
    classes: Dict[Tuple[str, ...], List[EllipticObject]] = {}
    for t in objects:
        classes.setdefault(theta_torsion(t).lines, []).append(t)
    return list(classes.values())
