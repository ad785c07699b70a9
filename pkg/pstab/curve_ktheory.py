"""
K-theory of a smooth projective curve of genus g.

Classes are (rank, degree) pairs; a negative rank encodes an odd total
shift. The Euler pairing is the Riemann-Roch evaluation

    chi(a, b) = rk(a) deg(b) - rk(b) deg(a) + rk(a) rk(b) (1 - g).
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Tuple

from pstab.errors import DomainError, IndeterminateError, PreconditionError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CurveCtx:
    genus: int
    polarisation_degree: Optional[int] = None

    def __post_init__(self):
        if self.genus < 0:
            raise DomainError(f"genus must be >= 0, got {self.genus}")
        if self.polarisation_degree is not None and self.polarisation_degree < 1:
            raise DomainError(f"polarisation degree D must be >= 1, got {self.polarisation_degree}")

    @property
    def canonical_degree(self) -> int:
        return 2 * self.genus - 2

    def require_polarisation(self) -> int:
        if self.polarisation_degree is None:
            raise PreconditionError("this operation needs the polarisation degree D")
        return self.polarisation_degree


@dataclass(frozen=True, order=True)
class CurveClass:
    rank: int
    degree: int

    def __add__(self, other: "CurveClass") -> "CurveClass":
        return CurveClass(self.rank + other.rank, self.degree + other.degree)

    def __sub__(self, other: "CurveClass") -> "CurveClass":
        return CurveClass(self.rank - other.rank, self.degree - other.degree)

    def __neg__(self) -> "CurveClass":
        return CurveClass(-self.rank, -self.degree)

    def __mul__(self, n: int) -> "CurveClass":
        return CurveClass(n * self.rank, n * self.degree)

    __rmul__ = __mul__

    def shift(self, n: int = 1) -> "CurveClass":
        return -self if n % 2 else self

    @property
    def is_sheaf_class(self) -> bool:
        return self.rank > 0 or (self.rank == 0 and self.degree >= 0)

    @property
    def is_torsion(self) -> bool:
        return self.rank == 0 and self.degree > 0

    def __str__(self) -> str:
        return f"({self.rank},{self.degree})"


STRUCTURE_SHEAF = CurveClass(1, 0)


def line_bundle(degree: int) -> CurveClass:
    return CurveClass(1, degree)


def canonical_class(ctx: CurveCtx) -> CurveClass:
    return CurveClass(1, ctx.canonical_degree)


def polarisation_class(ctx: CurveCtx) -> CurveClass:
    return CurveClass(1, ctx.require_polarisation())


def euler_pairing(ctx: CurveCtx, a: CurveClass, b: CurveClass) -> int:
    return a.rank * b.degree - b.rank * a.degree + a.rank * b.rank * (1 - ctx.genus)


def slope(c: CurveClass) -> Fraction:
    if c.rank == 0:
        raise DomainError(f"slope undefined for rank-0 class {c}")
    return Fraction(c.degree, c.rank)


def twist(c: CurveClass, line_degree: int) -> CurveClass:
    return CurveClass(c.rank, c.degree + c.rank * line_degree)


def dual(c: CurveClass) -> CurveClass:
    return CurveClass(c.rank, -c.degree)


def serre_dual_dims(ctx: CurveCtx, a: CurveClass, b: CurveClass, homdims: Tuple[int, int]) -> Tuple[int, int]:
    """
    Serre duality on a curve: hom^i(a, b) = hom^{1-i}(b, a (x) omega).

    Given (hom^0, hom^1) for the pair (a, b), return (hom^0, hom^1) for the
    pair (b, a (x) omega_X).
    """
    h0, h1 = homdims
    if h0 < 0 or h1 < 0 or h0 - h1 != euler_pairing(ctx, a, b):
        raise PreconditionError(f"{homdims} are not hom dimensions of {a}, {b}: chi is {euler_pairing(ctx, a, b)}")
    return h1, h0


# ==========================================
# Hom dimensions of semistable sheaves
# ==========================================
@dataclass(frozen=True)
class HomDims:
    """(hom^0, hom^1) of a pair of sheaves, or the chi constraint when undecided."""

    chi: int
    hom0: Optional[int] = None
    hom1: Optional[int] = None
    reason: str = ""

    @property
    def determined(self) -> bool:
        return self.hom0 is not None and self.hom1 is not None

    def as_pair(self) -> Tuple[int, int]:
        if not self.determined:
            raise IndeterminateError(f"hom dimensions are indeterminate ({self.reason})")
        return self.hom0, self.hom1


def hom_dims_semistable(
    ctx: CurveCtx,
    a: CurveClass,
    b: CurveClass,
    assume_vanishing: bool = False,
    same_stable: bool = False,
) -> HomDims:
    """
    Hom dimensions between two semistable sheaves read off slopes and RR.

    Torsion counts as slope +infinity. For mu(a) < mu(b) the Ext^1 term is
    Hom(b, a (x) omega)^dual, which vanishes by semistability as soon as
    mu(b) - mu(a) > 2g - 2; otherwise the caller must assert the vanishing,
    which is refused when chi < 0.
    """
    for name, c in (("first", a), ("second", b)):
        if not c.is_sheaf_class or (c.rank == 0 and c.degree == 0):
            raise PreconditionError(f"{name} argument {c} is not a nonzero semistable sheaf class")

    chi = euler_pairing(ctx, a, b)
    if a.rank == 0 and b.rank == 0:
        return HomDims(chi, reason="two torsion sheaves: depends on supports")
    if b.rank == 0:
        return HomDims(chi, chi, 0, "maps into torsion")
    if a.rank == 0:
        return HomDims(chi, 0, -chi, "torsion maps to a bundle vanish")

    mu_a, mu_b = slope(a), slope(b)
    if mu_a > mu_b:
        return HomDims(chi, 0, -chi, "slope of source exceeds slope of target")
    if mu_b - mu_a > ctx.canonical_degree:
        return HomDims(chi, chi, 0, "Ext^1 vanishes by Serre duality and slopes")
    if mu_a < mu_b and assume_vanishing:
        if chi < 0:
            raise PreconditionError(f"Ext^1({a}, {b}) cannot vanish: chi = {chi} < 0")
        return HomDims(chi, chi, 0, "Ext^1 assumed to vanish")
    if mu_a < mu_b:
        return HomDims(chi, reason="slopes do not force Ext^1 to vanish")
    if same_stable and a == b and ctx.genus == 1:
        return HomDims(chi, 1, 1, "endomorphisms of a stable sheaf")
    return HomDims(chi, reason="equal slopes")


def destabilizes(ctx: CurveCtx, parent: CurveClass, quotient: CurveClass) -> bool:
    """True when mu(quotient) < mu(parent) - 1/r^2 with r the parent rank."""
    if parent.rank <= 0 or quotient.rank <= 0:
        raise DomainError(f"destabilizes needs positive ranks, got {parent} and {quotient}")
    return slope(quotient) < slope(parent) - Fraction(1, parent.rank**2)
