"""
Exact numerics shared by every other module.

Integers and rationals only: binomials, ceilings, integer-valued polynomials,
partition counting and an exhaustive integer-box search for systems of
polynomial inequalities.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
import sympy as sp
from sympy.functions.combinatorial.numbers import partition as _sympy_partition
from sympy.utilities.iterables import partitions as _sympy_partitions

from pstab.config import WORKERS
from pstab.errors import DomainError, IntegralityError, InvariantViolation, PreconditionError

logger = logging.getLogger(__name__)

K = sp.Symbol("k")

Number = Union[int, Fraction, sp.Rational]


def binomial(n: int, k: int) -> int:
    """C(n, k), zero outside 0 <= k <= n."""
    if k < 0 or n < 0 or k > n:
        return 0
    return math.comb(n, k)


def ceil_div(d: int, r: int) -> int:
    if r <= 0:
        raise DomainError(f"ceil_div needs a positive divisor, got r={r}")
    return -((-d) // r)


def partition_count(r: int) -> int:
    if r < 0:
        raise DomainError(f"partition_count needs r >= 0, got {r}")
    return int(_sympy_partition(r))


def integer_partitions(r: int) -> List[Tuple[int, ...]]:
    """Every partition of r as a non-increasing tuple, in reverse lexicographic order."""
    if r < 0:
        raise DomainError(f"integer_partitions needs r >= 0, got {r}")
    if r == 0:
        return [()]
    out = []
    for parts in _sympy_partitions(r):
        out.append(tuple(sorted((k for k, mult in parts.items() for _ in range(mult)), reverse=True)))
    return sorted(out, reverse=True)


def partitions_brute_force(r: int) -> int:
    """Reference count: partitions of r with every part at most r, by recursion on the largest part."""
    if r < 0:
        raise DomainError(f"partitions_brute_force needs r >= 0, got {r}")
    return _count_bounded(r, r)


@lru_cache(maxsize=None)
def _count_bounded(n: int, largest: int) -> int:
    if n == 0:
        return 1
    return sum(_count_bounded(n - part, part) for part in range(1, min(n, largest) + 1))


# ==========================================
# Integer-valued polynomials
# ==========================================
@dataclass(frozen=True)
class IntPoly:
    """A polynomial Z -> Z stored by rational coefficients, lowest degree first."""

    coefficients: Tuple[sp.Rational, ...] = ()

    def __post_init__(self):
        coeffs = [sp.Rational(c) for c in self.coefficients]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @classmethod
    def from_expr(cls, expr, var: sp.Symbol = K) -> "IntPoly":
        poly = sp.Poly(sp.expand(expr), var)
        coeffs = list(reversed(poly.all_coeffs()))
        return cls(tuple(coeffs))

    @classmethod
    def from_values(cls, points: Sequence[Tuple[int, Number]]) -> "IntPoly":
        """Lagrange interpolation through (k, p(k)) pairs."""
        expr = sp.interpolate([(sp.Integer(x), sp.Rational(y)) for x, y in points], K)
        return cls.from_expr(expr)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def as_expr(self, var: sp.Symbol = K):
        return sum((c * var**i for i, c in enumerate(self.coefficients)), sp.Integer(0))

    def __call__(self, k: int) -> int:
        return poly_eval(self, k)

    def is_integer_valued(self) -> bool:
        """Integer at deg + 1 consecutive integers, hence at every integer."""
        return all(_horner(self, k).is_integer for k in range(max(self.degree, 0) + 1))

    def shift(self, c: int) -> "IntPoly":
        """The polynomial k -> p(k + c)."""
        return IntPoly.from_expr(self.as_expr().subs(K, K + c))

    def __str__(self) -> str:
        return str(sp.expand(self.as_expr()))


def _horner(p: IntPoly, k: int) -> sp.Rational:
    value = sp.Integer(0)
    for c in reversed(p.coefficients):
        value = value * k + c
    return value


def poly_eval(p: IntPoly, k: int) -> int:
    value = _horner(p, k)
    if not value.is_integer:
        raise IntegralityError(f"polynomial {p} is not integer-valued at k={k}: {value}")
    return int(value)


def poly_derivative_discrete(p: IntPoly) -> IntPoly:
    """k -> p(k) - p(k-1)."""
    expr = p.as_expr()
    return IntPoly.from_expr(expr - expr.subs(K, K - 1))


# ==========================================
# Exhaustive integer-box search
# ==========================================
@dataclass(frozen=True)
class IntBox:
    bounds: Tuple[Tuple[str, int, int], ...]

    def __post_init__(self):
        for name, lo, hi in self.bounds:
            if lo > hi:
                raise DomainError(f"empty range for {name}: [{lo}, {hi}]")

    @classmethod
    def of(cls, bounds: Dict[str, Tuple[int, int]]) -> "IntBox":
        return cls(tuple((name, int(lo), int(hi)) for name, (lo, hi) in bounds.items()))

    @property
    def names(self) -> List[str]:
        return [name for name, _, _ in self.bounds]

    def symbols(self) -> List[sp.Symbol]:
        return [sp.Symbol(name) for name in self.names]

    @property
    def size(self) -> int:
        return math.prod(hi - lo + 1 for _, lo, hi in self.bounds)

    def as_dict(self) -> Dict[str, List[int]]:
        return {name: [lo, hi] for name, lo, hi in self.bounds}


@dataclass
class BoxSearchResult:
    empty: bool
    box: IntBox
    constraints: List[str]
    witness: Optional[Dict[str, int]] = None
    points_checked: int = 0
    dtype: str = "int64"

    def as_dict(self) -> Dict:
        return {
            "empty": self.empty,
            "box": self.box.as_dict(),
            "constraints": self.constraints,
            "witness": self.witness,
            "points_checked": self.points_checked,
        }


_COMPARATORS = {
    sp.StrictGreaterThan: np.greater,
    sp.GreaterThan: np.greater_equal,
    sp.StrictLessThan: np.less,
    sp.LessThan: np.less_equal,
    sp.Equality: np.equal,
    sp.Unequality: np.not_equal,
}


def _normalise(constraint, names: List[str]):
    """Rewrite `lhs op rhs` as `P op 0` with P an integer polynomial."""
    op = _COMPARATORS.get(type(constraint))
    if op is None:
        raise PreconditionError(f"not a polynomial inequality: {constraint}")
    expr = sp.expand(constraint.lhs - constraint.rhs)
    unknown = {s.name for s in expr.free_symbols} - set(names)
    if unknown:
        raise PreconditionError(f"constraint {constraint} uses variables outside the box: {sorted(unknown)}")
    gens = [sp.Symbol(n) for n in names]
    by_name = {s.name: s for s in expr.free_symbols}
    expr = expr.subs({by_name[n]: sp.Symbol(n) for n in by_name})
    poly = sp.Poly(expr, *gens)
    denominators = [sp.Rational(c).q for c in poly.coeffs()]
    scale = math.lcm(*denominators) if denominators else 1
    poly = poly * scale
    return poly, op


def _magnitude_bound(poly: sp.Poly, radius: int) -> int:
    return sum(abs(int(c)) * radius ** sum(m) for c, m in zip(poly.coeffs(), poly.monoms()))


def box_search_empty(constraints: Sequence, box: IntBox) -> BoxSearchResult:
    """
    Decide whether no integer point of `box` satisfies every constraint.

    The search is exhaustive over the box and nothing else. Returns the
    lexicographically smallest witness (variables in box order) when one exists.
    """
    if not constraints:
        raise PreconditionError("box_search_empty needs at least one constraint")

    names = box.names
    gens = [sp.Symbol(n) for n in names]
    normalised = [_normalise(c, names) for c in constraints]
    radius = max(max(abs(lo), abs(hi)) for _, lo, hi in box.bounds)
    safe = all(_magnitude_bound(p, radius) < 2**62 for p, _ in normalised)
    dtype = np.int64 if safe else object
    evaluators = [(sp.lambdify(gens, p.as_expr(), "numpy"), op) for p, op in normalised]

    first_name, first_lo, first_hi = box.bounds[0]
    rest = [np.arange(lo, hi + 1, dtype=np.int64).astype(dtype) for _, lo, hi in box.bounds[1:]]
    chunk = 64
    starts = list(range(first_lo, first_hi + 1, chunk))

    def scan(start: int) -> Optional[Tuple[int, ...]]:
        head = np.arange(start, min(start + chunk, first_hi + 1), dtype=np.int64).astype(dtype)
        grids = np.meshgrid(head, *rest, indexing="ij")
        mask = np.ones(grids[0].shape, dtype=bool)
        for fn, op in evaluators:
            values = np.broadcast_to(fn(*grids), mask.shape)
            mask &= op(values, 0).astype(bool)
            if not mask.any():
                return None
        hit = np.argwhere(mask)[0]
        return tuple(int(g[tuple(hit)]) for g in grids)

    if WORKERS > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=WORKERS) as pool:
            hits = list(pool.map(scan, starts))
    else:
        hits = []
        for start in starts:
            hits.append(scan(start))
            if hits[-1] is not None:
                break

    witness_point = next((h for h in hits if h is not None), None)
    result = BoxSearchResult(
        empty=witness_point is None,
        box=box,
        constraints=[str(c) for c in constraints],
        points_checked=box.size,
        dtype="int64" if safe else "object",
    )
    if witness_point is not None:
        witness = dict(zip(names, witness_point))
        _recheck_witness(constraints, witness)
        result.witness = witness
        logger.info("box search found witness %s", witness)
    else:
        logger.info("=====> box %s is empty for %d constraints", box.as_dict(), len(constraints))
    return result


def _recheck_witness(constraints: Iterable, witness: Dict[str, int]) -> None:
    for constraint in constraints:
        subs = {s: witness[s.name] for s in constraint.free_symbols}
        if constraint.subs(subs) is not sp.true:
            raise InvariantViolation(f"witness {witness} does not satisfy {constraint}")
