"""
Input documents and command requests.

One self-describing JSON document serves every command: a context, the
objects under test, an optional datum with its cone and an optional hom
table. Every field is validated with pydantic before anything is computed.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Type

import pydantic
import sympy as sp

from pstab.config import SCHEMA_VERSION, SURFACE_DIM_V
from pstab.curve_ktheory import CurveClass, CurveCtx
from pstab.elliptic_derived import Atom, EllipticObject
from pstab.errors import DocumentError
from pstab.numerics import K, IntPoly
from pstab.pstability import Condition, ConeDatum, Direction, HomTable, PDatum

logger = logging.getLogger(__name__)

COMMANDS = (
    "pairing",
    "fm",
    "gen-datum",
    "check",
    "theta",
    "sm",
    "frd",
    "sheaf-conditions",
    "verify-surface",
    "report-all",
)
DATUM_KINDS = ("prop12", "prop14", "elliptic-torsion", "fm-torsion")


class StrictModel(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(extra="forbid")


# ==========================================
# Document schema
# ==========================================
class ContextDoc(StrictModel):
    genus: Optional[int] = pydantic.Field(default=None, ge=0)
    D: Optional[int] = pydantic.Field(default=None, ge=1)
    surface: Optional[Literal["P1xE"]] = None

    @pydantic.model_validator(mode="after")
    def _one_kind(self):
        if (self.genus is None) == (self.surface is None):
            raise ValueError("context needs exactly one of 'genus' or 'surface'")
        return self


class AtomDoc(StrictModel):
    rank: int = pydantic.Field(ge=0)
    degree: int
    shift: int = 0
    support: List[str] = []


class ObjectDoc(StrictModel):
    name: str = ""
    atoms: List[AtomDoc]


class ConditionDoc(StrictModel):
    index: int
    direction: Literal["covariant", "contravariant"]
    object: ObjectDoc
    expected: Dict[int, int] = {}
    exhaustive: bool = True
    guarantee: Optional[Tuple[int, int]] = None
    label: str = ""


class ConeDoc(StrictModel):
    a: ObjectDoc
    b: ObjectDoc
    direction: Literal["covariant", "contravariant"] = "contravariant"
    guarantee: Optional[Tuple[int, int]] = None


class DatumDoc(StrictModel):
    name: str = "datum"
    conditions: List[ConditionDoc]
    cone: Optional[ConeDoc] = None


class TableEntryDoc(StrictModel):
    index: int
    degree: int
    dim: int = pydantic.Field(ge=0)


class TableDoc(StrictModel):
    entries: List[TableEntryDoc]
    directions: Dict[int, Literal["covariant", "contravariant"]] = {}
    kclass: Optional[Tuple[int, int]] = None


class WorkbenchDocument(StrictModel):
    schema_version: Literal["1"]
    context: ContextDoc
    objects: List[ObjectDoc] = []
    datum: Optional[DatumDoc] = None
    table: Optional[TableDoc] = None


# ==========================================
# Command parameters
# ==========================================
class PairingParams(StrictModel):
    g: int = pydantic.Field(ge=0)
    a: str
    b: str


class FmParams(StrictModel):
    cls: Optional[str] = None


class DatumParams(StrictModel):
    kind: Literal["prop12", "prop14", "elliptic-torsion", "fm-torsion"]
    g: int = pydantic.Field(default=1, ge=0)
    D: Optional[int] = pydantic.Field(default=None, ge=1)
    r: int
    d: int = 0


class CheckParams(DatumParams):
    kind: Optional[Literal["prop12", "prop14", "elliptic-torsion", "fm-torsion"]] = None
    r: Optional[int] = None
    object: Optional[str] = None
    support: Optional[str] = None
    shift: int = 0


class ThetaParams(StrictModel):
    support: Optional[str] = None
    other: Optional[str] = None
    g: Optional[int] = pydantic.Field(default=None, ge=0)
    r: Optional[int] = None
    d: Optional[int] = None


class SmParams(StrictModel):
    dim_v: int = pydantic.Field(ge=1)
    m: int = pydantic.Field(ge=0)
    dim_u: Optional[int] = pydantic.Field(default=None, ge=1)
    n: Optional[int] = pydantic.Field(default=None, ge=1)
    hom_bc: Optional[int] = pydantic.Field(default=None, ge=0)


class FrdParams(StrictModel):
    g: int = pydantic.Field(ge=0)
    r: int = pydantic.Field(ge=1)
    d: int


class SheafConditionParams(StrictModel):
    mode: Literal["theorem", "surface", "ideal"] = "theorem"
    n: Optional[int] = None
    p: Optional[str] = None
    dim_v: int = pydantic.Field(default=SURFACE_DIM_V, ge=1)
    m0: Optional[int] = None
    m1: Optional[int] = None
    m2: Optional[int] = None
    m3: Optional[int] = None
    rank: Optional[int] = pydantic.Field(default=None, ge=1)
    colength: Optional[int] = pydantic.Field(default=None, ge=0)
    m: Optional[int] = None


class NoParams(StrictModel):
    pass


COMMAND_PARAMS: Dict[str, Type[StrictModel]] = {
    "pairing": PairingParams,
    "fm": FmParams,
    "gen-datum": DatumParams,
    "check": CheckParams,
    "theta": ThetaParams,
    "sm": SmParams,
    "frd": FrdParams,
    "sheaf-conditions": SheafConditionParams,
    "verify-surface": NoParams,
    "report-all": NoParams,
}


class Request(StrictModel):
    command: Literal[COMMANDS]
    params: Dict[str, str] = {}
    document: Optional[WorkbenchDocument] = None

    def typed_params(self) -> StrictModel:
        try:
            return COMMAND_PARAMS[self.command].model_validate(self.params)
        except pydantic.ValidationError as e:
            raise DocumentParser.as_document_error(e, prefix="params") from e


# ==========================================
# Parsing and conversion
# ==========================================
class DocumentParser:
    @staticmethod
    def parse_pairs(pairs: List[str]) -> Dict[str, str]:
        params: Dict[str, str] = {}
        for pair in pairs:
            key, sep, value = pair.partition("=")
            if not sep or not key:
                raise DocumentError(f"expected key=value, got '{pair}'", field=pair)
            if key in params:
                raise DocumentError(f"parameter given twice: '{key}'", field=key)
            params[key] = value
        return params

    @staticmethod
    def loads(text: str) -> WorkbenchDocument:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise DocumentError(f"invalid JSON: {e.msg}", line=e.lineno) from e
        if isinstance(data, dict) and data.get("schema_version") not in (None, SCHEMA_VERSION):
            raise DocumentError(
                f"unsupported schema_version {data.get('schema_version')!r}",
                field="schema_version",
                line=DocumentParser._line_of(text, "schema_version"),
            )
        try:
            return WorkbenchDocument.model_validate(data)
        except pydantic.ValidationError as e:
            raise DocumentParser.as_document_error(e, text=text) from e

    @staticmethod
    def load(path: str) -> WorkbenchDocument:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as e:
            raise DocumentError(f"cannot read document: {e.strerror}", field=str(path)) from e
        logger.info("=====> loaded document %s", path)
        return DocumentParser.loads(text)

    @staticmethod
    def as_document_error(e: pydantic.ValidationError, text: Optional[str] = None, prefix: str = "") -> DocumentError:
        first = e.errors()[0]
        loc = [str(part) for part in first["loc"]]
        field = ".".join(([prefix] if prefix else []) + loc)
        line = None
        if text is not None:
            keys = [part for part in loc if not part.isdigit()]
            if keys:
                line = DocumentParser._line_of(text, keys[-1])
        return DocumentError(first["msg"], field=field or None, line=line)

    @staticmethod
    def _line_of(text: str, key: str) -> Optional[int]:
        needle = f'"{key}"'
        for number, line in enumerate(text.splitlines(), start=1):
            if needle in line:
                return number
        return None

    # Conversions into library types
    @staticmethod
    def parse_class(text: str, field: str = "class") -> CurveClass:
        parts = [p.strip() for p in text.strip("()").split(",")]
        if len(parts) != 2:
            raise DocumentError(f"expected 'rank,degree', got '{text}'", field=field)
        try:
            return CurveClass(int(parts[0]), int(parts[1]))
        except ValueError as e:
            raise DocumentError(f"class entries must be integers, got '{text}'", field=field) from e

    @staticmethod
    def parse_support(text: Optional[str]) -> Tuple[str, ...]:
        if not text:
            return ()
        return tuple(label.strip() for label in text.split(",") if label.strip())

    @staticmethod
    def parse_polynomial(text: str, field: str = "params.p") -> IntPoly:
        try:
            poly = IntPoly.from_expr(sp.sympify(text, locals={"k": K}))
        except (sp.SympifyError, sp.PolynomialError, TypeError) as e:
            raise DocumentError(f"not a polynomial in k: '{text}'", field=field) from e
        if not poly.is_integer_valued():
            raise DocumentError(f"polynomial '{text}' is not integer-valued", field=field)
        return poly

    @staticmethod
    def to_ctx(doc: ContextDoc) -> CurveCtx:
        if doc.genus is None:
            raise DocumentError("a curve context is required", field="context.genus")
        return CurveCtx(doc.genus, doc.D)

    @staticmethod
    def to_object(doc: ObjectDoc) -> EllipticObject:
        return EllipticObject(tuple(Atom(CurveClass(a.rank, a.degree), a.shift, tuple(a.support)) for a in doc.atoms))

    @staticmethod
    def to_datum(doc: DatumDoc, ctx: CurveCtx) -> PDatum:
        conditions = [
            Condition(
                c.index,
                DocumentParser.to_object(c.object),
                Direction(c.direction),
                dict(c.expected),
                c.exhaustive,
                CurveClass(*c.guarantee) if c.guarantee else None,
                c.label,
            )
            for c in doc.conditions
        ]
        cone = None
        if doc.cone is not None:
            cone = ConeDatum(
                DocumentParser.to_object(doc.cone.a),
                DocumentParser.to_object(doc.cone.b),
                Direction(doc.cone.direction),
                CurveClass(*doc.cone.guarantee) if doc.cone.guarantee else None,
            )
        return PDatum(doc.name, ctx, conditions, cone)

    @staticmethod
    def to_table(doc: TableDoc) -> Tuple[HomTable, Optional[CurveClass]]:
        entries: Dict[Tuple[int, int], int] = {}
        for e in doc.entries:
            if (e.index, e.degree) in entries:
                raise DocumentError(f"duplicate table entry ({e.index}, {e.degree})", field="table.entries")
            if e.dim:
                entries[(e.index, e.degree)] = e.dim
        directions = {i: Direction(v) for i, v in doc.directions.items()}
        kclass = CurveClass(*doc.kclass) if doc.kclass else None
        return HomTable(entries, directions), kclass

    # Conversions back into documents
    @staticmethod
    def from_object(obj: EllipticObject, name: str = "") -> ObjectDoc:
        atoms = [
            AtomDoc(rank=a.kclass.rank, degree=a.kclass.degree, shift=a.shift, support=list(a.support)) for a in obj.atoms
        ]
        return ObjectDoc(name=name, atoms=atoms)

    @staticmethod
    def from_datum(datum: PDatum) -> DatumDoc:
        def pair(c: Optional[CurveClass]):
            return (c.rank, c.degree) if c is not None else None

        conditions = [
            ConditionDoc(
                index=c.index,
                direction=c.direction.value,
                object=DocumentParser.from_object(c.obj),
                expected=dict(c.expected),
                exhaustive=c.exhaustive,
                guarantee=pair(c.guarantee),
                label=c.label,
            )
            for c in datum.conditions
        ]
        cone = None
        if datum.cone is not None:
            cone = ConeDoc(
                a=DocumentParser.from_object(datum.cone.a),
                b=DocumentParser.from_object(datum.cone.b),
                direction=datum.cone.direction.value,
                guarantee=pair(datum.cone.guarantee),
            )
        return DatumDoc(name=datum.name, conditions=conditions, cone=cone)
