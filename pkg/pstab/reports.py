"""Machine-readable reports and their mapping onto process exit codes."""

import json
import math
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Literal

import pandas as pd
import pydantic
import sympy as sp

from pstab.config import SCHEMA_VERSION
from pstab.curve_ktheory import CurveClass
from pstab.errors import (
    DocumentError,
    DomainError,
    IndeterminateError,
    IntegralityError,
    InvariantViolation,
    PreconditionError,
    VerificationFailure,
    WorkbenchError,
)

EXIT_CODES = {"pass": 0, "info": 0, "fail": 1, "invalid": 2, "indeterminate": 3}


class ProvenanceEntry(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(extra="forbid", frozen=True)

    anchor: str
    value: str


class Report(pydantic.BaseModel):
    model_config = pydantic.ConfigDict(extra="forbid")

    schema_version: Literal["1"] = SCHEMA_VERSION
    command: str
    status: Literal["pass", "fail", "indeterminate", "info"]
    payload: Dict[str, Any] = {}
    provenance: List[ProvenanceEntry] = []
    warnings: List[str] = []

    @pydantic.model_validator(mode="after")
    def _fail_has_evidence(self):
        evidence = bool(self.payload.get("diffs")) or bool(self.payload.get("witnesses"))
        if (self.status == "fail") != evidence:
            raise ValueError(f"status '{self.status}' does not match the diffs/witnesses in the payload")
        return self

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, indent=2, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        return cls.model_validate_json(text)

    def render(self) -> str:
        """Human-readable form: header, tables, then notes."""
        lines = [f"=====> {self.command}: {self.status.upper()}"]
        tables = self.payload.get("tables", {})
        for key, value in self.payload.items():
            if key == "tables":
                continue
            lines.append(f"{key}: {json.dumps(value, sort_keys=True)}")
        for name in sorted(tables):
            lines.append("")
            lines.append(f"# {name}")
            frame = pd.DataFrame(tables[name])
            lines.append(frame.to_string(index=False) if not frame.empty else "(empty)")
        if self.provenance:
            lines.append("")
            lines.append("# provenance")
            lines.extend(f"  {p.anchor}: {p.value}" for p in self.provenance)
        for w in self.warnings:
            lines.append(f"WARNING: {w}")
        return "\n".join(lines)


def plain(value: Any) -> Any:
    """Recursively turn library values into JSON-native ones with a stable order."""
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, bool) or value is None or isinstance(value, (int, str)):
        return value
    if isinstance(value, float):
        # pandas widens integer columns holding None to float
        if math.isnan(value):
            return None
        return int(value) if value.is_integer() else value
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else value.numerator
    if isinstance(value, CurveClass):
        return [value.rank, value.degree]
    if isinstance(value, sp.Basic):
        if value.is_Integer:
            return int(value)
        return str(value)
    if isinstance(value, pd.DataFrame):
        return [plain(row) for row in value.to_dict(orient="records")]
    if isinstance(value, dict):
        return {str(k): plain(v) for k, v in sorted(value.items(), key=lambda kv: str(kv[0]))}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    if isinstance(value, (set, frozenset)):
        return sorted(plain(v) for v in value)
    if hasattr(value, "item"):
        # numpy scalars
        return plain(value.item())
    return str(value)


def make_report(command: str, status: str, payload: Dict, provenance=(), warnings=()) -> Report:
    return Report(
        command=command,
        status=status,
        payload=plain(payload),
        provenance=[ProvenanceEntry(anchor=a, value=str(plain(v))) for a, v in provenance],
        warnings=list(warnings),
    )


def exit_code_for_error(exc: BaseException) -> int:
    if isinstance(exc, (DocumentError, DomainError, PreconditionError, IntegralityError, pydantic.ValidationError)):
        return EXIT_CODES["invalid"]
    if isinstance(exc, IndeterminateError):
        return EXIT_CODES["indeterminate"]
    if isinstance(exc, (VerificationFailure, InvariantViolation)):
        return EXIT_CODES["fail"]
    if isinstance(exc, WorkbenchError):
        return EXIT_CODES["invalid"]
    raise exc
