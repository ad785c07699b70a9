from fractions import Fraction

import pandas as pd
import pydantic
import pytest
import sympy as sp

from pstab.curve_ktheory import CurveClass
from pstab.errors import (
    DocumentError,
    IndeterminateError,
    IntegralityError,
    InvariantViolation,
    PreconditionError,
    VerificationFailure,
)
from pstab.pstability import Status
from pstab.reports import Report, exit_code_for_error, make_report, plain


def test_report_round_trip():
    report = make_report(
        "pairing",
        "info",
        {"a": CurveClass(1, 2), "mu": Fraction(1, 2), "n": sp.Integer(3), "status": Status.PASS},
        provenance=[("chi", 4)],
        warnings=["note"],
    )
    assert report.payload == {"a": [1, 2], "mu": "1/2", "n": 3, "status": "pass"}
    assert Report.from_json(report.to_json()) == report


def test_report_json_is_sorted_and_stable():
    first = make_report("sm", "info", {"z": 1, "a": {"y": 2, "b": 3}}).to_json()
    second = make_report("sm", "info", {"a": {"b": 3, "y": 2}, "z": 1}).to_json()
    assert first == second


def test_fail_requires_evidence():
    with pytest.raises(pydantic.ValidationError):
        Report(command="check", status="fail", payload={})
    with pytest.raises(pydantic.ValidationError):
        Report(command="check", status="pass", payload={"diffs": [{"index": 0}]})
    assert Report(command="check", status="fail", payload={"witnesses": {"s": {"x": 1}}}).exit_code == 1


@pytest.mark.parametrize("status,code", [("pass", 0), ("info", 0), ("indeterminate", 3)])
def test_exit_codes(status, code):
    assert Report(command="check", status=status).exit_code == code


def test_exit_code_for_errors():
    assert exit_code_for_error(DocumentError("bad")) == 2
    assert exit_code_for_error(PreconditionError("bad")) == 2
    assert exit_code_for_error(IndeterminateError("open")) == 3
    assert exit_code_for_error(IntegralityError("k/2 at k=1")) == 2
    assert exit_code_for_error(InvariantViolation("broken")) == 1
    assert exit_code_for_error(VerificationFailure("witness", {"n_p": 0})) == 1
    with pytest.raises(KeyError):
        exit_code_for_error(KeyError("other"))


def test_plain_cleans_dataframes():
    frame = pd.DataFrame([{"degree": 0, "expected": 2}, {"degree": None, "expected": 3}])
    assert plain(frame) == [{"degree": 0, "expected": 2}, {"degree": None, "expected": 3}]
    assert plain({2: (1, 2)}) == {"2": [1, 2]}
