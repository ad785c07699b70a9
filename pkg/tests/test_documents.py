import json

import pytest

from pstab.curve_ktheory import CurveClass, CurveCtx
from pstab.documents import DatumDoc, DocumentParser, Request
from pstab.elliptic_derived import ELLIPTIC
from pstab.errors import DocumentError
from pstab.pstability import Direction, gen_datum_elliptic_torsion, gen_datum_prop14

VALID = {
    "schema_version": "1",
    "context": {"genus": 1},
    "objects": [{"name": "t", "atoms": [{"rank": 0, "degree": 2, "support": ["x", "y"]}]}],
}


def test_loads_valid_document():
    doc = DocumentParser.loads(json.dumps(VALID))
    obj = DocumentParser.to_object(doc.objects[0])
    assert obj.kclass == CurveClass(0, 2)
    assert obj.is_torsion
    assert DocumentParser.to_ctx(doc.context).genus == 1


def test_invalid_json_reports_the_line():
    with pytest.raises(DocumentError) as info:
        DocumentParser.loads('{\n  "schema_version": "1",\n  "context": {\n}')
    assert info.value.line is not None


def test_unsupported_schema_version():
    with pytest.raises(DocumentError) as info:
        DocumentParser.loads(json.dumps(dict(VALID, schema_version="2")))
    assert info.value.field == "schema_version"


def test_unknown_key_is_rejected_with_field_and_line():
    text = json.dumps(dict(VALID, context={"genus": 1, "colour": "red"}), indent=2)
    with pytest.raises(DocumentError) as info:
        DocumentParser.loads(text)
    assert info.value.field == "context.colour"
    assert info.value.line == next(i for i, l in enumerate(text.splitlines(), 1) if '"colour"' in l)


def test_context_needs_exactly_one_kind():
    with pytest.raises(DocumentError):
        DocumentParser.loads(json.dumps(dict(VALID, context={"genus": 1, "surface": "P1xE"})))
    with pytest.raises(DocumentError):
        DocumentParser.loads(json.dumps(dict(VALID, context={})))


def test_load_missing_file(tmp_path):
    with pytest.raises(DocumentError):
        DocumentParser.load(str(tmp_path / "absent.json"))


def test_parse_pairs():
    assert DocumentParser.parse_pairs(["r=2", "d=-3"]) == {"r": "2", "d": "-3"}
    with pytest.raises(DocumentError):
        DocumentParser.parse_pairs(["r2"])
    with pytest.raises(DocumentError):
        DocumentParser.parse_pairs(["r=1", "r=2"])


def test_request_rejects_unknown_params():
    request = Request(command="pairing", params={"g": "1", "a": "1,0", "b": "1,2", "c": "3"})
    with pytest.raises(DocumentError) as info:
        request.typed_params()
    assert info.value.field == "params.c"


def test_request_converts_params():
    params = Request(command="frd", params={"g": "2", "r": "2", "d": "3"}).typed_params()
    assert (params.g, params.r, params.d) == (2, 2, 3)


@pytest.mark.parametrize("text", ["2", "a,b", "1,2,3"])
def test_parse_class_errors(text):
    with pytest.raises(DocumentError):
        DocumentParser.parse_class(text)


def test_parse_polynomial():
    assert DocumentParser.parse_polynomial("k**2 + 7*k")(1) == 8
    with pytest.raises(DocumentError):
        DocumentParser.parse_polynomial("k +")


def test_parse_polynomial_requires_integer_values():
    assert DocumentParser.parse_polynomial("k*(k+1)/2")(3) == 6
    with pytest.raises(DocumentError) as info:
        DocumentParser.parse_polynomial("k/2")
    assert info.value.field == "params.p"


def test_datum_document_round_trip():
    datum = gen_datum_elliptic_torsion(2)
    doc = DocumentParser.from_datum(datum)
    reparsed = DatumDoc.model_validate_json(doc.model_dump_json())
    assert reparsed == doc
    rebuilt = DocumentParser.to_datum(reparsed, ELLIPTIC)
    assert rebuilt.conditions == datum.conditions
    assert rebuilt.cone == datum.cone


def test_prop14_datum_keeps_its_guarantee():
    datum = gen_datum_prop14(CurveCtx(1), 1, 0)
    rebuilt = DocumentParser.to_datum(DocumentParser.from_datum(datum), CurveCtx(1))
    assert rebuilt.cone.guarantee == CurveClass(1, 0)
    assert rebuilt.condition(1).direction == Direction.CONTRAVARIANT


def test_table_document():
    doc = DocumentParser.loads(
        json.dumps(
            dict(
                VALID,
                table={
                    "entries": [{"index": 0, "degree": 0, "dim": 2}, {"index": 1, "degree": 0, "dim": 2}],
                    "directions": {"0": "covariant"},
                    "kclass": [0, 2],
                },
            )
        )
    )
    table, kclass = DocumentParser.to_table(doc.table)
    assert table.get(0, 0) == 2
    assert kclass == CurveClass(0, 2)
