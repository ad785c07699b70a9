"""
The workbench: one object that owns the library modules and turns a
validated Request into a Report.
"""

import logging
from typing import Callable, Dict, List, Optional, Tuple

from pstab.config import BASE_POINT_LABEL
from pstab.curve_ktheory import CurveClass, CurveCtx, euler_pairing, hom_dims_semistable, slope
from pstab.documents import (
    CheckParams,
    DatumParams,
    DocumentParser,
    FmParams,
    FrdParams,
    PairingParams,
    Request,
    SheafConditionParams,
    SmParams,
    ThetaParams,
    WorkbenchDocument,
)
from pstab.elliptic_derived import (
    ELLIPTIC,
    EllipticObject,
    fm_kclass,
    fm_object,
    p_class_max_isoclasses,
    p_equivalence_classes,
    p_equivalent,
    theta_degree_general,
    theta_torsion,
    torsion_isoclasses,
)
from pstab.errors import DocumentError, PreconditionError
from pstab.pstability import (
    PDatum,
    Status,
    Verdict,
    check_object,
    cone_numerics,
    fm_push_datum,
    gen_datum_elliptic_torsion,
    gen_datum_prop12,
    gen_datum_prop14,
)
from pstab.reports import Report, make_report
from pstab.sheaf_euler import (
    SURFACE_CONSTANTS,
    SmSpec,
    f_rd_class,
    f_rd_slope_argument,
    gen_ideal_sheaf_conditions,
    gen_sheaf_conditions,
    gen_surface_pipeline,
    lemma51_bound,
    lemma51_count_gap,
    lemma54_threshold,
    sm_rank_det,
)
from pstab.surface_lattice import (
    SurfaceReport,
    bogomolov_family_identity,
    m1_m2_invariants,
    verify_exa_sheaf_lemma,
    verify_torsionfree_lemma,
)

logger = logging.getLogger(__name__)

# ==========================================
# (g, D, r, d) case whose hom(L, e) readings disagree
# ==========================================
PROP12_NOTE_CASE = {"g": 1, "D": 1, "r": 2, "d": 5}


def build_datum(p: DatumParams) -> PDatum:
    if p.kind == "prop12":
        return gen_datum_prop12(CurveCtx(p.g, p.D), p.r, p.d)
    if p.kind == "prop14":
        return gen_datum_prop14(CurveCtx(p.g, p.D), p.r, p.d)
    if p.kind == "elliptic-torsion":
        return gen_datum_elliptic_torsion(p.r)
    return fm_push_datum(gen_datum_elliptic_torsion(p.r))


def verdict_payload(name: str, verdict: Verdict) -> Dict:
    diffs = [dict(d.as_dict(), object=name) for d in verdict.diffs]
    cone = verdict.cone_report
    if cone is not None and not cone.consistent:
        diffs.append({"object": name, "index": "cone", "degree": None, "expected": 0, "actual": cone.chi})
    return {
        "object": name,
        "status": verdict.status,
        "diffs": diffs,
        "blocking": [{"index": b.index, "degree": b.degree, "reason": b.reason} for b in verdict.blocking],
        "cone": None if cone is None else {"chi": cone.chi, "orthogonality": cone.orthogonality, "reason": cone.reason},
    }


def worst_status(statuses: List[Status]) -> Status:
    if Status.FAIL in statuses:
        return Status.FAIL
    if Status.INDETERMINATE in statuses:
        return Status.INDETERMINATE
    return Status.PASS


class Workbench:
    """Dispatches each command to the library and assembles its Report."""

    def __init__(self):
        self._handlers: Dict[str, Callable] = {
            "pairing": self.pairing,
            "fm": self.fm,
            "gen-datum": self.gen_datum,
            "check": self.check,
            "theta": self.theta,
            "sm": self.sm,
            "frd": self.frd,
            "sheaf-conditions": self.sheaf_conditions,
            "verify-surface": self.verify_surface,
            "report-all": self.report_all,
        }
        logger.debug("=====> workbench ready with %d commands", len(self._handlers))

    def execute(self, command: str, pairs: List[str] = (), doc_path: Optional[str] = None) -> Report:
        document = DocumentParser.load(doc_path) if doc_path else None
        request = Request(command=command, params=DocumentParser.parse_pairs(list(pairs)), document=document)
        return self.run(request)

    def run(self, request: Request) -> Report:
        params = request.typed_params()
        logger.info("=====> running %s %s", request.command, request.params)
        report = self._handlers[request.command](params, request.document)
        logger.info("=====> %s finished: %s", request.command, report.status)
        return report

    # ==========================================
    # Curves
    # ==========================================
    def pairing(self, p: PairingParams, doc: Optional[WorkbenchDocument]) -> Report:
        ctx = CurveCtx(p.g)
        a = DocumentParser.parse_class(p.a, "params.a")
        b = DocumentParser.parse_class(p.b, "params.b")
        chi = euler_pairing(ctx, a, b)
        payload = {"g": p.g, "a": a, "b": b, "chi": chi}
        for name, c in (("a", a), ("b", b)):
            if c.rank > 0:
                payload[f"slope_{name}"] = slope(c)
        sheaves = all(c.is_sheaf_class and c != CurveClass(0, 0) for c in (a, b))
        if sheaves:
            dims = hom_dims_semistable(ctx, a, b)
            payload["hom"] = {"hom0": dims.hom0, "hom1": dims.hom1, "reason": dims.reason}
        provenance = [("chi(a, b) = r_a d_b - r_b d_a + r_a r_b (1 - g)", chi)]
        return make_report("pairing", "info", payload, provenance)

    def fm(self, p: FmParams, doc: Optional[WorkbenchDocument]) -> Report:
        if p.cls is None and (doc is None or not doc.objects):
            raise PreconditionError("fm needs cls=r,d or a document with objects")
        payload: Dict = {}
        if p.cls is not None:
            c = DocumentParser.parse_class(p.cls, "params.cls")
            payload["class"] = c
            payload["image"] = fm_kclass(c)
            payload["image_twice"] = fm_kclass(fm_kclass(c))
        if doc is not None and doc.objects:
            self._require_elliptic(doc)
            rows = []
            for i, o in enumerate(doc.objects):
                obj = DocumentParser.to_object(o)
                rows.append({"object": o.name or f"#{i}", "source": str(obj), "image": str(fm_object(obj))})
            payload["tables"] = {"fm objects": rows}
        return make_report("fm", "info", payload, [("FM(r, d) = (d, -r)", payload.get("image", "objects"))])

    def gen_datum(self, p: DatumParams, doc: Optional[WorkbenchDocument]) -> Report:
        datum = build_datum(p)
        payload = {
            "name": datum.name,
            "metadata": datum.metadata,
            "tables": {"conditions": datum.to_frame()},
            "document": DocumentParser.from_datum(datum).model_dump(mode="json"),
        }
        provenance: List[Tuple[str, object]] = []
        if datum.cone is not None:
            payload["cone_class"] = datum.cone.kclass
            numerics = cone_numerics(datum)
            payload["cone_numerics"] = {
                "hom_ab": numerics.hom_ab,
                "chi_ab": numerics.chi_ab,
                "injective_plausible": numerics.injective_plausible,
            }
        if p.kind == "prop14":
            provenance += [
                ("(2g + ceil(d/r) - d/r)(r^3 + r)", datum.metadata["expected"]),
                ("A", tuple(datum.metadata["A"])),
                ("B", tuple(datum.metadata["B"])),
            ]
        return make_report("gen-datum", "info", payload, provenance, datum.warnings)

    def check(self, p: CheckParams, doc: Optional[WorkbenchDocument]) -> Report:
        datum = self._check_datum(p, doc)
        results = []
        for name, kwargs in self._check_targets(p, doc):
            verdict = check_object(datum, **kwargs)
            results.append((name, verdict))
        entries = [verdict_payload(name, v) for name, v in results]
        status = worst_status([v.status for _, v in results])
        payload = {
            "datum": datum.name,
            "verdicts": entries,
            "diffs": [d for e in entries for d in e["diffs"]],
            "tables": {f"hom table {name}": v.table.to_frame() for name, v in results},
        }
        warnings = list(datum.warnings)
        return make_report("check", status.value, payload, warnings=warnings)

    def _check_datum(self, p: CheckParams, doc: Optional[WorkbenchDocument]) -> PDatum:
        if p.kind is not None:
            if p.r is None:
                raise DocumentError("generating a datum needs r", field="params.r")
            return build_datum(DatumParams(kind=p.kind, g=p.g, D=p.D, r=p.r, d=p.d))
        if doc is None or doc.datum is None:
            raise PreconditionError("check needs kind=... or a document with a datum")
        return DocumentParser.to_datum(doc.datum, DocumentParser.to_ctx(doc.context))

    def _check_targets(self, p: CheckParams, doc: Optional[WorkbenchDocument]) -> List[Tuple[str, Dict]]:
        targets: List[Tuple[str, Dict]] = []
        if p.object is not None:
            c = DocumentParser.parse_class(p.object, "params.object")
            support = DocumentParser.parse_support(p.support)
            if c.rank == 0 and not support:
                support = tuple(f"x{i}" for i in range(1, c.degree + 1))
            obj = EllipticObject.sheaf(c, support, p.shift)
            targets.append((str(obj), {"obj": obj}))
        if doc is not None:
            for i, o in enumerate(doc.objects):
                targets.append((o.name or f"#{i}", {"obj": DocumentParser.to_object(o)}))
            if doc.table is not None:
                table, kclass = DocumentParser.to_table(doc.table)
                targets.append(("table", {"table": table, "kclass": kclass}))
        if not targets:
            raise PreconditionError("check needs object=r,d or a document with objects or a table")
        return targets

    def theta(self, p: ThetaParams, doc: Optional[WorkbenchDocument]) -> Report:
        payload: Dict = {}
        provenance: List[Tuple[str, object]] = []
        if p.support is not None:
            t = EllipticObject.torsion(DocumentParser.parse_support(p.support))
            divisor = theta_torsion(t)
            payload["theta"] = {"lines": list(divisor.lines), "ambient": divisor.ambient, "degree": divisor.degree}
            if p.other is not None:
                payload["p_equivalent"] = p_equivalent(t, EllipticObject.torsion(DocumentParser.parse_support(p.other)))
        if p.g is not None and p.r is not None and p.d is not None:
            payload["theta_degree"] = theta_degree_general(p.g, p.r, p.d)
            provenance.append(("deg Theta_e = (2g + ceil(d/r) - d/r)(r^3 + r)", payload["theta_degree"]))
        elif p.r is not None:
            payload["max_isoclasses"] = p_class_max_isoclasses(p.r)
            classes = p_equivalence_classes(torsion_isoclasses(BASE_POINT_LABEL, p.r))
            payload["tables"] = {
                "isoclasses": [{"class": i, "object": str(o)} for i, group in enumerate(classes) for o in group]
            }
            provenance.append(("isoclasses in one P-class = partitions of r", payload["max_isoclasses"]))
        if not payload:
            raise PreconditionError("theta needs support=..., or g, r, d, or r alone")
        return make_report("theta", "info", payload, provenance)

    # ==========================================
    # Sheaves and surfaces
    # ==========================================
    def sm(self, p: SmParams, doc: Optional[WorkbenchDocument]) -> Report:
        rank, det = sm_rank_det(SmSpec(p.dim_v, p.m))
        payload: Dict = {"dim_v": p.dim_v, "m": p.m, "rank": rank, "det_exponent": det}
        if p.dim_u is not None and p.n is not None:
            payload["lemma51"] = {"bound": lemma51_bound(p.dim_u, p.n), "count_gap": lemma51_count_gap(p.dim_u, p.n, p.m)}
        if p.hom_bc is not None:
            payload["lemma54_threshold"] = lemma54_threshold(p.dim_v, p.hom_bc)
        provenance = [("rank C(m+dimV-1, m+1)", rank), ("det -C(m+dimV-1, m)", det)]
        return make_report("sm", "info", payload, provenance)

    def frd(self, p: FrdParams, doc: Optional[WorkbenchDocument]) -> Report:
        ctx = CurveCtx(p.g)
        classes = f_rd_class(ctx, p.r, p.d)
        argument = f_rd_slope_argument(ctx, p.r, p.d)
        payload = {
            "A": classes.a_class,
            "B": classes.b_class,
            "F": classes.cokernel,
            "test_class": classes.test_class,
            "det_exponent": classes.det_exponent,
            "slope_argument": {
                "holds": argument.holds,
                "quotients_checked": argument.quotients_checked,
                "weak_form_failures": argument.weak_form_failures,
            },
            "witnesses": argument.counterexamples,
        }
        provenance = [("det F = L_1^(r^2(g-1) - rd)", classes.det_exponent)]
        return make_report("frd", "pass" if argument.holds else "fail", payload, provenance)

    def sheaf_conditions(self, p: SheafConditionParams, doc: Optional[WorkbenchDocument]) -> Report:
        if p.mode == "ideal":
            if p.colength is None or p.m is None:
                raise PreconditionError("mode=ideal needs colength and m")
            out = gen_ideal_sheaf_conditions(p.colength, p.m)
        else:
            if p.p is None:
                raise DocumentError("a Hilbert polynomial p is required", field="params.p")
            poly = DocumentParser.parse_polynomial(p.p)
            if p.mode == "surface":
                given = {name: getattr(p, name) for name in SURFACE_CONSTANTS if getattr(p, name) is not None}
                out = gen_surface_pipeline(poly, given, p.dim_v, p.rank)
            else:
                if p.n is None:
                    raise DocumentError("the dimension n is required", field="params.n")
                out = gen_sheaf_conditions(p.n, poly, p.dim_v if p.n == 2 else None)
        data = out.as_dict()
        payload = {
            "constants": data["constants"],
            "b": data["b"],
            "metadata": data["metadata"],
            "blocks": out.blocks,
            "tables": {"conditions": out.to_frame()},
        }
        return make_report("sheaf-conditions", "info", payload, warnings=out.warnings)

    def verify_surface(self, p, doc: Optional[WorkbenchDocument]) -> Report:
        reports: List[SurfaceReport] = [
            verify_exa_sheaf_lemma(),
            verify_torsionfree_lemma(),
            bogomolov_family_identity(),
            m1_m2_invariants(),
        ]
        notes = [n for r in reports for n in r.notes]
        note_datum = gen_datum_prop12(
            CurveCtx(PROP12_NOTE_CASE["g"], PROP12_NOTE_CASE["D"]), PROP12_NOTE_CASE["r"], PROP12_NOTE_CASE["d"]
        )
        notes.extend(f"prop12 {PROP12_NOTE_CASE}: {w}" for w in note_datum.warnings)

        diffs = [
            {"report": r.name, "check": c.name, "expected": c.expected, "actual": c.actual}
            for r in reports
            for c in r.checks
            if not c.ok
        ]
        witnesses = {f"{r.name}: {name}": w for r in reports for name, w in r.witnesses.items()}
        payload = {
            "searches": {f"{r.name}: {name}": s.as_dict() for r in reports for name, s in r.searches.items()},
            "notes": notes,
            "diffs": diffs,
            "witnesses": witnesses,
            "tables": {r.name: [c.as_dict() for c in r.checks] for r in reports},
        }
        provenance = [(f"{r.name}: {c.name}", c.actual) for r in reports for c in r.checks]
        status = "pass" if all(r.ok for r in reports) else "fail"
        return make_report("verify-surface", status, payload, provenance)

    def report_all(self, p, doc: Optional[WorkbenchDocument]) -> Report:
        from pstab.acceptance import AcceptanceHarness

        harness = AcceptanceHarness(self)
        frame = harness.run_all()
        summary = harness.get_evaluation_summary()
        failed = frame[frame["status"] != "pass"]
        payload = {
            "summary": summary,
            "diffs": [{"check": row["check"], "detail": row["detail"]} for row in failed.to_dict(orient="records")],
            "tables": {"acceptance": frame.drop(columns=["seconds"])},
        }
        return make_report("report-all", "pass" if failed.empty else "fail", payload)

    @staticmethod
    def _require_elliptic(doc: WorkbenchDocument) -> CurveCtx:
        ctx = DocumentParser.to_ctx(doc.context)
        if ctx.genus != ELLIPTIC.genus:
            raise PreconditionError(f"Fourier-Mukai needs an elliptic curve, got genus {ctx.genus}")
        return ctx
