"""
Acceptance harness behind `report-all`.

Every check returns (cases, failures); the harness times it, collects one row
per check into a DataFrame and keeps a history of runs with a summary.
"""

import logging
import random
import time
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Tuple

import pandas as pd

from pstab.config import (
    CLASS_BOUND,
    FRD_GRID,
    PARTITION_MAX,
    PROP12_CLASS_BOX,
    PROP14_GRID,
    RANDOM_SAMPLES,
    RANDOM_SEED,
    TORSION_MAX_LENGTH,
    WORKERS,
)
from pstab.curve_ktheory import CurveClass, CurveCtx, euler_pairing, twist
from pstab.documents import Request
from pstab.elliptic_derived import (
    EllipticObject,
    fm_kclass,
    p_class_max_isoclasses,
    theta_degree_general,
    torsion_isoclasses,
)
from pstab.errors import VerificationFailure, WorkbenchError
from pstab.numerics import ceil_div, partition_count, partitions_brute_force
from pstab.pstability import (
    Status,
    check_class,
    check_object,
    fm_push_datum,
    gen_datum_elliptic_torsion,
    gen_datum_prop12,
    gen_datum_prop14,
)
from pstab.sheaf_euler import SmSpec, cone_pair_classes, f_rd_class, f_rd_slope_argument, sm_rank_det
from pstab.surface_lattice import (
    F_P,
    F_Q,
    ONE,
    POINT,
    bogomolov_family_identity,
    cup,
    m1_m2_invariants,
    verify_exa_sheaf_lemma,
    verify_torsionfree_lemma,
)

logger = logging.getLogger(__name__)

CheckResult = Tuple[int, List[str]]


def _grid(bounds: Dict[str, Tuple[int, int]], *names: str):
    ranges = [range(bounds[n][0], bounds[n][1] + 1) for n in names]

    def walk(i: int, prefix: Tuple[int, ...]):
        if i == len(ranges):
            yield prefix
            return
        for v in ranges[i]:
            yield from walk(i + 1, prefix + (v,))

    return walk(0, ())


def _random_class(rng: random.Random) -> CurveClass:
    return CurveClass(rng.randint(-CLASS_BOUND, CLASS_BOUND), rng.randint(-CLASS_BOUND, CLASS_BOUND))


class AcceptanceHarness:
    def __init__(self, workbench=None):
        self.workbench = workbench
        self.evaluation_history: List[Dict[str, Any]] = []
        self.checks: List[Tuple[str, str, Callable[[], CheckResult]]] = [
            ("prop14 identity", "curves", self.check_prop14_identity),
            ("theta degree coincidence", "curves", self.check_theta_coincidence),
            ("fm test vectors", "elliptic", self.check_fm_vectors),
            ("elliptic torsion equivalence", "elliptic", self.check_elliptic_equivalence),
            ("frd consistency", "sheaves", self.check_frd_consistency),
            ("frd slope argument", "sheaves", self.check_slope_argument),
            ("sm formulas", "sheaves", self.check_sm_formulas),
            ("surface verifiers", "surface", self.check_surface_verifiers),
            ("partition bound", "elliptic", self.check_partitions),
            ("discrepancy notes", "surface", self.check_discrepancy_notes),
            ("pairing properties", "properties", self.check_pairing_properties),
            ("cup associativity", "properties", self.check_cup_associativity),
            ("verdict determinism", "properties", self.check_verdict_determinism),
            ("prop12 characterisation", "properties", self.check_prop12_characterisation),
        ]

    # ==========================================
    # Running
    # ==========================================
    def _run_one(self, entry: Tuple[str, str, Callable[[], CheckResult]]) -> Dict[str, Any]:
        name, area, fn = entry
        start = time.perf_counter()
        try:
            cases, failures = fn()
        except WorkbenchError as e:
            cases, failures = 0, [f"{type(e).__name__}: {e}"]
        seconds = time.perf_counter() - start
        logger.info("=====> %s: %d cases, %d failures", name, cases, len(failures))
        return {
            "check": name,
            "area": area,
            "status": "pass" if not failures else "fail",
            "cases": cases,
            "failures": len(failures),
            "detail": "; ".join(failures[:3]),
            "seconds": round(seconds, 3),
        }

    def run_all(self, names: Optional[List[str]] = None) -> pd.DataFrame:
        selected = [c for c in self.checks if names is None or c[0] in names]
        if WORKERS > 1:
            with ThreadPoolExecutor(max_workers=WORKERS) as pool:
                rows = list(pool.map(self._run_one, selected))
        else:
            rows = [self._run_one(c) for c in selected]

        df = pd.DataFrame(rows, columns=["check", "area", "status", "cases", "failures", "detail", "seconds"])
        self.evaluation_history.append(
            {
                "timestamp": datetime.now().isoformat(),
                "results": rows,
                "summary": {
                    "checks": len(rows),
                    "passed": int((df["status"] == "pass").sum()),
                    "failed": int((df["status"] != "pass").sum()),
                    "cases": int(df["cases"].sum()),
                },
            }
        )
        return df

    def get_evaluation_summary(self) -> Optional[Dict[str, Any]]:
        if not self.evaluation_history:
            return None
        return self.evaluation_history[-1]["summary"]

    def export_evaluation_results(self, df: pd.DataFrame) -> str:
        return df.to_json(orient="records", indent=2)

    # ==========================================
    # Checks
    # ==========================================
    def check_prop14_identity(self) -> CheckResult:
        cases, failures = 0, []
        for g, r, d in _grid(PROP14_GRID, "g", "r", "d"):
            ctx = CurveCtx(g)
            expected = gen_datum_prop14(ctx, r, d).metadata["expected"]
            formula = (2 * g + ceil_div(d, r) - Fraction(d, r)) * (r**3 + r)
            a, _ = cone_pair_classes(ctx, r, d)
            oracle = -euler_pairing(ctx, CurveClass(r, -d), a)
            cases += 1
            if not expected == formula == oracle:
                failures.append(f"g={g} r={r} d={d}: {expected} / {formula} / {oracle}")
        return cases, failures

    def check_theta_coincidence(self) -> CheckResult:
        cases, failures = 0, []
        for g, r, d in _grid(PROP14_GRID, "g", "r", "d"):
            a, _ = cone_pair_classes(CurveCtx(g), r, d)
            cases += 1
            if theta_degree_general(g, r, d) != -euler_pairing(CurveCtx(g), CurveClass(r, -d), a):
                failures.append(f"g={g} r={r} d={d}")
        return cases, failures

    def check_fm_vectors(self) -> CheckResult:
        vectors = {(1, 0): (0, -1), (1, -3): (-3, -1), (1, 2): (2, -1)}
        failures = [
            f"FM{src} = {fm_kclass(CurveClass(*src))}, wanted {dst}"
            for src, dst in vectors.items()
            if fm_kclass(CurveClass(*src)) != CurveClass(*dst)
        ]
        rng = random.Random(RANDOM_SEED)
        for _ in range(RANDOM_SAMPLES):
            c = _random_class(rng)
            if fm_kclass(fm_kclass(c)) != -c:
                failures.append(f"FM(FM({c})) != -{c}")
        return len(vectors) + RANDOM_SAMPLES, failures

    def check_elliptic_equivalence(self) -> CheckResult:
        cases, failures = 0, []
        for r in range(1, TORSION_MAX_LENGTH + 1):
            datum = gen_datum_elliptic_torsion(r)
            for length in range(1, TORSION_MAX_LENGTH + 1):
                spread = EllipticObject.torsion(f"x{i}" for i in range(length))
                for t in [spread] + torsion_isoclasses("x0", length):
                    status = check_object(datum, t).status
                    wanted = Status.PASS if length == r else Status.FAIL
                    cases += 1
                    if status != wanted:
                        failures.append(f"r={r}: {t} gave {status.value}")
            pushed = fm_push_datum(datum)
            bundle = EllipticObject.sheaf(CurveClass(r, 0))
            cases += 1
            if check_object(pushed, bundle).status != Status.PASS:
                failures.append(f"r={r}: ({r},0) does not pass the pushed datum")
        return cases, failures

    def check_frd_consistency(self) -> CheckResult:
        cases = 0
        for g, r, d in _grid(FRD_GRID, "g", "r", "d"):
            f_rd_class(CurveCtx(g), r, d)
            cases += 1
        return cases, []

    def check_slope_argument(self) -> CheckResult:
        cases, failures = 0, []
        for g, r, d in _grid({"g": (0, 3), "r": (1, 4), "d": (-10, 10)}, "g", "r", "d"):
            result = f_rd_slope_argument(CurveCtx(g), r, d, degree_bound=20)
            cases += 1
            if not result.holds:
                failures.append(f"g={g} r={r} d={d}: {[str(q) for q in result.counterexamples[:2]]}")
        return cases, failures

    def check_sm_formulas(self) -> CheckResult:
        failures = []
        for n in range(1, 8):
            if sm_rank_det(SmSpec(n + 1, 0)) != (n, -1):
                failures.append(f"Euler sequence, n={n}")
        for m in range(1, 12):
            if sm_rank_det(SmSpec(2, m - 1)) != (1, -m):
                failures.append(f"dim V = 2, m={m}")
        return 7 + 11, failures

    def check_surface_verifiers(self) -> CheckResult:
        reports = [verify_exa_sheaf_lemma(), verify_torsionfree_lemma(), bogomolov_family_identity(), m1_m2_invariants()]
        failures = []
        for report in reports:
            try:
                report.raise_for_failure()
            except VerificationFailure as e:
                failures.append(str(e))
        return sum(len(r.checks) + len(r.searches) for r in reports), failures

    def check_partitions(self) -> CheckResult:
        failures = [f"r={r}" for r in range(0, PARTITION_MAX + 1) if partition_count(r) != partitions_brute_force(r)]
        failures += [f"isoclasses r={r}" for r in range(1, PARTITION_MAX + 1) if p_class_max_isoclasses(r) != partition_count(r)]
        return 2 * PARTITION_MAX + 1, failures

    def check_discrepancy_notes(self) -> CheckResult:
        if self.workbench is None:
            return 0, ["no workbench attached"]
        report = self.workbench.run(Request(command="verify-surface"))
        notes = report.payload.get("notes", [])
        wanted = {
            "chi(E(k))": ("3*k**2 + 7*k", "k**2 + 7*k"),
            "hom(L, e)": ("printed value", "literal pairing"),
        }
        failures = []
        for key, values in wanted.items():
            hits = [n for n in notes if key in n]
            if not hits or not all(v in hits[0] for v in values):
                failures.append(f"missing note for {key}")
        return len(wanted), failures

    def check_pairing_properties(self) -> CheckResult:
        rng = random.Random(RANDOM_SEED + 1)
        failures = []
        for _ in range(RANDOM_SAMPLES):
            ctx = CurveCtx(rng.randint(0, 5))
            a, b, c = _random_class(rng), _random_class(rng), _random_class(rng)
            if euler_pairing(ctx, a + b, c) != euler_pairing(ctx, a, c) + euler_pairing(ctx, b, c):
                failures.append(f"additivity in the first slot at {a}, {b}, {c}")
            if euler_pairing(ctx, a.shift(1), b) != -euler_pairing(ctx, a, b):
                failures.append(f"shift sign at {a}, {b}")
            k, l = rng.randint(-9, 9), rng.randint(-9, 9)
            if twist(twist(a, k), l) != twist(a, k + l):
                failures.append(f"twist additivity at {a}, {k}, {l}")
        return RANDOM_SAMPLES, failures

    def check_cup_associativity(self) -> CheckResult:
        basis = [ONE, F_Q, F_P, POINT]
        failures = [
            f"({x} {y}) {z}"
            for x in basis
            for y in basis
            for z in basis
            if cup(cup(x, y), z) != cup(x, cup(y, z))
        ]
        return len(basis) ** 3, failures

    def check_verdict_determinism(self) -> CheckResult:
        if self.workbench is None:
            return 0, ["no workbench attached"]
        request = Request(command="check", params={"kind": "elliptic-torsion", "r": "2", "object": "0,2"})
        first = self.workbench.run(request).to_json()
        second = self.workbench.run(request).to_json()
        return 1, [] if first == second else ["check output differs between identical runs"]

    def check_prop12_characterisation(self) -> CheckResult:
        cases, failures = 0, []
        for g, D, r in _grid({"g": (0, 2), "D": (1, 2), "r": (1, 2)}, "g", "D", "r"):
            bound = (2 * g - 2 + D) * r
            for d in range(bound + 1, bound + 4):
                datum = gen_datum_prop12(CurveCtx(g, D), r, d)
                cases += 1
                if check_object(datum, EllipticObject.sheaf(CurveClass(r, d))).status != Status.PASS:
                    failures.append(f"semistable ({r},{d}) at g={g}, D={D} does not pass")
                for other_r, other_d in _grid(PROP12_CLASS_BOX, "r", "d"):
                    other = CurveClass(other_r, other_d)
                    cases += 1
                    if (other == CurveClass(r, d)) == bool(check_class(datum, other)):
                        failures.append(f"class {other} against the ({r},{d}) datum at g={g}, D={D}")
        return cases, failures
