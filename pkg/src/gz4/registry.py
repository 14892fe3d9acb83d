"""The table of mirror K3 families and a verification harness over it.

The registry file is UTF-8 JSON::

    {"schema_version": 1,
     "families": [{"id", "fano", "phi", "group", "status", "notes"}, ...]}

``phi`` is a Laurent polynomial in the parser grammar or ``external:#ref``;
``group`` is a label in the modgroup grammar (explicit presentation), or any
other text, which is kept as a label only.  The prefix ``label:`` forces a
grammar-shaped label to be label-only.
"""

from __future__ import annotations

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

import mpmath as mp

from .modgroup import (
    CMPoint,
    GroupSpec,
    ModGroupError,
    PointH,
    cm_points,
    moebius_apply,
    parse_group_label,
    stabilizer_order,
)
from .periods import (
    LaurentParseError,
    LaurentPolynomial3,
    NotMUM,
    OriginNotInterior,
    apply_rec,
    find_recurrence,
    frobenius_solutions,
    is_reflexive,
    mirror_map,
    newton_polytope,
    parse_laurent,
    period_sequence,
    period_sequence_naive,
    singular_points,
)

SCHEMA_VERSION = 1
ENV_VAR = "GZ4_REGISTRY"
EXTERNAL_PREFIX = "external:"
LABEL_ONLY_PREFIX = "label:"
STATUSES = ("proved", "conjectural")

EXPECTED_COUNT = 23
EXPECTED_CONJECTURAL = frozenset({"2-6", "2-12", "2-21", "2-32", "3-13"})
EXPECTED_EXTERNAL = {"2-6": "#3873.2", "2-12": "#1193", "3-1": "#3873.4"}
FRICKE_LEVELS = (2, 3, 4, 5, 6, 7, 8, 9, 11)

# finite nonzero singular points expected for the (N,1) families
EXPECTED_SINGULAR_COUNTS = {f"{N},1": (1 if N <= 4 else 2 if N <= 9 else 4) for N in FRICKE_LEVELS}


def _t2_34t_1_roots(dps: int):
    with mp.workdps(dps):
        return [17 - 12 * mp.sqrt(2), 17 + 12 * mp.sqrt(2)]


def _fermi_points(dps: int):
    with mp.workdps(dps):
        return [mp.mpf(s) / d for s in (1, -1) for d in (6, 2)]


# singular values that must occur, as exact mp values at the requested precision
EXPECTED_SINGULAR_VALUES: dict[str, Callable[[int], list]] = {
    "6,1": _t2_34t_1_roots,
    "3-27": _fermi_points,
}

QUICK_TERMS = 12
RECURRENCE_TERMS = 40
PREDICTED_TERMS = 10
RECURRENCE_BOX = (4, 5)
MIRROR_ORDER = 20


class RegistryError(ValueError):
    pass


class ParseError(RegistryError):
    pass


class InvariantViolation(RegistryError):
    pass


class UnknownFamily(KeyError):
    pass


@dataclass(frozen=True)
class FamilyRecord:
    id: str
    fano: tuple[int, int] | str
    phi_text: str
    group_label: str
    status: str
    notes: str = ""
    phi: LaurentPolynomial3 | None = field(default=None, compare=False, repr=False)

    @property
    def external_ref(self) -> str | None:
        if self.phi_text.startswith(EXTERNAL_PREFIX):
            return self.phi_text[len(EXTERNAL_PREFIX):]
        return None

    @property
    def has_phi(self) -> bool:
        return self.phi is not None

    @property
    def label_only(self) -> bool:
        return self.group_label.startswith(LABEL_ONLY_PREFIX) or parse_group_label(
            self.group_label, validate=False) is None

    def group(self) -> GroupSpec | None:
        """The explicit presentation, or None for label-only groups."""
        if self.group_label.startswith(LABEL_ONLY_PREFIX):
            return None
        return parse_group_label(self.group_label)

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "fano": list(self.fano) if isinstance(self.fano, tuple) else self.fano,
            "phi": self.phi_text,
            "group": self.group_label,
            "status": self.status,
            "notes": self.notes,
        }


_FIELDS = ("id", "fano", "phi", "group", "status", "notes")


def _record_from_json(row: Any, index: int) -> FamilyRecord:
    if not isinstance(row, dict):
        raise ParseError(f"row {index}: expected an object")
    rid = row.get("id", f"#{index}")
    missing = [k for k in _FIELDS if k not in row]
    if missing:
        raise ParseError(f"row {rid}: missing fields {missing}")
    extra = sorted(set(row) - set(_FIELDS))
    if extra:
        raise ParseError(f"row {rid}: unknown fields {extra}")
    fano = row["fano"]
    if isinstance(fano, list):
        if len(fano) != 2 or not all(isinstance(v, int) for v in fano):
            raise ParseError(f"row {rid}: fano must be [N, d] or a Mori-Mukai label")
        fano = (fano[0], fano[1])
    elif not isinstance(fano, str):
        raise ParseError(f"row {rid}: fano must be [N, d] or a Mori-Mukai label")
    if row["status"] not in STATUSES:
        raise ParseError(f"row {rid}: status must be one of {STATUSES}")
    text = row["phi"]
    phi = None
    if not text.startswith(EXTERNAL_PREFIX):
        try:
            phi = parse_laurent(text)
        except LaurentParseError as exc:
            raise ParseError(f"row {rid}: {exc}") from None
    return FamilyRecord(str(rid), fano, text, str(row["group"]), row["status"], str(row["notes"]), phi)


def _check_invariants(records: Sequence[FamilyRecord]) -> None:
    ids = [r.id for r in records]
    if len(set(ids)) != len(ids):
        raise InvariantViolation("duplicate family ids")
    if len(records) != EXPECTED_COUNT:
        raise InvariantViolation(f"expected {EXPECTED_COUNT} families, found {len(records)}")
    conj = {r.id for r in records if r.status == "conjectural"}
    if conj != EXPECTED_CONJECTURAL:
        raise InvariantViolation(f"conjectural rows {sorted(conj)} differ from {sorted(EXPECTED_CONJECTURAL)}")
    external = {r.id: r.external_ref for r in records if r.external_ref is not None}
    if external != EXPECTED_EXTERNAL:
        raise InvariantViolation(f"external polynomial rows {external} differ from {EXPECTED_EXTERNAL}")
    by_id = {r.id: r for r in records}
    for N in FRICKE_LEVELS:
        rec = by_id.get(f"{N},1")
        if rec is None or rec.group_label.replace(" ", "") != f"G0({N})+{N}":
            raise InvariantViolation(f"row {N},1 must carry group G0({N})+{N}")
    for r in records:
        if r.phi is not None:
            try:
                ok = is_reflexive(newton_polytope(r.phi))
            except OriginNotInterior as exc:
                raise InvariantViolation(f"row {r.id}: {exc}") from None
            if not ok:
                raise InvariantViolation(f"row {r.id}: Newton polytope is not reflexive")
        if not r.group_label.startswith(LABEL_ONLY_PREFIX):
            try:
                r.group()
            except ModGroupError as exc:
                raise InvariantViolation(f"row {r.id}: group {r.group_label}: {exc}") from None


def default_registry_path() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path(str(resources.files("gz4") / "data" / "families.json"))


def parse_registry(text: str) -> tuple[FamilyRecord, ...]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict) or data.get("schema_version") != SCHEMA_VERSION:
        raise ParseError(f"expected an object with schema_version {SCHEMA_VERSION}")
    rows = data.get("families")
    if not isinstance(rows, list):
        raise ParseError("'families' must be a list")
    records = tuple(_record_from_json(row, i) for i, row in enumerate(rows))
    _check_invariants(records)
    return records


def load_registry(path: str | Path | None = None) -> tuple[FamilyRecord, ...]:
    path = Path(path) if path is not None else default_registry_path()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    return parse_registry(text)


def dump_registry(records: Iterable[FamilyRecord]) -> str:
    data = {"schema_version": SCHEMA_VERSION, "families": [r.to_json() for r in records]}
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def find_family(records: Sequence[FamilyRecord], family_id: str) -> FamilyRecord:
    key = family_id.strip().strip("()").replace(" ", "")
    for r in records:
        if r.id == key:
            return r
    raise UnknownFamily(family_id)


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str  # pass | fail | skipped
    detail: dict[str, Any]
    parameters: dict[str, Any]
    seconds: float = 0.0

    def to_json(self, deterministic: bool = False) -> dict[str, Any]:
        out = {"name": self.name, "status": self.status, "parameters": self.parameters, "detail": self.detail}
        if not deterministic:
            out["seconds"] = round(self.seconds, 3)
        return out


@dataclass(frozen=True)
class FamilyReport:
    id: str
    status: str
    group: str
    checks: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    @property
    def fully_checked(self) -> bool:
        return all(c.status != "skipped" for c in self.checks if c.name in PERIOD_CHECKS)

    def check(self, name: str) -> CheckResult:
        return next(c for c in self.checks if c.name == name)

    def to_json(self, deterministic: bool = False) -> dict[str, Any]:
        return {
            "id": self.id,
            "status": self.status,
            "group": self.group,
            "ok": self.ok,
            "checks": [c.to_json(deterministic) for c in self.checks],
        }


@dataclass(frozen=True)
class AggregateReport:
    depth: str
    families: tuple[FamilyReport, ...]

    @property
    def ok(self) -> bool:
        return all(f.ok for f in self.families)

    def summary(self) -> dict[str, Any]:
        return {
            "families": len(self.families),
            "fully_checked": sum(1 for f in self.families if f.fully_checked),
            "partially_checked": sum(1 for f in self.families if not f.fully_checked),
            "failed": [f.id for f in self.families if not f.ok],
            "conjectural": [f.id for f in self.families if f.status == "conjectural"],
        }

    def to_json(self, deterministic: bool = False) -> dict[str, Any]:
        return {
            "depth": self.depth,
            "ok": self.ok,
            "summary": self.summary(),
            "families": [f.to_json(deterministic) for f in self.families],
        }


PERIOD_CHECKS = ("reflexive", "period_sequence", "recurrence", "mum_at_zero", "singular_points", "mirror_map")


def _timed(name: str, params: dict[str, Any], fn: Callable[[], tuple[str, dict[str, Any]]]) -> CheckResult:
    start = time.perf_counter()
    try:
        status, detail = fn()
    except Exception as exc:  # a crashing check is a failed check, never a crashed run
        status, detail = "fail", {"error": f"{type(exc).__name__}: {exc}"}
    return CheckResult(name, status, detail, params, time.perf_counter() - start)


def _skipped(name: str, reason: str) -> CheckResult:
    return CheckResult(name, "skipped", {"reason": reason}, {})


def _fmt_point(p) -> str:
    return p.exact if p.exact is not None else f"{p.approx.real:.12g}{p.approx.imag:+.12g}j"


class _FamilyPipeline:
    """Lazily shared intermediate results for one family."""

    def __init__(self, rec: FamilyRecord):
        self.rec = rec
        self._seq = None
        self._op = None

    def sequence(self):
        if self._seq is None:
            self._seq = period_sequence(self.rec.phi, RECURRENCE_TERMS + PREDICTED_TERMS - 1)
        return self._seq

    def operator(self):
        if self._op is None:
            self._op = find_recurrence(self.sequence().terms[:RECURRENCE_TERMS], *RECURRENCE_BOX)
        return self._op

    def reflexive(self):
        P = newton_polytope(self.rec.phi)
        ok = is_reflexive(P)
        return ("pass" if ok else "fail"), {"vertices": len(P.vertices), "reflexive": ok}

    def quick_sequence(self):
        fast = list(period_sequence(self.rec.phi, QUICK_TERMS - 1).terms)
        slow = period_sequence_naive(self.rec.phi, QUICK_TERMS - 1)
        return ("pass" if fast == slow else "fail"), {"terms": [str(a) for a in fast]}

    def recurrence(self):
        op = self.operator()
        if op is None:
            return "fail", {"found": False}
        residuals = apply_rec(op, self.sequence().terms)
        ok = all(r == 0 for r in residuals)
        return ("pass" if ok else "fail"), {
            "found": True,
            "order": op.order,
            "degree": op.degree,
            "predicted_terms": PREDICTED_TERMS,
            "operator": str(op).splitlines()[0],
        }

    def mum(self):
        op = self.operator()
        if op is None:
            return "fail", {"error": "no operator"}
        try:
            frobenius_solutions(op, 2)
        except NotMUM as exc:
            return "fail", {"error": str(exc)}
        return "pass", {"indicial": "theta^%d" % op.order}

    def singular(self):
        op = self.operator()
        if op is None:
            return "fail", {"error": "no operator"}
        loc = singular_points(op)
        detail: dict[str, Any] = {
            "finite_nonzero": [_fmt_point(p) for p in loc.points],
            "count": loc.count(),
            "infinity_exponents": list(loc.infinity_exponents),
        }
        ok = True
        expected = EXPECTED_SINGULAR_COUNTS.get(self.rec.id)
        if expected is not None:
            detail["expected_count"] = expected
            ok &= loc.count() == expected
        values = EXPECTED_SINGULAR_VALUES.get(self.rec.id)
        if values is not None:
            contained = [loc.contains(v, tol=mp.mpf("1e-20"), dps=50) for v in values(50)]
            detail["expected_values_contained"] = contained
            ok &= all(contained)
        if expected is None and values is None:
            detail["expectation"] = "none recorded; reported only"
        return ("pass" if ok else "fail"), detail

    def mirror(self):
        op = self.operator()
        if op is None:
            return "fail", {"error": "no operator"}
        basis = frobenius_solutions(op, MIRROR_ORDER)
        mm = mirror_map(basis.f, basis.h, MIRROR_ORDER)
        bad = [k for k, c in enumerate(mm.t_of_q) if Fraction(c).denominator != 1]
        return ("pass" if not bad else "fail"), {
            "t_of_q": [str(c) for c in mm.t_of_q[:8]],
            "non_integral_orders": bad,
        }


SMOKE_POINT = ("0.1234", "1.0731")
SMOKE_TARGET = "1e-8"


def _smoke_pole(G: GroupSpec) -> CMPoint:
    from .green import DegeneratePole, hat_poles

    for form in cm_points(G, 60):
        if -form.disc < 7 or stabilizer_order(form, G) != 1:
            continue
        try:
            hat_poles(G, form)
        except DegeneratePole:
            continue
        return form
    raise RuntimeError("no usable CM pole with |D| <= 60")


def green_smoke(G: GroupSpec, dps: int = 30) -> tuple[str, dict[str, Any]]:
    """Evaluate the anti-invariant combination at a point and at its Fricke image."""
    from .green import green_hat

    pole = _smoke_pole(G)
    with mp.workdps(dps):
        tau = PointH(mp.mpf(SMOKE_POINT[0]), mp.mpf(SMOKE_POINT[1]), dps)
        w = G.atkin_lehner[0]
        a = green_hat(G, pole, tau, mp.mpf(SMOKE_TARGET))
        b = green_hat(G, pole, moebius_apply(w, tau), mp.mpf(SMOKE_TARGET))
        gap = abs(a.value + b.value)
        bound = a.error_bound + b.error_bound
        ok = bool(mp.isfinite(a.value) and gap <= bound)
        detail = {
            "pole": str(pole),
            "value": mp.nstr(a.value, 15),
            "value_at_w_tau": mp.nstr(b.value, 15),
            "anti_invariance_gap": mp.nstr(gap, 3),
            "bound": mp.nstr(bound, 3),
        }
    return ("pass" if ok else "fail"), detail


def verify_family(rec: FamilyRecord, depth: str = "quick") -> FamilyReport:
    if depth not in ("quick", "full"):
        raise ValueError("depth must be 'quick' or 'full'")
    checks: list[CheckResult] = []
    names = ["reflexive", "period_sequence", "recurrence"]
    if depth == "full":
        names += ["mum_at_zero", "singular_points", "mirror_map"]
    if rec.phi is None:
        reason = f"polynomial unavailable ({rec.phi_text})"
        checks += [_skipped(n, reason) for n in names]
    else:
        pipe = _FamilyPipeline(rec)
        steps = {
            "reflexive": ({}, pipe.reflexive),
            "period_sequence": ({"terms": QUICK_TERMS}, pipe.quick_sequence),
            "recurrence": ({"terms": RECURRENCE_TERMS, "box": list(RECURRENCE_BOX),
                            "predicted": PREDICTED_TERMS}, pipe.recurrence),
            "mum_at_zero": ({}, pipe.mum),
            "singular_points": ({"tolerance": "1e-20"}, pipe.singular),
            "mirror_map": ({"order": MIRROR_ORDER}, pipe.mirror),
        }
        for n in names:
            params, fn = steps[n]
            checks.append(_timed(n, params, fn))
    if depth == "full":
        G = None if rec.group_label.startswith(LABEL_ONLY_PREFIX) else parse_group_label(rec.group_label)
        if G is None or not G.atkin_lehner:
            checks.append(_skipped("green_smoke", f"group presentation unavailable ({rec.group_label})"))
        else:
            params = {"point": list(SMOKE_POINT), "target_error": SMOKE_TARGET}
            checks.append(_timed("green_smoke", params, lambda: green_smoke(G)))
    return FamilyReport(rec.id, rec.status, rec.group_label, tuple(checks))


def _verify_one(args: tuple[FamilyRecord, str]) -> FamilyReport:
    return verify_family(*args)


def verify_all(records: Sequence[FamilyRecord], depth: str = "quick", jobs: int = 1) -> AggregateReport:
    """verify_family over all records, reported in table order."""
    work = [(r, depth) for r in records]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_verify_one, work))
    else:
        reports = [_verify_one(w) for w in work]
    return AggregateReport(depth, tuple(reports))
