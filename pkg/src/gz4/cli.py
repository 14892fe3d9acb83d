"""Command-line interface: gz4 {periods, pf, green, gzverify, registry}.

Exit codes: 0 success (including inconclusive recognition), 1 verification or
evaluation failure, 2 usage or input error, 3 requested precision not reached.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from tokenize import TokenError
from typing import Any, Sequence

import mpmath as mp
import sympy

from . import __version__

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_PRECISION = 3


class UsageError(Exception):
    pass


class CommandFailed(Exception):
    def __init__(self, message: str, code: int = EXIT_FAIL, results: dict | None = None):
        super().__init__(message)
        self.code = code
        self.results = results


@dataclass(frozen=True)
class RunConfig:
    precision: int = 40
    target_error: str | None = None
    cutoff: int | None = None
    output: str = "text"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.precision < 20:
            raise UsageError("precision must be at least 20 digits")
        if self.output not in ("text", "json"):
            raise UsageError("output must be text or json")


# ---------------------------------------------------------------------------
# parsing helpers


def _ints(text: str, count: int, what: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"{what} must be {count} comma-separated integers") from None
    if len(vals) != count:
        raise UsageError(f"{what} must be {count} comma-separated integers")
    return vals


def _form(text: str, what: str):
    from .modgroup import CMPoint, ModGroupError

    try:
        return CMPoint(*_ints(text, 3, what))
    except ModGroupError as exc:
        raise UsageError(f"{what}: {exc}") from None


def _point(text: str, dps: int):
    from .modgroup import ModGroupError, PointH

    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError("--point must be x,y")
    try:
        with mp.workdps(dps):
            return PointH(mp.mpf(parts[0]), mp.mpf(parts[1]), dps)
    except (ValueError, ModGroupError) as exc:
        raise UsageError(f"--point: {exc}") from None


def _group(label: str):
    from .modgroup import ModGroupError, parse_group_label

    try:
        G = parse_group_label(label)
    except ModGroupError as exc:
        raise UsageError(f"--group: {exc}") from None
    if G is None:
        raise CommandFailed(f"group presentation unavailable ({label})")
    return G


def _load_records(path: str | None):
    from .registry import RegistryError, load_registry

    try:
        return load_registry(path)
    except RegistryError as exc:
        raise UsageError(f"registry: {exc}") from None


def _phi_from_args(args) -> tuple[str, Any]:
    from .periods import LaurentParseError, parse_laurent
    from .registry import UnknownFamily, find_family

    if args.phi is not None:
        try:
            return "inline", parse_laurent(args.phi)
        except LaurentParseError as exc:
            raise UsageError(f"--phi: {exc}") from None
    if args.family is None:
        raise UsageError("give --family or --phi")
    records = _load_records(args.registry)
    try:
        rec = find_family(records, args.family)
    except UnknownFamily:
        raise UsageError(f"unknown family id {args.family!r}") from None
    if rec.phi is None:
        raise CommandFailed(f"polynomial unavailable ({rec.phi_text})")
    return rec.id, rec.phi


def _nstr(x, digits: int = 20) -> str:
    return mp.nstr(x, digits, strip_zeros=False)


# ---------------------------------------------------------------------------
# commands; each returns (results dict, text lines, exit code)


def cmd_periods(args, config: RunConfig):
    from .periods import period_sequence

    if args.terms < 0:
        raise UsageError("--terms must be nonnegative")
    family, phi = _phi_from_args(args)
    seq = period_sequence(phi, args.terms)
    results = {"family": family, "phi": str(phi), "terms": [str(a) for a in seq.terms]}
    lines = [f"family: {family}", f"phi: {phi}"] + [f"a_{n} = {a}" for n, a in enumerate(seq.terms)]
    return results, lines, EXIT_OK


def _complex_str(z, digits: int) -> str:
    if mp.im(z) == 0:
        return _nstr(mp.re(z), digits)
    sign = "+" if mp.im(z) > 0 else "-"
    return f"{_nstr(mp.re(z), digits)}{sign}{_nstr(abs(mp.im(z)), digits)}j"


def _singular_json(loc) -> list[dict[str, Any]]:
    t = sympy.Symbol("t")
    out = []
    for p in loc.points:
        with mp.workdps(30):
            z = p.numeric(30)
            if abs(p.approx.imag) < 1e-25:
                z = mp.re(z)
            value = _complex_str(z, 25)
        out.append({
            "factor": str(sympy.Poly(list(reversed(p.minpoly)), t).as_expr()),
            "multiplicity": p.multiplicity,
            "exact": p.exact,
            "value": value,
        })
    return out


def cmd_pf(args, config: RunConfig):
    from .periods import apply_rec, find_recurrence, period_sequence, singular_points

    family, phi = _phi_from_args(args)
    need = (args.max_order + 1) * (args.max_degree + 1) + 10
    terms = max(args.terms, need)
    seq = period_sequence(phi, terms + args.predict - 1)
    op = find_recurrence(seq.terms[:terms], args.max_order, args.max_degree)
    if op is None:
        raise CommandFailed(
            f"no operator with order <= {args.max_order} and degree <= {args.max_degree} from {terms} terms",
            results={"family": family, "found": False, "terms_used": terms,
                     "box": [args.max_order, args.max_degree]},
        )
    residuals = apply_rec(op, seq.terms)
    predicted = all(r == 0 for r in residuals)
    loc = singular_points(op)
    from .periods.operators import ode_str, rec_str

    results = {
        "family": family,
        "found": True,
        "terms_used": terms,
        "box": [args.max_order, args.max_degree],
        "order": op.order,
        "degree": op.degree,
        "ode": ode_str(op),
        "recurrence": rec_str(op),
        "predicted_terms": args.predict,
        "predictions_exact": predicted,
        "singular_points": _singular_json(loc),
        "zero_multiplicity": loc.zero_multiplicity,
        "infinity_exponents": list(loc.infinity_exponents),
    }
    lines = [
        f"family: {family}",
        f"operator (order {op.order}, degree {op.degree}, from {terms} terms):",
        f"  L = {results['ode']}",
        f"  0 = {results['recurrence']}",
        f"predicts next {args.predict} terms exactly: {predicted}",
        "finite nonzero singular points:",
    ]
    for p in results["singular_points"]:
        closed = f" = {p['exact']}" if p["exact"] else ""
        lines.append(f"  root of {p['factor']}{closed} ~ {p['value']} (multiplicity {p['multiplicity']})")
    lines.append(f"exponents at infinity: {', '.join(results['infinity_exponents'])}")
    return results, lines, (EXIT_OK if predicted else EXIT_FAIL)


def _eval_json(res) -> dict[str, Any]:
    return {
        "value": _nstr(res.value, 25),
        "error_bound": _nstr(res.error_bound, 5),
        "cutoff": int(res.cutoff),
        "term_count": res.term_count,
        "method": res.method,
        "converged": res.converged,
    }


def _evaluate(G, pole, tau, hat: bool, target, cutoff):
    from .green import DegeneratePole, GreenSpec, PoleHit, green_basic, green_hat

    try:
        if hat:
            return green_hat(G, pole, tau, target, cutoff)
        return green_basic(GreenSpec(G, pole), tau, target, cutoff)
    except (PoleHit, DegeneratePole) as exc:
        raise CommandFailed(f"{type(exc).__name__}: {exc}") from None


def cmd_green(args, config: RunConfig):
    G = _group(args.group)
    pole = _form(args.pole_form, "--pole-form")
    dps = config.precision
    target = mp.mpf(config.target_error)
    with mp.workdps(dps):
        tau = _point(args.point, dps)
        res = _evaluate(G, pole, tau, args.hat, target, config.cutoff)
    results = {
        "group": args.group,
        "pole_form": str(pole),
        "point": [_nstr(tau.x, 20), _nstr(tau.y, 20)],
        "hat": args.hat,
        **_eval_json(res),
    }
    lines = [f"{k}: {v}" for k, v in results.items()]
    code = EXIT_OK if res.error_bound <= target else EXIT_PRECISION
    return results, lines, code


def _inject_value(expr: str, dps: int):
    """Evaluate a constant expression such as 3ln2 or -1/2*log(5) to dps digits."""
    from sympy.parsing.sympy_parser import implicit_multiplication_application, parse_expr, standard_transformations

    try:
        text = re.sub(r"(?<![A-Za-z])(?:ln|log)\s*(\d+(?:/\d+)?)", r"log(\1)", expr).replace("ln(", "log(")
        value = parse_expr(text,
                           transformations=standard_transformations + (implicit_multiplication_application,))
    except (sympy.SympifyError, SyntaxError, TypeError, TokenError) as exc:
        raise UsageError(f"--inject: cannot parse {expr!r}: {exc}") from None
    if not isinstance(value, sympy.Expr) or value.free_symbols or not value.is_real:
        raise UsageError(f"--inject: {expr!r} is not a real constant")
    with mp.workdps(dps + 10):
        return mp.mpf(str(sympy.N(value, dps + 10)))


def _scales(text: str | None):
    from .recognize import DEFAULT_SCALES

    if text is None:
        return DEFAULT_SCALES
    try:
        return tuple(Fraction(s) for s in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise UsageError("--scales must be comma-separated rationals") from None


def cmd_gzverify(args, config: RunConfig):
    from .recognize import PrecisionTooLow, recognize_log_value

    dps = config.precision
    scales = _scales(args.scales)
    search = {"scales": [str(s) for s in scales], "max_degree": args.max_degree, "max_height": args.max_height}
    results: dict[str, Any] = {"search": search}
    if args.inject is not None:
        w = _inject_value(args.inject, dps)
        error = mp.mpf(10) ** (-dps)
        results.update({"mode": "inject", "inject": args.inject, "value": _nstr(w, dps),
                        "error": _nstr(error, 3), "stable": True})
    else:
        if args.group is None or args.pole_form is None or args.at_form is None:
            raise UsageError("gzverify needs --group, --pole-form and --at-form (or --inject)")
        G = _group(args.group)
        pole = _form(args.pole_form, "--pole-form")
        at = _form(args.at_form, "--at-form")
        target = mp.mpf(config.target_error)
        cut1 = config.cutoff
        cut2 = 2 * cut1
        with mp.workdps(dps):
            tau = at.point(dps)
            r1 = _evaluate(G, pole, tau, True, target, cut1)
            r2 = _evaluate(G, pole, tau, True, target, cut2)
            diff = abs(r1.value - r2.value)
            scale = max(abs(r2.value), mp.mpf(10) ** (-dps))
            digits = float(dps) if diff == 0 else float(-mp.log10(diff / scale))
            w = r2.value
            error = max(diff, mp.mpf(10) ** (-dps))
        stable = digits >= args.stable_digits
        results.update({
            "mode": "evaluate",
            "group": args.group,
            "pole_form": str(pole),
            "at_form": str(at),
            "discriminants": [pole.disc, at.disc],
            "cutoffs": [cut1, cut2],
            "evaluations": [_eval_json(r1), _eval_json(r2)],
            "value": _nstr(w, 25),
            "two_cutoff_difference": _nstr(diff, 3),
            "stable_digits": round(digits, 2),
            "required_stable_digits": args.stable_digits,
            "stable": stable,
            "error": _nstr(error, 3),
        })
    with mp.workdps(dps + 10):
        try:
            report = recognize_log_value(w, error, scales, args.max_degree, args.max_height)
            rec = report.to_json()
        except PrecisionTooLow as exc:
            rec = {"status": "inconclusive", "candidate": None, "search_parameters": search,
                   "confidence": None, "note": f"precision too low for recognition: {exc}"}
    results["recognition"] = rec
    lines = [f"{k}: {v}" for k, v in results.items() if k not in ("recognition", "evaluations", "search")]
    for i, ev in enumerate(results.get("evaluations", [])):
        lines.append(f"evaluation {i + 1}: " + ", ".join(f"{k}={v}" for k, v in ev.items()))
    lines.append("search: " + ", ".join(f"{k}={v}" for k, v in search.items()))
    lines.append(f"recognition: {rec['status']}")
    if rec["candidate"] is not None:
        c = rec["candidate"]
        lines.append(f"  w = ({c['scale']}) * log(alpha), alpha root of {c['alpha_minpoly_str']} ~ {c['alpha_approx']}")
    if rec["confidence"] is not None:
        lines.append(f"  confidence: {rec['confidence']}")
    if rec["note"]:
        lines.append(f"  note: {rec['note']}")
    return results, lines, (EXIT_OK if results["stable"] else EXIT_FAIL)


def cmd_registry(args, config: RunConfig):
    from .registry import UnknownFamily, find_family, verify_all

    records = _load_records(args.registry)
    if args.all == (args.family is not None):
        raise UsageError("give exactly one of --all or --family")
    if args.family is not None:
        try:
            records = (find_family(records, args.family),)
        except UnknownFamily:
            raise UsageError(f"unknown family id {args.family!r}") from None
    report = verify_all(records, args.depth, jobs=args.jobs)
    results = report.to_json(deterministic=args.deterministic)
    if args.report:
        Path(args.report).write_text(json.dumps(results, indent=2) + "\n", encoding="utf-8")
    lines = []
    for fam in report.families:
        marks = " ".join(f"{c.name}={c.status}" for c in fam.checks)
        lines.append(f"{fam.id:6s} [{fam.status}] group {fam.group}: {'ok' if fam.ok else 'FAILED'}  {marks}")
        for c in fam.checks:
            if c.status == "skipped":
                lines.append(f"    {c.name}: skipped ({c.detail['reason']})")
            elif c.status == "fail":
                lines.append(f"    {c.name}: FAIL {json.dumps(c.detail)}")
    s = report.summary()
    lines.append(
        f"{s['families']} families: {s['fully_checked']} fully checked, {s['partially_checked']} partially; "
        f"failed: {', '.join(s['failed']) or 'none'}"
    )
    return results, lines, (EXIT_OK if report.ok else EXIT_FAIL)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--deterministic", action="store_true", help="omit timing fields")
    common.add_argument("--registry", default=None, help="registry file (default: $GZ4_REGISTRY or bundled)")
    common.add_argument("--seed", type=int, default=0, help="seed recorded in the report")

    parser = argparse.ArgumentParser(prog="gz4", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gz4 {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("periods", parents=[common], help="constant-term period sequence")
    p.add_argument("--family")
    p.add_argument("--phi", help="inline Laurent polynomial")
    p.add_argument("--terms", type=int, default=10, help="last index n (prints a_0..a_n)")
    p.set_defaults(func=cmd_periods)

    p = sub.add_parser("pf", parents=[common], help="Picard-Fuchs operator and singular points")
    p.add_argument("--family")
    p.add_argument("--phi")
    p.add_argument("--max-order", type=int, default=4)
    p.add_argument("--max-degree", type=int, default=5)
    p.add_argument("--terms", type=int, default=40)
    p.add_argument("--predict", type=int, default=10, help="extra terms checked against the operator")
    p.set_defaults(func=cmd_pf)

    p = sub.add_parser("green", parents=[common], help="evaluate a higher Green's function")
    p.add_argument("--group", required=True)
    p.add_argument("--pole-form", required=True, help="A,B,C")
    p.add_argument("--point", required=True, help="x,y")
    p.add_argument("--hat", action="store_true", help="the Fricke anti-invariant combination")
    p.add_argument("--prec", type=int, default=40)
    p.add_argument("--target-error", default="1e-8")
    p.add_argument("--cutoff", type=int, default=None, help="explicit Kloosterman modulus cutoff")
    p.set_defaults(func=cmd_green)

    p = sub.add_parser("gzverify", parents=[common], help="evaluate at a CM point and try r*log(alpha)")
    p.add_argument("--group")
    p.add_argument("--pole-form")
    p.add_argument("--at-form")
    p.add_argument("--prec", type=int, default=40)
    p.add_argument("--target-error", default="1e-13")
    p.add_argument("--cutoff", type=int, default=2000, help="first cutoff; the second is twice it")
    p.add_argument("--stable-digits", type=int, default=12)
    p.add_argument("--scales", default=None)
    p.add_argument("--max-degree", type=int, default=4)
    p.add_argument("--max-height", type=int, default=10**4)
    p.add_argument("--inject", default=None, help="test hook: recognise this expression instead of evaluating")
    p.set_defaults(func=cmd_gzverify)

    p = sub.add_parser("registry", parents=[common], help="table of families")
    rsub = p.add_subparsers(dest="action", required=True)
    v = rsub.add_parser("verify", parents=[common], help="run the checks")
    v.add_argument("--all", action="store_true")
    v.add_argument("--family")
    v.add_argument("--depth", choices=("quick", "full"), default="quick")
    v.add_argument("--report", default=None, help="also write the json report here")
    v.add_argument("--jobs", type=int, default=1)
    v.set_defaults(func=cmd_registry)
    return parser


def _config(args) -> RunConfig:
    return RunConfig(
        precision=getattr(args, "prec", 40),
        target_error=getattr(args, "target_error", None),
        cutoff=getattr(args, "cutoff", None),
        output="json" if args.json else "text",
        seed=args.seed,
    )


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    start = time.perf_counter()
    code = EXIT_OK
    message = None
    try:
        config = _config(args)
        results, lines, code = args.func(args, config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CommandFailed as exc:
        config = _config(args)
        results, lines, code, message = exc.results or {}, [], exc.code, str(exc)
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command if args.command != "registry" else f"registry {args.action}",
        "config": asdict(config),
        "results": results,
        "exit_code": code,
    }
    if message is not None:
        payload["error"] = message
    if not args.deterministic:
        payload["elapsed_seconds"] = round(time.perf_counter() - start, 3)
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in lines:
            print(line)
        if message is not None:
            print(f"error: {message}", file=sys.stderr)
    return code


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
