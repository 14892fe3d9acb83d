"""Acceptance criteria 1-9, each at its stated tolerance.

Test names start with ``test_cN_`` so the terminal summary (see conftest.py)
can print one pass/fail line per criterion.  A criterion whose literal
statement cannot hold is kept as a strict xfail next to the check of what
does hold; the summary line then reports it as failing.
"""

from __future__ import annotations

import json
import random
import time
from fractions import Fraction

import mpmath as mp
import pytest

from gz4.cli import main
from gz4.green import GreenSpec, green_basic, green_hat, hecke_translate, laplacian_residual, pole_coefficient
from gz4.modgroup import (
    CMPoint,
    PointH,
    enumerate_near,
    gamma0_equivalent,
    hecke_cosets,
    moebius_apply,
    parse_group_label,
    point_pair_u,
)
from gz4.periods import (
    BasechangeMap,
    find_recurrence,
    frobenius_solutions,
    is_reflexive,
    mirror_map,
    newton_polytope,
    parse_laurent,
    period_sequence,
    period_sequence_naive,
    pullback_check,
    rebase_to_infinity,
    singular_points,
)
from gz4.recognize import algdep, integer_relation

import support
from test_recognize import check_round_trip, random_log_value

DPS = 30
TARGET = mp.mpf("1e-8")


def P(x, y):
    with mp.workdps(DPS):
        return PointH(mp.mpf(x), mp.mpf(y), DPS)


@pytest.fixture(autouse=True)
def _precision():
    mp.mp.dps = DPS


# ---------------------------------------------------------------------------
# 1. period sequences


def test_c1_period_sequences_match_dense_oracle():
    start = time.perf_counter()
    ids = support.explicit_ids()
    assert len(ids) == 20
    for fid in ids:
        phi = support.record(fid).phi
        assert list(period_sequence(phi, 8).terms) == period_sequence_naive(phi, 8), fid
    assert support.terms("2,1", 8)[1:3] == (24, 2520)
    assert support.terms("3-27", 8)[2] == 6
    assert time.perf_counter() - start < 60


# ---------------------------------------------------------------------------
# 2. Picard-Fuchs recovery


def test_c2_operators_predict_ten_terms():
    start = time.perf_counter()
    assert support.operator("2,1").order == 3
    for fid in support.explicit_ids():
        op = support.operator(fid)
        assert op is not None, fid
        # the recurrence is run forward from 40 terms and compared with 10 more constant terms
        known = [Fraction(a) for a in support.terms(fid, 39)]
        rec = op.rec
        r = len(rec) - 1
        while len(known) < 50:
            n = len(known) - r
            lead = sum(c * n**k for k, c in enumerate(rec[-1]))
            if lead == 0:
                pytest.fail(f"{fid}: leading recurrence coefficient vanishes at n={n}")
            s = sum(sum(c * n**k for k, c in enumerate(p)) * known[n + j] for j, p in enumerate(rec[:-1]) if p)
            known.append(-s / lead)
        assert known[40:] == [Fraction(a) for a in support.terms(fid, 49)[40:]], fid
    assert time.perf_counter() - start < 600


# ---------------------------------------------------------------------------
# 3. discriminant data


def finite_singular_count(fid):
    return singular_points(support.operator(fid)).count()


@pytest.mark.parametrize("N,expected", [(2, 1), (3, 1), (4, 1), (5, 2), (6, 2), (7, 2), (8, 2), (9, 2)])
def test_c3_singular_counts(N, expected):
    assert finite_singular_count(f"{N},1") == expected


@pytest.mark.xfail(strict=True, reason="the recovered (11,1) operator has three finite nonzero singular points")
def test_c3_singular_count_eleven_literal():
    assert finite_singular_count("11,1") == 4


def test_c3_singular_values():
    with mp.workdps(50):
        six = singular_points(support.operator("6,1"))
        for root in (17 - 12 * mp.sqrt(2), 17 + 12 * mp.sqrt(2)):
            assert six.contains(root, tol=mp.mpf("1e-20"), dps=50)
        fermi = singular_points(support.operator("3-27"))
        for v in (Fraction(1, 6), Fraction(-1, 6), Fraction(1, 2), Fraction(-1, 2)):
            assert fermi.contains(mp.mpf(v.numerator) / v.denominator, tol=mp.mpf("1e-20"), dps=50)


# ---------------------------------------------------------------------------
# 4. basechange


def fermi_even_operator():
    fermi = support.terms("3-27", 80)
    return find_recurrence(fermi[::2][:40], 4, 5), fermi


VERRILL_MAP = BasechangeMap((0, 36), (1, 16, 64))  # 36 t / (8 t + 1)^2


def test_c4_fermi_even_part_by_square():
    opE, fermi = fermi_even_operator()
    rep = pullback_check(opE, BasechangeMap((0, 0, 1), (1,)), fermi, 25)
    assert rep.passed and not any(rep.remainder)
    assert rep.prefactor_str() == "(1)"


def test_c4_verrill_via_rebased_even_part():
    # the even part of the Fermi period, moved so that s = 1/36 sits at infinity
    _, fermi = fermi_even_operator()
    rebased = rebase_to_infinity(fermi[::2], 36, 40)
    op = find_recurrence(rebased, 4, 5)
    rep = pullback_check(op, VERRILL_MAP, support.terms("4-1", 25), 25)
    assert rep.passed and not any(rep.remainder)
    num, den = rep.prefactor
    assert len(num) <= 3 and len(den) <= 3
    assert rep.prefactor_str() == "(1 + 8*t)"


@pytest.mark.xfail(strict=True, reason="36t/(8t+1)^2 does not pull the even-part operator back to 4-1 directly")
def test_c4_verrill_literal():
    opE, _ = fermi_even_operator()
    rep = pullback_check(opE, VERRILL_MAP, support.terms("4-1", 25), 25)
    assert rep.passed


# ---------------------------------------------------------------------------
# 5. reflexivity


def test_c5_reflexivity():
    for fid in support.explicit_ids():
        assert is_reflexive(newton_polytope(support.record(fid).phi)), fid
    for text in ("(1+x+y+z)^6/(x*y*z)", "(1+x+y)^6/(x*y^2*z)+z"):
        assert not is_reflexive(newton_polytope(parse_laurent(text)))


# ---------------------------------------------------------------------------
# 6. mirror-map integrality


@pytest.mark.parametrize("fid", ["2,1", "3,1", "4,1", "3-27", "4-1"])
def test_c6_mirror_map_integral(fid):
    basis = frobenius_solutions(support.operator(fid), 20)
    assert mirror_map(basis.f, basis.h, 20).is_integral(20)


# ---------------------------------------------------------------------------
# 7. Green's function axioms on three groups at precision 30, target 1e-8

AXIOM_GROUPS = {
    "G0(2)+2": CMPoint(3, 2, 2),
    "G0(3)+3": CMPoint(3, 2, 2),
    "G0(6)+3": CMPoint(6, -4, 1),
}
# (group, Hecke index coprime to the level, pole b, point sigma); the multiplicity is computed exactly
HECKE_CASES = [
    ("G0(3)+3", 2, CMPoint(3, 2, 2), CMPoint(3, 4, 8)),
    ("G0(3)+3", 2, CMPoint(3, 3, 2), CMPoint(6, 3, 1)),
    ("G0(2)+2", 3, CMPoint(2, 2, 3), CMPoint(6, 2, 1)),
    ("G0(6)+3", 5, CMPoint(6, -4, 1), CMPoint(6, 4, 9)),
]


def random_points(seed, count):
    rng = random.Random(seed)
    return [P(repr(rng.uniform(-0.5, 0.5)), repr(rng.uniform(0.45, 1.6))) for _ in range(count)]


@pytest.mark.parametrize("label", list(AXIOM_GROUPS))
def test_c7_two_cutoff_consistency(label):
    G, pole = parse_group_label(label), AXIOM_GROUPS[label]
    spec = GreenSpec(G, pole)
    for tau in random_points(17, 10):
        r1 = green_basic(spec, tau, TARGET, cutoff=250)
        r2 = green_basic(spec, tau, TARGET, cutoff=1000)
        assert abs(r1.value - r2.value) <= r1.error_bound + r2.error_bound


def pole_distance(G, pole, tau):
    """Hyperbolic distance from tau to the nearest point of the pole's orbit."""
    sigma = pole.point(DPS)
    return min(mp.acosh(point_pair_u(tau, moebius_apply(g, sigma))) for g in enumerate_near(G, tau, sigma, 50))


@pytest.mark.parametrize("label", list(AXIOM_GROUPS))
def test_c7_laplace_eigenvalue(label):
    G, pole = parse_group_label(label), AXIOM_GROUPS[label]
    spec = GreenSpec(G, pole)
    f = lambda p: green_basic(spec, p, mp.mpf("1e-12"))  # noqa: E731
    rng = random.Random(23)
    for _ in range(5):
        tau = P(repr(rng.uniform(-0.5, 0.5)), repr(rng.uniform(0.75, 1.6)))
        # the stencil error is O((h/r)^2) with r the smaller of y and the distance to the pole
        h = tau.y * min(1, pole_distance(G, pole, tau)) / 200
        assert laplacian_residual(f, tau, h) < mp.mpf("1e-3")


@pytest.mark.parametrize("label", list(AXIOM_GROUPS))
def test_c7_hat_anti_invariance(label):
    G, pole = parse_group_label(label), AXIOM_GROUPS[label]
    w = G.atkin_lehner[0]
    for tau in random_points(29, 5):
        a = green_hat(G, pole, tau, TARGET)
        b = green_hat(G, pole, moebius_apply(w, tau), TARGET)
        assert abs(a.value + b.value) <= a.error_bound + b.error_bound


@pytest.mark.parametrize("label", list(AXIOM_GROUPS))
def test_c7_cusp_one_over_y_law(label):
    # the cuspidal constant term of a weight-4 Green's function is b / y; y G is constant high up
    G, pole = parse_group_label(label), AXIOM_GROUPS[label]
    spec = GreenSpec(G, pole)
    a = green_basic(spec, P("0.1", 50), TARGET)
    b = green_basic(spec, P("0.37", 100), TARGET)
    assert abs(50 * a.value - 100 * b.value) <= 50 * a.error_bound + 100 * b.error_bound
    assert abs(a.value) < mp.mpf("0.1")


@pytest.mark.xfail(strict=True, reason="G decays like 1/y at the cusp, so |G(x + 50i)| is far above 10 error bounds")
@pytest.mark.parametrize("label", list(AXIOM_GROUPS))
def test_c7_cusp_decay_literal(label):
    G, pole = parse_group_label(label), AXIOM_GROUPS[label]
    res = green_basic(GreenSpec(G, pole), P("0.1", 50), TARGET)
    assert abs(res.value) < 10 * res.error_bound


def hecke_multiplicity(G, m, pole, sigma):
    """Number of right cosets r with r(sigma) in the orbit of the pole (exact on forms)."""
    return sum(gamma0_equivalent(sigma.transform(r), pole, G) for r in hecke_cosets(m, G.level))


@pytest.mark.parametrize("label,m,pole,sigma", HECKE_CASES, ids=[f"{c[0]}-T{c[1]}-{c[3]}" for c in HECKE_CASES])
def test_c7_hecke_pole_ratio(label, m, pole, sigma):
    G = parse_group_label(label)
    mult = hecke_multiplicity(G, m, pole, sigma)
    assert mult >= 1
    spec = GreenSpec(G, pole)
    target = mp.mpf("1e-10")
    c_b = pole_coefficient(lambda p: green_basic(spec, p, target), pole.point(DPS))
    c_s = pole_coefficient(lambda p: hecke_translate(G, m, spec, p, target), sigma.point(DPS))
    ratio = c_s.coefficient / c_b.coefficient
    assert abs(ratio - mult) < mp.mpf("0.01") * mult


def test_c7_multiplicity_two_occurs():
    assert hecke_multiplicity(parse_group_label("G0(3)+3"), 2, CMPoint(3, 3, 2), CMPoint(6, 3, 1)) == 2


# ---------------------------------------------------------------------------
# 8. recognition


def test_c8_round_trips():
    rng = random.Random(8)
    failures = [s for s in (random_log_value(rng) for _ in range(100)) if not check_round_trip(*s)]
    assert failures == []


def test_c8_no_false_positives():
    from gz4.recognize import recognize_log_value

    rng = random.Random(88)
    positives = 0
    for _ in range(100):
        with mp.workdps(50):
            w = mp.mpf("0.1") + mp.mpf("9.9") * mp.mpf(rng.getrandbits(180)) / 2**180
            if recognize_log_value(w, mp.mpf("1e-40")).status != "inconclusive":
                positives += 1
    assert positives == 0


def test_c8_seeded_identities():
    with mp.workdps(50):
        assert integer_relation([mp.log(6), mp.log(2), mp.log(3)], 100) == (1, -1, -1)
        assert algdep(mp.cbrt(2), 3, 1000) == (1, 0, 0, -2)


# ---------------------------------------------------------------------------
# 9. end to end


@pytest.mark.parametrize("at_form", ["1,0,1", "1,0,2"])
def test_c9_gzverify(capsys, at_form):
    argv = ["gzverify", "--group", "G0(2)+2", "--pole-form", "3,2,2", "--at-form", at_form,
            "--prec", "30", "--json", "--deterministic"]
    code = main(argv)
    data = json.loads(capsys.readouterr().out)
    res = data["results"]
    assert CMPoint(3, 2, 2).disc == -20
    assert code == 0 and res["stable"]
    assert float(res["stable_digits"]) >= 12
    rec = res["recognition"]
    assert set(rec) == {"status", "candidate", "search_parameters", "confidence", "note"}
    assert rec["status"] in ("recognized", "inconclusive")
