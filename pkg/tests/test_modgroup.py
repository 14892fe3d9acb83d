from __future__ import annotations

import itertools
import math
import random

import mpmath as mp
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gz4.modgroup import (
    IDENTITY,
    CMPoint,
    GroupSpec,
    InvalidGroup,
    ModGroupError,
    NonUnitDeterminant,
    NotCoprime,
    NotElliptic,
    PointH,
    ProjectiveMatrix,
    cm_points,
    conjugate,
    enumerate_near,
    fixed_point,
    fricke,
    gamma0,
    gamma0_equivalent,
    hecke_cosets,
    is_involution,
    is_member,
    moebius_apply,
    normalizes,
    parse_group_label,
    point_pair_u,
    random_gamma0_word,
    random_member,
    reduce_gamma0,
    reduce_sl2,
    stabilizer_order,
)

import support


def P(x, y, dps=30):
    with mp.workdps(dps):
        return PointH(mp.mpf(x), mp.mpf(y), dps)


def close(p, q, tol=mp.mpf("1e-25")):
    return abs(p.x - q.x) <= tol and abs(p.y - q.y) <= tol


# ---------------------------------------------------------------------------
# ProjectiveMatrix


def test_projective_normal_form():
    m = ProjectiveMatrix(-2, -4, 0, -6)
    assert m.entries() == (1, 2, 0, 3)
    assert ProjectiveMatrix(0, -1, 2, 0).entries() == (0, 1, -2, 0)
    assert ProjectiveMatrix(1, 1, 0, 1) == ProjectiveMatrix(-1, -1, 0, -1)


def test_projective_rejects_nonpositive_determinant():
    with pytest.raises(ModGroupError):
        ProjectiveMatrix(0, 1, 1, 0)
    with pytest.raises(ModGroupError):
        ProjectiveMatrix(1, 2, 2, 4)


small = st.integers(-6, 6)


_GENS = (
    ProjectiveMatrix(1, 1, 0, 1),
    ProjectiveMatrix(1, -1, 0, 1),
    ProjectiveMatrix(0, -1, 1, 0),
)


def _word(gens):
    g = IDENTITY
    for h in gens:
        g = g @ h
    return g


def matrices(det_one=False):
    if det_one:
        return st.lists(st.sampled_from(_GENS), max_size=10).map(_word)
    return st.tuples(small, small, small, small).filter(
        lambda m: m[0] * m[3] - m[1] * m[2] > 0).map(lambda m: ProjectiveMatrix(*m))


@given(matrices(), st.integers(1, 5), st.sampled_from([1, -1]))
def test_scalar_multiples_are_equal(m, k, sign):
    a, b, c, d = m.entries()
    assert ProjectiveMatrix(sign * k * a, sign * k * b, sign * k * c, sign * k * d) == m


@given(matrices(), matrices())
def test_moebius_is_an_action(g, h):
    tau = P("0.3141", "1.2718")
    lhs = moebius_apply(g @ h, tau)
    rhs = moebius_apply(g, moebius_apply(h, tau))
    assert close(lhs, rhs, mp.mpf("1e-20") * (1 + abs(lhs.x) + lhs.y))


def test_moebius_examples():
    i = P(0, 1)
    assert close(moebius_apply(ProjectiveMatrix(1, 1, 0, 1), i), P(1, 1))
    assert close(moebius_apply(fricke(2), i), P(0, "0.5"))
    with mp.workdps(30):
        r = P(0, 1 / mp.sqrt(2))
    assert close(moebius_apply(fricke(2), r), r)


def test_moebius_composition_random_gamma0_words():
    rng = random.Random(7)
    tau = P("-0.21", "0.83")
    for N in (1, 2, 6):
        for _ in range(200):
            g, d = random_gamma0_word(rng, N, 5), random_gamma0_word(rng, N, 5)
            lhs = moebius_apply(g @ d, tau)
            rhs = moebius_apply(g, moebius_apply(d, tau))
            assert close(lhs, rhs, mp.mpf("1e-18") * (1 + abs(lhs.x) + lhs.y))


# ---------------------------------------------------------------------------
# membership, Fricke and conjugation


def test_is_member_examples():
    G6 = gamma0(6)
    assert is_member(ProjectiveMatrix(1, 0, 6, 1), G6)
    assert not is_member(ProjectiveMatrix(1, 0, 3, 1), G6)
    C = (1, -1, 2, -1)
    Gt = GroupSpec(8, C)
    g = conjugate(ProjectiveMatrix(1, 1, 0, 1), C)
    assert g.det == 1 and is_member(g, Gt)
    with pytest.raises(NonUnitDeterminant):
        is_member(ProjectiveMatrix(2, 0, 0, 1), G6)


def test_fricke_examples():
    w = fricke(2)
    assert w.entries() == (0, 1, -2, 0) and w.det == 2
    assert fricke(1).entries() == (0, 1, -1, 0)
    for N in range(1, 20):
        assert is_involution(fricke(N))


def test_beta3_from_conjugating_w3():
    # conjugate(g, C) = C g C^-1, so beta_3 = (1 0; -3 1)^-1 W_3 (1 0; -3 1) is conjugation by the inverse
    beta = conjugate(fricke(3), (1, 0, 3, 1))
    assert beta.entries() == (3, -1, 12, -3) and beta.det == 3
    other = conjugate(fricke(3), (1, 0, -3, 1))
    assert other.entries() == (3, 1, -12, -3)
    # both conventions give the same Atkin-Lehner coset of Gamma0(6)
    assert is_member(beta @ other.inverse(), gamma0(6))
    sq = beta @ beta
    assert sq.is_identity()
    # (3 -1; 12 -3)^2 = -3 Id, the oracle by direct multiplication
    a, b, c, d = 3, -1, 12, -3
    assert (a * a + b * c, a * b + b * d, c * a + d * c, c * b + d * d) == (-3, 0, 0, -3)


def test_conjugate_identity_and_non_integral():
    g = ProjectiveMatrix(2, 1, 7, 4)
    assert conjugate(g, (1, 0, 0, 1)) == g
    # rational conjugators always give a rational multiple of an integral matrix
    assert conjugate(ProjectiveMatrix(1, 1, 0, 1), (2, 0, 0, 1)) == ProjectiveMatrix(1, 2, 0, 1)
    assert conjugate(ProjectiveMatrix(1, 1, 0, 1), (1, 0, 0, 2)) == ProjectiveMatrix(2, 1, 0, 2)
    with pytest.raises(ModGroupError):
        conjugate(ProjectiveMatrix(1, 1, 0, 1), (1, 2, 2, 4))


@given(matrices(det_one=True))
def test_conjugation_round_trip(g):
    C = (1, -1, 2, -1)
    Cinv = (-1, 1, -2, 1)
    assert conjugate(conjugate(g, C), Cinv) == g


def test_fixed_points():
    for N in (2, 3, 5, 11):
        f = fixed_point(fricke(N))
        assert (f.A, f.B, f.C) == (N, 0, 1) and f.disc == -4 * N
    f = fixed_point(ProjectiveMatrix(3, -1, 12, -3))
    assert (f.A, f.B, f.C) == (12, -6, 1) and f.disc == -12
    with mp.workdps(30):
        tau = f.point(30)
        assert abs(tau.x - mp.mpf(1) / 4) < mp.mpf("1e-28")
        assert abs(tau.y - mp.sqrt(3) / 12) < mp.mpf("1e-28")
    with pytest.raises(NotElliptic):
        fixed_point(ProjectiveMatrix(1, 1, 0, 1))


def test_registry_groups_normalise_their_base_groups():
    for rec in support.records():
        G = rec.group()
        if G is None:
            continue
        assert len(G.atkin_lehner) in (1, 2)
        for w in G.atkin_lehner:
            assert is_involution(w)
            assert normalizes(w, G, samples=100, seed=3)


def test_group_labels():
    G = parse_group_label("G0(6)+[3,-1,12,-3]")
    assert G.level == 6 and G.atkin_lehner == (ProjectiveMatrix(3, -1, 12, -3),)
    Gt = parse_group_label("G0t(8)+4")
    assert Gt.is_conjugated and len(Gt.atkin_lehner) == 1
    assert parse_group_label("8A1+2") is None
    with pytest.raises(InvalidGroup):
        parse_group_label("G0(6)+[1,1,0,1]")  # not an involution


def test_invalid_group_level():
    with pytest.raises(InvalidGroup):
        GroupSpec(0)


def test_random_member_is_member():
    rng = random.Random(1)
    G = parse_group_label("G0t(8)+4")
    for _ in range(50):
        assert is_member(random_member(rng, G), G)


# ---------------------------------------------------------------------------
# enumeration


def brute_near(N, tau, sigma, U, bound=10):
    out = set()
    rng = range(-bound, bound + 1)
    for a, b, c, d in itertools.product(rng, rng, rng, rng):
        if a * d - b * c != 1 or c % N:
            continue
        g = ProjectiveMatrix(a, b, c, d)
        if point_pair_u(tau, moebius_apply(g, sigma)) <= U:
            out.add(g)
    return out


@pytest.mark.parametrize(
    "N,tau,sigma,U",
    [
        (1, ("0", "2"), ("0", "2"), "1.5"),
        (1, ("0.1", "1.3"), ("-0.2", "1.7"), "2.5"),
        (2, ("0.05", "1.1"), ("0.3", "1.9"), "3"),
        (3, ("0.4", "1"), ("0", "1.5"), "4"),
    ],
)
def test_enumerate_near_matches_brute_force(N, tau, sigma, U):
    t, s = P(*tau), P(*sigma)
    got = enumerate_near(gamma0(N), t, s, mp.mpf(U))
    assert len(got) == len(set(got))
    assert set(got) == brute_near(N, t, s, mp.mpf(U))


def test_enumerate_near_identity_only_for_small_cutoff():
    # at tau = sigma = 2i the translations by 1 already have u = 1 + 1/8
    t = P(0, 2)
    assert enumerate_near(gamma0(1), t, t, mp.mpf("1.1")) == [IDENTITY]
    assert len(enumerate_near(gamma0(1), t, t, mp.mpf("1.5"))) == 5


def test_enumerate_near_postconditions_and_monotonicity():
    G = parse_group_label("G0t(8)+4")
    t, s = P("0.37", "0.41"), P("-0.12", "0.55")
    prev = 0
    for U in ("1.5", "3", "6", "12"):
        got = enumerate_near(G, t, s, mp.mpf(U))
        assert len(got) >= prev
        prev = len(got)
        keys = [(abs(g.c), g.c, abs(g.d), g.d, g.a) for g in got]
        assert keys == sorted(keys)
        for g in got:
            assert is_member(g, G)
            assert point_pair_u(t, moebius_apply(g, s)) <= mp.mpf(U)
    with pytest.raises(ModGroupError):
        enumerate_near(G, t, s, 1)


# ---------------------------------------------------------------------------
# Hecke cosets


def sigma1(m):
    return sum(d for d in range(1, m + 1) if m % d == 0)


def test_hecke_examples():
    assert hecke_cosets(1, 5) == [IDENTITY]
    assert set(hecke_cosets(2, 1)) == {
        ProjectiveMatrix(1, 0, 0, 2), ProjectiveMatrix(1, 1, 0, 2), ProjectiveMatrix(2, 0, 0, 1)
    }
    assert len(hecke_cosets(3, 1)) == 4
    for m in (2, 3, 5, 6, 7, 10, 15):
        assert len(hecke_cosets(m, 1)) == sigma1(m)
    with pytest.raises(NotCoprime):
        hecke_cosets(2, 6)


@pytest.mark.parametrize(
    "m,N", [(m, N) for m in (2, 3, 5) for N in (1, 2, 3) if math.gcd(m, N) == 1]
)
def test_hecke_cosets_brute_force(m, N):
    reps = hecke_cosets(m, N)

    def same_coset(M, r):
        # M = gamma r with gamma in Gamma0(N): gamma = M adj(r) / m
        a, b, c, d = M
        ra, rb, rc, rd = r.entries()
        g = (a * rd - b * rc, -a * rb + b * ra, c * rd - d * rc, -c * rb + d * ra)
        return all(x % m == 0 for x in g) and (g[2] // m) % N == 0

    # pairwise inequivalent
    for r1, r2 in itertools.combinations(reps, 2):
        assert not same_coset(r1.entries(), r2)
    # every det-m matrix of Gamma0(N)-type (N | c) lies in exactly one coset
    rng = range(-12, 13)
    for M in itertools.product(rng, repeat=4):
        a, b, c, d = M
        if a * d - b * c != m or c % N:
            continue
        hits = [r for r in reps if same_coset(M, r)]
        assert len(hits) == 1


# ---------------------------------------------------------------------------
# CM points and reduction


def test_cm_points_examples():
    pts1 = cm_points(gamma0(1), 4)
    assert CMPoint(1, 0, 1) in pts1
    pts2 = cm_points(gamma0(2), 8)
    assert CMPoint(2, 0, 1) in pts2
    for N, Dmax in ((1, 40), (2, 40), (3, 30), (6, 30)):
        pts = cm_points(gamma0(N), Dmax)
        assert len(set(pts)) == len(pts)
        for f in pts:
            assert 0 < -f.disc <= Dmax and f.A % N == 0
        for f1, f2 in itertools.combinations(pts, 2):
            assert not gamma0_equivalent(f1, f2, gamma0(N))


def test_class_numbers_level_one():
    # h(D) for the first fundamental and non-fundamental discriminants
    h = {3: 1, 4: 1, 7: 1, 8: 1, 11: 1, 15: 2, 20: 2, 23: 3, 24: 2, 31: 3, 35: 2, 39: 4, 47: 5}
    pts = cm_points(gamma0(1), 47)
    for D, hD in h.items():
        assert sum(1 for f in pts if f.disc == -D) == hD


def test_cm_form_validation():
    with pytest.raises(ModGroupError):
        CMPoint(1, 0, -1)
    with pytest.raises(ModGroupError):
        CMPoint(2, 0, 2)
    with pytest.raises(ModGroupError):
        CMPoint(-1, 0, -1)


def test_gamma0_equivalence_and_stabilizers():
    G2 = gamma0(2)
    f = CMPoint(3, 2, 2)
    for g in (ProjectiveMatrix(1, 1, 0, 1), ProjectiveMatrix(1, 0, 2, 1), ProjectiveMatrix(3, 1, 2, 1)):
        assert gamma0_equivalent(f, f.transform(g), G2)
    assert not gamma0_equivalent(CMPoint(1, 0, 1), CMPoint(2, 0, 1), gamma0(2))
    assert stabilizer_order(CMPoint(1, 0, 1), gamma0(1)) == 2
    assert stabilizer_order(CMPoint(1, 1, 1), gamma0(1)) == 3
    assert stabilizer_order(CMPoint(3, 2, 2), gamma0(2)) == 1


@given(matrices(det_one=True))
def test_form_transform_matches_point_action(g):
    f = CMPoint(3, 2, 2)
    with mp.workdps(30):
        assert close(f.transform(g).point(30), moebius_apply(g, f.point(30)), mp.mpf("1e-22"))


def test_reduce_sl2_examples():
    out, g = reduce_sl2(P("0.5", "2"))
    assert close(out, P("-0.5", "2")) and g == ProjectiveMatrix(1, -1, 0, 1)
    tau = P("0.2", "1.5")
    out, g = reduce_sl2(tau)
    assert out == tau and g == IDENTITY


def oracle_reduce(z):
    """Step-by-step T/S reduction with plain complex numbers."""
    for _ in range(1000):
        z -= math.floor(z.real + 0.5)
        if abs(z) < 1:
            z = -1 / z
        else:
            return z
    raise AssertionError


@given(st.floats(-3, 3), st.floats(0.01, 3))
def test_reduce_sl2_lands_in_fundamental_domain(x, y):
    tau = P(repr(x), repr(y))
    out, g = reduce_sl2(tau)
    assert g.det == 1
    assert -0.5 - 1e-20 <= out.x < 0.5 and abs(out.tau) >= 1 - mp.mpf("1e-20")
    assert close(moebius_apply(g, tau), out, mp.mpf("1e-15"))
    ref = oracle_reduce(complex(x, y))
    assert abs(complex(out.tau) - ref) < 1e-6 or abs(abs(ref) - 1) < 1e-9 or abs(abs(ref.real) - 0.5) < 1e-9


def test_reduce_sl2_small_point():
    out, _ = reduce_sl2(P("0.1", "0.1"))
    assert out.y >= mp.sqrt(3) / 2 - mp.mpf("1e-25")


@given(st.floats(-2, 2), st.floats(0.02, 2), st.sampled_from([2, 3, 6, 11]))
def test_reduce_gamma0_raises_height(x, y, N):
    tau = P(repr(x), repr(y))
    out, g = reduce_gamma0(tau, N)
    assert g.det == 1 and g.c % N == 0
    mp.mp.dps = 30
    assert out.y >= tau.y - mp.mpf("1e-20")
    assert close(moebius_apply(g, tau), out, mp.mpf("1e-15"))
    # no bottom row (c, d) with N | c raises it further
    for c in range(N, 6 * N, N):
        for d in range(-8, 9):
            if math.gcd(c, d) == 1:
                assert (c * out.x + d) ** 2 + (c * out.y) ** 2 >= 1 - mp.mpf("1e-15")


@given(matrices(det_one=True), matrices(det_one=True))
def test_point_pair_invariance(g, h):
    tau, sigma = P("0.31", "0.77"), P("-0.4", "1.9")
    u0 = point_pair_u(tau, sigma)
    u1 = point_pair_u(moebius_apply(g @ h, tau), moebius_apply(g @ h, sigma))
    assert abs(u0 - u1) < mp.mpf("1e-18") * u0
