"""Exact arithmetic for congruence subgroups acting on the upper half-plane.

Matrices are integral and primitive; the 1/sqrt(det) normalisation of
Atkin-Lehner matrices is left implicit because it does not change the
Moebius action.  Base groups are always conjugates C*Gamma0(N)*C^-1.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import combinations
from typing import Iterable, Sequence

import mpmath as mp


class ModGroupError(ValueError):
    """Base class for errors raised by this module."""


class NonUnitDeterminant(ModGroupError):
    pass


class NotProjectivelyIntegral(ModGroupError):
    pass


class NotElliptic(ModGroupError):
    pass


class NotCoprime(ModGroupError):
    pass


class InvalidGroup(ModGroupError):
    pass


# ---------------------------------------------------------------------------
# matrices and points


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


@dataclass(frozen=True)
class ProjectiveMatrix:
    """Integral 2x2 matrix of positive determinant, up to scalars.

    The constructor divides out the content and fixes the sign so that the
    first nonzero entry is positive, so ``==`` is projective equality.
    """

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self) -> None:
        entries = tuple(int(v) for v in (self.a, self.b, self.c, self.d))
        det = entries[0] * entries[3] - entries[1] * entries[2]
        if det <= 0:
            raise ModGroupError(f"determinant must be positive, got {det}")
        g = reduce(math.gcd, entries)
        first = next(v for v in entries if v != 0)
        if first < 0:
            g = -g
        for name, v in zip("abcd", entries):
            object.__setattr__(self, name, v // g)

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> int:
        return self.a + self.d

    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def __matmul__(self, other: ProjectiveMatrix) -> ProjectiveMatrix:
        return ProjectiveMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> ProjectiveMatrix:
        return ProjectiveMatrix(self.d, -self.b, -self.c, self.a)

    def is_identity(self) -> bool:
        return self.b == 0 and self.c == 0 and self.a == self.d

    def __str__(self) -> str:
        return f"({self.a} {self.b}; {self.c} {self.d})"


IDENTITY = ProjectiveMatrix(1, 0, 0, 1)


@dataclass(frozen=True)
class PointH:
    """A point of the upper half-plane with the precision it was made at."""

    x: mp.mpf
    y: mp.mpf
    dps: int = 30

    def __post_init__(self) -> None:
        with mp.workdps(self.dps):
            object.__setattr__(self, "x", mp.mpf(self.x))
            object.__setattr__(self, "y", mp.mpf(self.y))
        if not self.y > 0:
            raise ModGroupError("point must lie in the upper half-plane")

    @classmethod
    def from_complex(cls, z, dps: int = 30) -> PointH:
        with mp.workdps(dps):
            z = mp.mpc(z)
            return cls(z.real, z.imag, dps)

    @property
    def tau(self) -> mp.mpc:
        return mp.mpc(self.x, self.y)

    def with_dps(self, dps: int) -> PointH:
        return PointH(self.x, self.y, dps)


@dataclass(frozen=True)
class CMPoint:
    """Primitive positive definite form A*X^2 + B*X*Y + C*Y^2; its root in H."""

    A: int
    B: int
    C: int

    def __post_init__(self) -> None:
        if self.A <= 0:
            raise ModGroupError("CM form needs A > 0")
        if self.disc >= 0:
            raise ModGroupError("CM form needs negative discriminant")
        if math.gcd(math.gcd(self.A, self.B), self.C) != 1:
            raise ModGroupError("CM form must be primitive")

    @property
    def disc(self) -> int:
        return self.B * self.B - 4 * self.A * self.C

    def point(self, dps: int = 30) -> PointH:
        with mp.workdps(dps + 5):
            x = mp.mpf(-self.B) / (2 * self.A)
            y = mp.sqrt(-self.disc) / (2 * self.A)
        return PointH(x, y, dps)

    def transform(self, g: ProjectiveMatrix) -> CMPoint:
        """The form whose root is g applied to this form's root."""
        a, b, c, d = g.entries()
        A, B, C = self.A, self.B, self.C
        return _primitive_form(
            A * d * d - B * c * d + C * c * c,
            -2 * A * b * d + B * (a * d + b * c) - 2 * C * a * c,
            A * b * b - B * a * b + C * a * a,
        )

    def __str__(self) -> str:
        return f"({self.A},{self.B},{self.C})"


def _primitive_form(A: int, B: int, C: int) -> CMPoint:
    g = math.gcd(math.gcd(A, B), C)
    if A < 0:
        g = -g
    return CMPoint(A // g, B // g, C // g)


def moebius_apply(g: ProjectiveMatrix, tau: PointH) -> PointH:
    with mp.workdps(tau.dps + 10):
        z = mp.mpc(tau.x, tau.y)
        w = (g.a * z + g.b) / (g.c * z + g.d)
        # imaginary part from the exact formula avoids cancellation
        y = g.det * tau.y / abs(g.c * z + g.d) ** 2
        return PointH(w.real, y, tau.dps)


# ---------------------------------------------------------------------------
# rational conjugators

RationalMatrix = tuple[Fraction, Fraction, Fraction, Fraction]


def rational_matrix(entries: Iterable) -> RationalMatrix:
    m = tuple(Fraction(e) for e in entries)
    if len(m) != 4 or m[0] * m[3] - m[1] * m[2] == 0:
        raise ModGroupError("conjugator must be an invertible 2x2 matrix")
    return m  # type: ignore[return-value]


RATIONAL_IDENTITY: RationalMatrix = rational_matrix((1, 0, 0, 1))


def _rmul(x: Sequence, y: Sequence) -> RationalMatrix:
    return (
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    )


def _rinv(x: Sequence) -> RationalMatrix:
    det = x[0] * x[3] - x[1] * x[2]
    return (x[3] / det, -x[1] / det, -x[2] / det, x[0] / det)


def _projective_from_rational(m: Sequence) -> ProjectiveMatrix:
    m = [Fraction(v) for v in m]
    den = reduce(math.lcm, (v.denominator for v in m), 1)
    ints = [int(v * den) for v in m]
    if ints[0] * ints[3] - ints[1] * ints[2] < 0:
        raise NotProjectivelyIntegral("orientation-reversing matrix")
    return ProjectiveMatrix(*ints)


def conjugate(g: ProjectiveMatrix, C: Sequence) -> ProjectiveMatrix:
    """Primitive form of C*g*C^-1.

    The result is scaled to a primitive integral matrix.  It has the
    determinant of g up to a square, so it is never orientation reversing;
    a singular C raises ModGroupError.
    """
    C = rational_matrix(C)
    m = _rmul(_rmul(C, g.entries()), _rinv(C))
    return _projective_from_rational(m)


def moebius_rational(C: Sequence, tau: PointH) -> PointH:
    """Apply a rational matrix of positive determinant to a point."""
    C = rational_matrix(C)
    if C[0] * C[3] - C[1] * C[2] <= 0:
        raise ModGroupError("conjugator must have positive determinant")
    return moebius_apply(_projective_from_rational(C), tau)


def transform_form_rational(form: CMPoint, C: Sequence) -> CMPoint:
    return form.transform(_projective_from_rational(rational_matrix(C)))


# ---------------------------------------------------------------------------
# groups


@dataclass(frozen=True)
class GroupSpec:
    """C*Gamma0(N)*C^-1 together with its Fricke-type involutions."""

    level: int
    conjugator: RationalMatrix = RATIONAL_IDENTITY
    atkin_lehner: tuple[ProjectiveMatrix, ...] = ()
    label: str = ""

    def __post_init__(self) -> None:
        if self.level < 1:
            raise InvalidGroup("level must be positive")
        object.__setattr__(self, "conjugator", rational_matrix(self.conjugator))
        object.__setattr__(self, "atkin_lehner", tuple(self.atkin_lehner))
        if not self.label:
            object.__setattr__(self, "label", f"G0({self.level})")

    @property
    def is_conjugated(self) -> bool:
        return self.conjugator != RATIONAL_IDENTITY

    def to_inner(self, tau: PointH) -> PointH:
        """Coordinates in which the base group is Gamma0(N) itself."""
        if not self.is_conjugated:
            return tau
        return moebius_rational(_rinv(self.conjugator), tau)

    def form_to_inner(self, form: CMPoint) -> CMPoint:
        if not self.is_conjugated:
            return form
        return transform_form_rational(form, _rinv(self.conjugator))

    def from_inner(self, g: ProjectiveMatrix) -> ProjectiveMatrix:
        if not self.is_conjugated:
            return g
        return conjugate(g, self.conjugator)

    def to_inner_matrix(self, g: ProjectiveMatrix) -> ProjectiveMatrix:
        if not self.is_conjugated:
            return g
        return conjugate(g, _rinv(self.conjugator))

    def fricke_group(self) -> list[tuple[ProjectiveMatrix, int]]:
        """Elements of the Atkin-Lehner group with their character values."""
        out = []
        gens = self.atkin_lehner
        for size in range(len(gens) + 1):
            for subset in combinations(gens, size):
                g = reduce(lambda x, y: x @ y, subset, IDENTITY)
                out.append((g, (-1) ** size))
        return out


def gamma0(N: int) -> GroupSpec:
    return GroupSpec(N, label=f"G0({N})")


def is_member(g: ProjectiveMatrix, G: GroupSpec) -> bool:
    if g.det != 1:
        raise NonUnitDeterminant(f"det = {g.det}")
    C = G.conjugator
    h = _rmul(_rmul(_rinv(C), g.entries()), C)
    if any(v.denominator != 1 for v in h):
        return False
    return int(h[2]) % G.level == 0


def fricke(N: int) -> ProjectiveMatrix:
    if N < 1:
        raise ModGroupError("N must be positive")
    return ProjectiveMatrix(0, 1, -N, 0)


def atkin_lehner(Q: int, N: int) -> ProjectiveMatrix:
    """A trace-zero representative (Q*al, be; N*ga, -Q*al) of W_Q, Q || N.

    Trace zero makes the matrix a genuine projective involution; such a
    representative exists iff Q*al^2 = -1 has a solution modulo N/Q.
    """
    if N % Q or math.gcd(Q, N // Q) != 1:
        raise InvalidGroup(f"{Q} is not an exact divisor of {N}")
    if Q == N:
        return fricke(N)
    R = N // Q
    for al in range(R):
        t = -1 - Q * al * al
        if t % R == 0:
            # be*ga = t/R with be = -1
            return ProjectiveMatrix(Q * al, -1, -N * (t // R), -Q * al)
    raise InvalidGroup(f"W_{Q} of level {N} has no involutive representative")


def is_involution(w: ProjectiveMatrix) -> bool:
    return (w @ w).is_identity()


def fixed_point(g: ProjectiveMatrix) -> CMPoint:
    if g.trace**2 >= 4 * g.det:
        raise NotElliptic(f"{g} is not elliptic")
    # c*tau^2 + (d - a)*tau - b = 0, with c != 0 for elliptic g
    A, B, C = g.c, g.d - g.a, -g.b
    return _primitive_form(A, B, C)


def random_gamma0_word(rng: random.Random, N: int, length: int = 8) -> ProjectiveMatrix:
    gens = [
        ProjectiveMatrix(1, 1, 0, 1),
        ProjectiveMatrix(1, -1, 0, 1),
        ProjectiveMatrix(1, 0, N, 1),
        ProjectiveMatrix(1, 0, -N, 1),
    ]
    g = IDENTITY
    for _ in range(length):
        g = g @ rng.choice(gens)
    return g


def random_member(rng: random.Random, G: GroupSpec, length: int = 8) -> ProjectiveMatrix:
    return G.from_inner(random_gamma0_word(rng, G.level, length))


def normalizes(w: ProjectiveMatrix, G: GroupSpec, samples: int = 100, seed: int = 0) -> bool:
    """Probabilistic check that w*G*w^-1 = G (sampled words plus generators)."""
    rng = random.Random(seed)
    winv = w.inverse()
    tests = [G.from_inner(ProjectiveMatrix(1, 1, 0, 1)), G.from_inner(ProjectiveMatrix(1, 0, G.level, 1))]
    tests += [random_member(rng, G) for _ in range(samples)]
    for g in tests:
        h = w @ g @ winv
        if h.det != 1 or not is_member(h, G):
            return False
    return True


def validate_group(G: GroupSpec, samples: int = 100) -> None:
    if len(G.atkin_lehner) not in (1, 2):
        raise InvalidGroup("expected one or two Fricke-type generators")
    for w in G.atkin_lehner:
        if not is_involution(w):
            raise InvalidGroup(f"{w} is not an involution")
        if not normalizes(w, G, samples):
            raise InvalidGroup(f"{w} does not normalise {G.label}")


_LABEL_RE = re.compile(
    r"^(?:conj\[(?P<conj>[^\]]+)\]:)?G0(?P<tilde>t?)\((?P<N>\d+)\)(?P<rest>(?:\+(?:\d+|\[[^\]]+\]))*)$"
)
_TERM_RE = re.compile(r"\+(\d+|\[[^\]]+\])")


def parse_group_label(label: str, validate: bool = True) -> GroupSpec | None:
    """Parse the group label grammar; None for labels without a presentation."""
    text = label.replace(" ", "")
    m = _LABEL_RE.match(text)
    if m is None:
        return None
    N = int(m["N"])
    conj: Sequence = RATIONAL_IDENTITY
    if m["conj"]:
        conj = rational_matrix(Fraction(v) for v in m["conj"].split(","))
    if m["tilde"]:
        if m["conj"]:
            raise InvalidGroup("G0t already carries a conjugator")
        conj = rational_matrix((1, -1, 2, -1))
    G = GroupSpec(N, conj, (), label)
    gens = []
    for term in _TERM_RE.findall(m["rest"]):
        if term.startswith("["):
            vals = [int(v) for v in term[1:-1].split(",")]
            gens.append(ProjectiveMatrix(*vals))
            continue
        Q = int(term)
        if N % Q == 0 and math.gcd(Q, N // Q) == 1:
            gens.append(G.from_inner(atkin_lehner(Q, N)))
        else:
            gens.append(fricke(Q))
    G = GroupSpec(N, conj, tuple(gens), label)
    if validate and gens:
        validate_group(G)
    return G


# ---------------------------------------------------------------------------
# reduction and enumeration


def reduce_sl2(tau: PointH) -> tuple[PointH, ProjectiveMatrix]:
    """Move tau into |x| <= 1/2 (x in [-1/2, 1/2)), |tau| >= 1."""
    g = IDENTITY
    with mp.workdps(tau.dps + 10):
        z = mp.mpc(tau.x, tau.y)
        for _ in range(10000):
            k = int(mp.floor(z.real + mp.mpf(1) / 2))
            if k:
                z -= k
                g = ProjectiveMatrix(1, -k, 0, 1) @ g
            if abs(z) < 1:
                z = -1 / z
                g = ProjectiveMatrix(0, -1, 1, 0) @ g
            else:
                break
    return moebius_apply(g, tau), g


def _translation_to_strip(x) -> int:
    return int(mp.floor(x + mp.mpf(1) / 2))


def reduce_gamma0(tau: PointH, N: int) -> tuple[PointH, ProjectiveMatrix]:
    """Raise tau by Gamma0(N) elements until no element increases its height.

    The result has x in [-1/2, 1/2) and |c*tau + d| >= 1 for all bottom rows
    (c, d) with N | c, i.e. it lies in the Ford domain.
    """
    g = IDENTITY
    cur = tau
    with mp.workdps(tau.dps + 10):
        for _ in range(1000):
            k = _translation_to_strip(cur.x)
            if k:
                t = ProjectiveMatrix(1, -k, 0, 1)
                g, cur = t @ g, moebius_apply(t, cur)
            best = None
            cmax = int(1 / (N * cur.y)) + 1
            for c in range(N, N * cmax + 1, N):
                if c * cur.y >= 1:
                    break
                centre = -c * cur.x
                for d in range(int(mp.floor(centre - 1)), int(mp.ceil(centre + 1)) + 1):
                    if math.gcd(c, d) != 1:
                        continue
                    size = (c * cur.x + d) ** 2 + (c * cur.y) ** 2
                    if size < 1 - mp.mpf(10) ** (-tau.dps) and (best is None or size < best[0]):
                        best = (size, c, d)
            if best is None:
                return cur, g
            _, c, d = best
            _, a, b = _egcd(d, -c)  # a*d - b*c = 1
            step = ProjectiveMatrix(a, b, c, d)
            g, cur = step @ g, moebius_apply(step, cur)
    raise ModGroupError("reduction did not terminate")


def point_pair_u(tau: PointH, sigma: PointH) -> mp.mpf:
    with mp.workdps(max(tau.dps, sigma.dps) + 5):
        return 1 + ((tau.x - sigma.x) ** 2 + (tau.y - sigma.y) ** 2) / (2 * tau.y * sigma.y)


def _enumerate_inner(N: int, tau: PointH, sigma: PointH, U) -> list[ProjectiveMatrix]:
    """gamma in Gamma0(N) with u(tau, gamma*sigma) <= U, up to sign."""
    out = []
    with mp.workdps(max(tau.dps, sigma.dps) + 10):
        U = mp.mpf(U)
        y, ys = tau.y, sigma.y
        disc = mp.sqrt(U * U - 1)
        v_lo = y * (U - disc)
        v_hi = y * (U + disc)
        # v = ys/|c sigma + d|^2 >= v_lo bounds both c and d
        radius2 = ys / v_lo
        cmax = int(mp.floor(mp.sqrt(radius2) / ys)) + 1
        for c in range(0, cmax + 1, N):
            rem = radius2 - (c * ys) ** 2
            if rem < 0:
                continue
            centre = -c * sigma.x
            r = mp.sqrt(rem)
            if c == 0:
                ds = [1]
            else:
                ds = range(int(mp.floor(centre - r)), int(mp.ceil(centre + r)) + 1)
            for d in ds:
                if math.gcd(c, d) != 1:
                    continue
                _, a, b = _egcd(d, -c)
                base = ProjectiveMatrix(a, b, c, d) if c else IDENTITY
                img = moebius_apply(base, sigma)
                v = img.y
                if v < v_lo * (1 - mp.mpf(10) ** (-20)) or v > v_hi * (1 + mp.mpf(10) ** (-20)):
                    continue
                # |x_tau - x_img - k|^2 <= 2 y v (U - 1) - (y - v)^2
                w2 = 2 * y * v * (U - 1) - (y - v) ** 2
                if w2 < 0:
                    continue
                w = mp.sqrt(w2)
                delta = tau.x - img.x
                for k in range(int(mp.floor(delta - w)), int(mp.ceil(delta + w)) + 1):
                    g = ProjectiveMatrix(1, k, 0, 1) @ base
                    cand = moebius_apply(g, sigma)
                    if point_pair_u(tau, cand) <= U:
                        out.append(g)
    return out


def _sort_key(g: ProjectiveMatrix) -> tuple:
    return (abs(g.c), g.c, abs(g.d), g.d, g.a)


def enumerate_near(G: GroupSpec, tau: PointH, sigma: PointH, U) -> list[ProjectiveMatrix]:
    if not U > 1:
        raise ModGroupError("U must exceed 1")
    inner = _enumerate_inner(G.level, G.to_inner(tau), G.to_inner(sigma), U)
    found = {G.from_inner(g) for g in inner}
    return sorted(found, key=_sort_key)


def hecke_cosets(m: int, N: int) -> list[ProjectiveMatrix]:
    if m < 1 or N < 1:
        raise ModGroupError("m and N must be positive")
    if math.gcd(m, N) != 1:
        raise NotCoprime(f"gcd({m}, {N}) != 1")
    reps = []
    for a in range(1, m + 1):
        if m % a:
            continue
        d = m // a
        for b in range(d):
            if math.gcd(math.gcd(a, b), d) == 1:
                reps.append(ProjectiveMatrix(a, b, 0, d))
    return reps


# ---------------------------------------------------------------------------
# CM points


def _form_value(form: CMPoint, X: int, Y: int) -> int:
    return form.A * X * X + form.B * X * Y + form.C * Y * Y


def _translate_form(form: CMPoint) -> CMPoint:
    """Normalise B into (-A, A] by tau -> tau + k."""
    A, B = form.A, form.B
    k = -((A - B) // (2 * A))  # ceil((B - A) / 2A)
    return form.transform(ProjectiveMatrix(1, k, 0, 1)) if k else form


def _bottom_rows_at_most(form: CMPoint, N: int, bound: int, strict: bool) -> list[tuple[int, int]]:
    """(c, d) coprime, N | c, c >= 0, with f(d, -c) < bound (or <= bound)."""
    A, B, C = form.A, form.B, form.C
    D = -form.disc
    rows = []
    cmax = math.isqrt(4 * A * bound // D + 1) + 1
    for c in range(0, cmax + 1, N):
        # f(d,-c) = A d^2 - B c d + C c^2
        if c == 0:
            cands = [1]
        else:
            centre = B * c / (2 * A)
            span = math.sqrt(max(0.0, (bound - D * c * c / (4 * A)) / A)) + 1
            cands = range(math.floor(centre - span), math.ceil(centre + span) + 1)
        for d in cands:
            if math.gcd(c, d) != 1:
                continue
            val = A * d * d - B * c * d + C * c * c
            if val < bound or (not strict and val == bound):
                rows.append((c, d))
    return rows


def _apply_bottom_row(form: CMPoint, c: int, d: int) -> CMPoint:
    if c == 0:
        return form
    _, a, b = _egcd(d, -c)
    return form.transform(ProjectiveMatrix(a, b, c, d))


def reduce_form_gamma0(form: CMPoint, N: int) -> CMPoint:
    """A form of minimal A in the Gamma0(N)-orbit, B in (-A, A]."""
    cur = _translate_form(form)
    for _ in range(10000):
        rows = [r for r in _bottom_rows_at_most(cur, N, cur.A, strict=True) if r[0] != 0]
        if not rows:
            return cur
        c, d = min(rows, key=lambda r: _form_value(cur, r[1], -r[0]))
        cur = _translate_form(_apply_bottom_row(cur, c, d))
    raise ModGroupError("form reduction did not terminate")


def canonical_forms(form: CMPoint, N: int) -> frozenset[CMPoint]:
    """All minimal-A representatives of the Gamma0(N)-orbit, normalised."""
    red = reduce_form_gamma0(form, N)
    reps = set()
    for c, d in _bottom_rows_at_most(red, N, red.A, strict=False):
        reps.add(_translate_form(_apply_bottom_row(red, c, d)))
    return frozenset(reps)


def gamma0_equivalent(f1: CMPoint, f2: CMPoint, G: GroupSpec) -> bool:
    """Exact test whether two CM points lie in one orbit of G's base group."""
    if f1.disc != f2.disc:
        return False
    g1, g2 = G.form_to_inner(f1), G.form_to_inner(f2)
    return bool(canonical_forms(g1, G.level) & canonical_forms(g2, G.level))


def stabilizer_order(form: CMPoint, G: GroupSpec) -> int:
    """Order of the stabiliser of the CM point in the projective base group."""
    inner = G.form_to_inner(form)
    red = reduce_form_gamma0(inner, G.level)
    count = 0
    for c, d in _bottom_rows_at_most(red, G.level, red.A, strict=False):
        if _translate_form(_apply_bottom_row(red, c, d)) == red:
            count += 1
    return max(count, 1)


def cm_points(G: GroupSpec, Dmax: int) -> list[CMPoint]:
    """Gamma0(N)-classes of primitive forms with N | A and 0 < -D <= Dmax."""
    N = G.level
    seen: dict[CMPoint, CMPoint] = {}
    out = []
    for D in range(3, Dmax + 1):
        if (-D) % 4 not in (0, 1):
            continue
        Amax = N * N * (math.isqrt(D) + 1)
        for A in range(N, Amax + 1, N):
            for B in range(-A + 1, A + 1):
                if (B * B + D) % (4 * A):
                    continue
                C = (B * B + D) // (4 * A)
                if math.gcd(math.gcd(A, B), C) != 1:
                    continue
                red = reduce_form_gamma0(CMPoint(A, B, C), N)
                if red in seen:
                    continue
                canon = canonical_forms(red, N)
                rep = min(canon, key=lambda f: (f.A, abs(f.B), -f.B))
                for f in canon:
                    seen[f] = rep
                out.append(rep)
    if G.is_conjugated:
        out = [transform_form_rational(f, G.conjugator) for f in out]
    return sorted(out, key=lambda f: (-f.disc, f.A, f.B))
