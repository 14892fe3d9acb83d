"""Recognition of real numbers as r*log(alpha) with alpha algebraic.

Everything rests on an exact integral LLL reduction (all Gram-Schmidt data
kept as integers), applied to the usual embedding of an integer relation
problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence, Union

import mpmath as mp
import sympy


class PrecisionTooLow(ValueError):
    """Not enough correct digits for a meaningful search."""


MIN_DIGITS = 20
GUARD_DIGITS = 10
DELTA = Fraction(99, 100)


# ---------------------------------------------------------------------------
# lattices


def _rank(rows: Sequence[Sequence[int]]) -> int:
    m = [[Fraction(v) for v in r] for r in rows]
    rank, cols = 0, len(m[0]) if m else 0
    for c in range(cols):
        pivot = next((i for i in range(rank, len(m)) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        for i in range(rank + 1, len(m)):
            f = m[i][c] / m[rank][c]
            if f:
                m[i] = [a - f * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


@dataclass(frozen=True)
class IntegerLattice:
    """The Z-span of linearly independent integer row vectors."""

    basis: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        basis = tuple(tuple(int(v) for v in row) for row in self.basis)
        if not basis:
            raise ValueError("empty basis")
        if len({len(r) for r in basis}) != 1:
            raise ValueError("rows of different dimension")
        if _rank(basis) != len(basis):
            raise ValueError("rows are linearly dependent")
        object.__setattr__(self, "basis", basis)

    @property
    def rank(self) -> int:
        return len(self.basis)


def _dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def _lll_rows(rows: list[list[int]], delta: Fraction = DELTA) -> list[list[int]]:
    """Integral LLL (Gram-Schmidt data as integers d_i and lambda_ij = d_j mu_ij)."""
    b = [list(r) for r in rows]
    n = len(b)
    if n <= 1:
        return b
    dn, dd = delta.numerator, delta.denominator
    # 1-indexed bookkeeping: d[0] = 1, d[i] = prod_{j<=i} |b*_j|^2
    d = [1] + [0] * n
    lam = [[0] * (n + 1) for _ in range(n + 1)]
    d[1] = _dot(b[0], b[0])
    k, kmax = 2, 1

    def redi(k: int, l: int) -> None:
        if 2 * abs(lam[k][l]) > d[l]:
            q = (2 * lam[k][l] + d[l]) // (2 * d[l])
            b[k - 1] = [x - q * y for x, y in zip(b[k - 1], b[l - 1])]
            lam[k][l] -= q * d[l]
            for i in range(1, l):
                lam[k][i] -= q * lam[l][i]

    def swapi(k: int) -> None:
        b[k - 1], b[k - 2] = b[k - 2], b[k - 1]
        for j in range(1, k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lm = lam[k][k - 1]
        B = (d[k - 2] * d[k] + lm * lm) // d[k - 1]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k] * lam[i][k - 1] - lm * t) // d[k - 1]
            lam[i][k - 1] = (B * t + lm * lam[i][k]) // d[k]
        d[k - 1] = B

    while k <= n:
        if k > kmax:
            kmax = k
            for j in range(1, k + 1):
                u = _dot(b[k - 1], b[j - 1])
                for i in range(1, j):
                    u = (d[i] * u - lam[k][i] * lam[j][i]) // d[i - 1]
                if j < k:
                    lam[k][j] = u
                else:
                    if u == 0:
                        raise ValueError("rows are linearly dependent")
                    d[k] = u
        while True:
            redi(k, k - 1)
            lhs = dd * d[k] * d[k - 2]
            rhs = dn * d[k - 1] ** 2 - dd * lam[k][k - 1] ** 2
            if lhs < rhs:
                swapi(k)
                k = max(2, k - 1)
                continue
            for l in range(k - 2, 0, -1):
                redi(k, l)
            k += 1
            break
    return b


def lll_reduce(lattice: IntegerLattice) -> IntegerLattice:
    """LLL-reduced basis of the same lattice, delta = 0.99."""
    return IntegerLattice(tuple(tuple(r) for r in _lll_rows([list(r) for r in lattice.basis])))


def gram_schmidt(rows: Sequence[Sequence[int]]) -> tuple[list[list[Fraction]], list[Fraction]]:
    """Exact (mu, |b*_i|^2); used to check the LLL conditions."""
    n = len(rows)
    star: list[list[Fraction]] = []
    norms: list[Fraction] = []
    mu = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        v = [Fraction(x) for x in rows[i]]
        for j in range(i):
            mu[i][j] = sum(Fraction(a) * s for a, s in zip(rows[i], star[j])) / norms[j]
            v = [a - mu[i][j] * s for a, s in zip(v, star[j])]
        star.append(v)
        norms.append(sum(a * a for a in v))
    return mu, norms


# ---------------------------------------------------------------------------
# integer relations

Numbers = Union[Sequence, Callable[[int], Sequence]]


def _values(xs: Numbers, dps: int) -> list[mp.mpf]:
    with mp.workdps(dps):
        vals = xs(dps) if callable(xs) else xs
        return [mp.mpf(v) for v in vals]


def _working_digits(prec: int | None) -> int:
    return int(prec) if prec is not None else mp.mp.dps


def integer_relation(xs: Numbers, max_height: int, prec: int | None = None) -> tuple[int, ...] | None:
    """Smallest-height v with |v|_inf <= max_height and |sum v_i x_i| < 10^(10-P).

    ``xs`` is a list of numbers correct to P = ``prec`` digits (default: the
    current mpmath precision), or a callable dps -> list that recomputes them;
    in the latter case the relation is re-verified with values recomputed at
    1.5 P digits, otherwise with the given values at 1.5 P working digits.
    """
    P = _working_digits(prec)
    if P < MIN_DIGITS:
        raise PrecisionTooLow(f"{P} digits < {MIN_DIGITS}")
    vals = _values(xs, P)
    n = len(vals)
    if n < 2:
        return None
    with mp.workdps(P + 10):
        scale = mp.mpf(10) ** (P - GUARD_DIGITS)
        ints = [int(mp.nint(v * scale)) for v in vals]
    rows = [[int(i == j) for j in range(n)] + [ints[i]] for i in range(n)]
    reduced = _lll_rows(rows)
    threshold = mp.mpf(10) ** (GUARD_DIGITS - P)
    candidates = []
    for row in reduced:
        v = row[:n]
        if not any(v) or max(abs(c) for c in v) > max_height:
            continue
        with mp.workdps(P + 10):
            if abs(mp.fsum(c * x for c, x in zip(v, vals))) >= threshold:
                continue
        candidates.append(tuple(v))
    candidates.sort(key=lambda v: (max(abs(c) for c in v), sum(c * c for c in v), v))
    for v in candidates:
        if _reverify(xs, v, P):
            return _normalise_sign(v)
    return None


def _normalise_sign(v: tuple[int, ...]) -> tuple[int, ...]:
    g = 0
    for c in v:
        g = math.gcd(g, c)
    v = tuple(c // g for c in v)
    first = next(c for c in v if c)
    return v if first > 0 else tuple(-c for c in v)


def _reverify(xs: Numbers, v: Sequence[int], P: int) -> bool:
    hi = (3 * P + 1) // 2
    if callable(xs):
        vals, threshold_digits = _values(xs, hi), hi
    else:
        vals, threshold_digits = _values(xs, P), P
    with mp.workdps(hi + 10):
        return abs(mp.fsum(c * x for c, x in zip(v, vals))) < mp.mpf(10) ** (GUARD_DIGITS - threshold_digits)


def algdep(x, max_degree: int, max_height: int, prec: int | None = None) -> tuple[int, ...] | None:
    """Integer polynomial (coefficients, leading first) vanishing at x; smallest degree first.

    The result is primitive with positive leading coefficient.
    """
    P = _working_digits(prec)
    if P < MIN_DIGITS:
        raise PrecisionTooLow(f"{P} digits < {MIN_DIGITS}")
    for deg in range(1, max_degree + 1):
        if callable(x):
            def powers(dps, deg=deg):
                with mp.workdps(dps):
                    t = mp.mpf(x(dps))
                    return [t**i for i in range(deg + 1)]
            xs: Numbers = powers
        else:
            with mp.workdps(P + 10):
                t = mp.mpf(x)
                xs = [t**i for i in range(deg + 1)]
        rel = integer_relation(xs, max_height, P)
        if rel is None or rel[-1] == 0:
            continue
        coeffs = tuple(reversed(rel))
        if coeffs[0] < 0:
            coeffs = tuple(-c for c in coeffs)
        return coeffs
    return None


def poly_eval(coeffs: Sequence[int], t):
    return mp.polyval(list(coeffs), t)


def poly_str(coeffs: Sequence[int], var: str = "t") -> str:
    return str(sympy.Poly(list(coeffs), sympy.Symbol(var)).as_expr())


def is_irreducible(coeffs: Sequence[int]) -> bool:
    return bool(sympy.Poly(list(coeffs), sympy.Symbol("t")).is_irreducible)


# ---------------------------------------------------------------------------
# log values


DEFAULT_SCALES = tuple(
    Fraction(s)
    for s in ("1", "1/2", "-1/2", "2", "-2", "1/3", "-1/3", "3", "-3", "1/4", "-1/4",
              "1/6", "-1/6", "12", "-12", "24", "-24", "-1")
)
CONFIDENCE_THRESHOLD = mp.mpf("1e-5")


@dataclass(frozen=True)
class LogRepresentation:
    """w ~ r * log(alpha) with alpha the real root of alpha_minpoly nearest alpha_approx."""

    scale: Fraction
    alpha_minpoly: tuple[int, ...]
    alpha_approx: mp.mpf
    residual: mp.mpf

    def describe(self) -> str:
        return f"({self.scale}) * log(root of {poly_str(self.alpha_minpoly)} near {mp.nstr(self.alpha_approx, 15)})"


@dataclass(frozen=True)
class RecognitionReport:
    status: str
    candidate: LogRepresentation | None
    search_parameters: dict = field(default_factory=dict)
    confidence: mp.mpf | None = None
    note: str = ""

    def __post_init__(self) -> None:
        if self.status not in ("recognized", "inconclusive"):
            raise ValueError(f"unknown status {self.status!r}")
        if self.status == "recognized" and not (self.confidence is not None
                                                and self.confidence < CONFIDENCE_THRESHOLD):
            raise ValueError("recognized requires confidence below the threshold")

    def to_json(self) -> dict:
        cand = None
        if self.candidate is not None:
            c = self.candidate
            cand = {
                "scale": str(c.scale),
                "alpha_minpoly": list(c.alpha_minpoly),
                "alpha_minpoly_str": poly_str(c.alpha_minpoly),
                "alpha_approx": mp.nstr(c.alpha_approx, 20),
                "residual": mp.nstr(c.residual, 5),
            }
        params = dict(self.search_parameters)
        if "scales" in params:
            params["scales"] = [str(s) for s in params["scales"]]
        return {
            "status": self.status,
            "candidate": cand,
            "search_parameters": params,
            "confidence": None if self.confidence is None else mp.nstr(self.confidence, 5),
            "note": self.note,
        }


def _noise_floor(coeffs: Sequence[int], alpha) -> mp.mpf:
    """Typical |p(alpha)| of the best height-H degree-d polynomial for a random alpha."""
    d = len(coeffs) - 1
    H = max(abs(c) for c in coeffs)
    size = mp.fsum(abs(alpha) ** i for i in range(d + 1))
    return size * mp.mpf(H) ** (-d)


def recognize_log_value(w, error, scales: Sequence = DEFAULT_SCALES, max_degree: int = 4,
                        max_height: int = 10**4) -> RecognitionReport:
    """Search w = r log(alpha), r in scales, alpha algebraic of bounded degree and height.

    Every scale is tried; among verified candidates the one with the smallest
    (degree, height) is reported, ties resolved by the order of ``scales``.
    ``error`` is an absolute bound for w; its size fixes the working precision.
    """
    w, error = mp.mpf(w), mp.mpf(error)
    if error <= 0:
        raise ValueError("error must be positive")
    if not abs(w) > 10 * error:
        raise PrecisionTooLow("|w| does not exceed 10 * error")
    digits = int(mp.floor(-mp.log10(error)))
    if digits < 25:
        raise PrecisionTooLow(f"w is known to {digits} digits, need at least 25")
    params = {
        "scales": [Fraction(s) for s in scales],
        "max_degree": max_degree,
        "max_height": max_height,
        "precision": digits,
    }
    best: tuple[mp.mpf, LogRepresentation] | None = None
    for r in params["scales"]:
        if r == 0:
            continue
        with mp.workdps(digits + 10):
            exponent = w * r.denominator / r.numerator
            if abs(exponent) > 10 * digits:
                continue
            alpha = mp.exp(exponent)
        poly = algdep(alpha, max_degree, max_height, digits)
        if poly is None or not is_irreducible(poly):
            continue
        rep = _verify_log(w, error, r, poly, alpha, digits)
        if rep is None:
            continue
        with mp.workdps(digits + 10):
            confidence = abs(poly_eval(poly, alpha)) / _noise_floor(poly, alpha)
        # simplest alpha wins; ties keep the order of the scales list
        key = (confidence >= CONFIDENCE_THRESHOLD, len(poly), max(abs(c) for c in poly))
        if best is None or key < best[0]:
            best = (key, confidence, rep)
    if best is None:
        return RecognitionReport("inconclusive", None, params, None, "no candidate in the search box")
    _, confidence, rep = best
    if confidence < CONFIDENCE_THRESHOLD:
        return RecognitionReport("recognized", rep, params, +confidence)
    return RecognitionReport("inconclusive", rep, params, +confidence, "candidate above the noise floor")


def _verify_log(w, error, r: Fraction, poly, alpha, digits: int) -> LogRepresentation | None:
    """Recompute r log(root) at 1.5x precision from the exact minimal polynomial."""
    hi = (3 * digits + 1) // 2
    with mp.workdps(hi + 10):
        roots = mp.polyroots(list(poly), maxsteps=200, extraprec=4 * hi)
        real = [mp.re(z) for z in roots if abs(mp.im(z)) < mp.mpf(10) ** (-hi // 2) and mp.re(z) > 0]
        if not real:
            return None
        root = min(real, key=lambda z: abs(z - alpha))
        value = mp.mpf(r.numerator) / r.denominator * mp.log(root)
        if abs(value - w) > 10 * error + mp.mpf(10) ** (-digits):
            return None
        residual = abs(mp.exp(w * r.denominator / r.numerator) - root)
        if residual >= mp.mpf(10) ** (-digits / 2):
            return None
        return LogRepresentation(r, tuple(poly), +root, +residual)
