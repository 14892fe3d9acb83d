"""Frobenius solutions at a MUM point, mirror maps and basechange checks."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .operators import HolonomicOperator, _pderiv, _peval
from .sequence import PeriodSequence

Series = tuple[Fraction, ...]


class NotMUM(ValueError):
    pass


# ---------------------------------------------------------------------------
# truncated power series with Fraction coefficients


def series_mul(a: Sequence, b: Sequence, n: int) -> list:
    out = [Fraction(0)] * n
    for i, x in enumerate(a[:n]):
        if x:
            for j, y in enumerate(b[: n - i]):
                out[i + j] += x * y
    return out


def series_inv(a: Sequence, n: int) -> list:
    if a[0] == 0:
        raise ZeroDivisionError("series with zero constant term")
    out = [Fraction(0)] * n
    out[0] = 1 / Fraction(a[0])
    for k in range(1, n):
        acc = sum((a[j] * out[k - j] for j in range(1, min(k, len(a) - 1) + 1)), Fraction(0))
        out[k] = -acc * out[0]
    return out


def series_exp(s: Sequence, n: int) -> list:
    """exp of a series without constant term, via k e_k = sum j s_j e_{k-j}."""
    if s and s[0] != 0:
        raise ValueError("exp needs a series with zero constant term")
    out = [Fraction(0)] * n
    out[0] = Fraction(1)
    for k in range(1, n):
        acc = sum((j * s[j] * out[k - j] for j in range(1, min(k, len(s) - 1) + 1)), Fraction(0))
        out[k] = acc / k
    return out


def series_compose(f: Sequence, g: Sequence, n: int) -> list:
    """f(g(t)) with g(0) = 0."""
    if g[0] != 0:
        raise ValueError("inner series must vanish at 0")
    out = [Fraction(0)] * n
    power = [Fraction(1)] + [Fraction(0)] * (n - 1)
    for k in range(min(n, len(f))):
        if f[k]:
            for i in range(n):
                out[i] += f[k] * power[i]
        power = series_mul(power, g, n)
    return out


def series_revert(q: Sequence, n: int) -> list:
    """Compositional inverse of q = t + O(t^2), by Lagrange inversion."""
    if q[0] != 0 or q[1] != 1:
        raise ValueError("reversion needs q = t + O(t^2)")
    e = [Fraction(c) for c in q[1:n + 1]]  # q / t
    inv_e = series_inv(e, n)
    out = [Fraction(0)] * n
    power = [Fraction(1)] + [Fraction(0)] * (n - 1)  # (t/q)^k
    for k in range(1, n):
        power = series_mul(power, inv_e, n)
        # [q^k] t = (1/k) [t^(k-1)] (t/q)^k
        out[k] = power[k - 1] / k
    return out


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrobeniusBasis:
    """f = sum f_n t^n with f_0 = 1, and g = f log t + h with h_0 = 0."""

    f: Series
    h: Series

    def __len__(self) -> int:
        return len(self.f)


def frobenius_solutions(op: HolonomicOperator, n_max: int) -> FrobeniusBasis:
    """Holomorphic and single-log solutions at t = 0 through t^n_max.

    The coefficients come from the recurrence in a formal exponent rho
    evaluated with dual numbers: f_n(rho) = f_n + rho h_n + O(rho^2).
    The log solution exists when the order is at least two.
    """
    parts = op.theta_parts()
    P0 = parts[0]
    if not P0 or any(P0[:-1]):
        raise NotMUM("indicial polynomial at 0 has a nonzero root")
    dparts = [_pderiv(P) for P in parts]
    n_terms = n_max + 1
    f = [Fraction(1)] + [Fraction(0)] * n_max
    h = [Fraction(0)] * n_terms
    for n in range(1, n_terms):
        val, dval = Fraction(0), Fraction(0)
        for i in range(1, min(n, len(parts) - 1) + 1):
            P, dP = parts[i], dparts[i]
            if not P:
                continue
            m = n - i
            pv, dpv = _peval(P, m), _peval(dP, m)
            val += pv * f[m]
            dval += dpv * f[m] + pv * h[m]
        p0, dp0 = _peval(P0, n), _peval(dparts[0], n)
        f[n] = -val / p0
        h[n] = (-dval - dp0 * f[n]) / p0
    return FrobeniusBasis(tuple(f), tuple(h))


@dataclass(frozen=True)
class MirrorMap:
    q_of_t: Series
    t_of_q: Series

    def is_integral(self, order: int | None = None) -> bool:
        coeffs = self.t_of_q if order is None else self.t_of_q[: order + 1]
        return all(c.denominator == 1 for c in coeffs)


def mirror_map(f: Sequence, h: Sequence, n_max: int) -> MirrorMap:
    """q = t exp(h/f) and its inverse t(q), both through order n_max."""
    n = n_max + 1
    ratio = series_mul(h, series_inv(f, n), n)
    e = series_exp(ratio, n)
    q = [Fraction(0)] + e[: n - 1]
    return MirrorMap(tuple(q), tuple(series_revert(q, n)))


def rebase_to_infinity(coeffs: Sequence, lam, n: int) -> list:
    """The period F(s) = sum c_k s^k seen in the coordinate s' = lam s / (lam s - 1).

    The change fixes the MUM point s = 0 and sends s = 1/lam to infinity.
    The result is (1 - s')^(-1/2) F(s(s')) = (1 - lam s)^(1/2) F(s), the
    weight-one twist that keeps the holomorphic solution normalized at 0.
    """
    lam = Fraction(lam)
    # s(s') = -(s'/lam) / (1 - s')
    inner = [Fraction(0)] + [-1 / lam] * (n - 1)
    base = series_compose([Fraction(c) for c in coeffs[:n]], inner, n)
    # (1 - s')^(-1/2) = sum binom(2k, k) (s'/4)^k
    twist = [Fraction(math.comb(2 * k, k), 4**k) for k in range(n)]
    return series_mul(twist, base, n)


# ---------------------------------------------------------------------------
# basechange


def _poly_series(p: Sequence[Fraction], n: int) -> list:
    return [Fraction(p[k]) if k < len(p) else Fraction(0) for k in range(n)]


@dataclass(frozen=True)
class BasechangeMap:
    """m(t) = numerator(t) / denominator(t), ascending rational coefficients, m(0) = 0."""

    numerator: tuple[Fraction, ...]
    denominator: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        num = tuple(Fraction(c) for c in self.numerator)
        den = tuple(Fraction(c) for c in self.denominator)
        if not any(den):
            raise ValueError("zero denominator")
        if den[0] == 0:
            raise ValueError("denominator must not vanish at 0")
        if not num or num[0] != 0:
            raise ValueError("a basechange map must fix the MUM point t = 0")
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)

    @classmethod
    def identity(cls) -> BasechangeMap:
        return cls((Fraction(0), Fraction(1)), (Fraction(1),))

    def series(self, n: int) -> list:
        return series_mul(_poly_series(self.numerator, n), series_inv(_poly_series(self.denominator, n), n), n)

    def __call__(self, t):
        return _peval(self.numerator, t) / _peval(self.denominator, t)


@dataclass(frozen=True)
class PullbackReport:
    passed: bool
    prefactor: tuple[tuple[Fraction, ...], tuple[Fraction, ...]] | None
    remainder: tuple[Fraction, ...]
    order: int

    def prefactor_str(self) -> str:
        if self.prefactor is None:
            return "none"
        num, den = self.prefactor

        def fmt(p):
            terms = [f"{c}" + ("" if k == 0 else "*t" if k == 1 else f"*t^{k}") for k, c in enumerate(p) if c]
            return "(" + " + ".join(terms) + ")" if terms else "0"

        return fmt(num) if den == (Fraction(1),) else f"{fmt(num)}/{fmt(den)}"


PADE_DEGREES = ((0, 0), (1, 0), (0, 1), (1, 1), (2, 0), (0, 2), (2, 1), (1, 2), (2, 2))


def _pade(ratio: Sequence[Fraction], dp: int, dq: int):
    """P, Q with deg <= (dp, dq), Q(0) = 1 and Q*ratio - P = O(t^(dp+dq+1))."""
    n = dp + dq + 1
    # unknowns q_1..q_dq from coefficients dp+1 .. dp+dq of Q*ratio
    rows = []
    for k in range(dp + 1, dp + dq + 1):
        row = [ratio[k - j] if k - j >= 0 else Fraction(0) for j in range(1, dq + 1)]
        rows.append(row + [-ratio[k]])
    qs = _solve(rows, dq)
    if qs is None:
        return None
    Q = [Fraction(1)] + qs
    P = series_mul(Q, ratio, n)[: dp + 1]
    return tuple(P), tuple(Q)


def _solve(rows: list[list[Fraction]], k: int) -> list[Fraction] | None:
    """Unique solution of a square augmented system, else None."""
    if k == 0:
        return []
    mat = [list(r) for r in rows]
    for col in range(k):
        piv = next((i for i in range(col, k) if mat[i][col] != 0), None)
        if piv is None:
            return None
        mat[col], mat[piv] = mat[piv], mat[col]
        for i in range(k):
            if i != col and mat[i][col] != 0:
                f = mat[i][col] / mat[col][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[col])]
    return [mat[i][k] / mat[i][i] for i in range(k)]


def pullback_check(
    opA: HolonomicOperator,
    m: BasechangeMap,
    seqB: PeriodSequence | Sequence[int],
    order: int,
) -> PullbackReport:
    """Is sum b_n t^n = F_A(m(t)) / p(t) for a rational p of degree at most (2, 2)?

    F_A is the holomorphic solution of opA at the MUM point, so p(t) G_B(t)
    lies in the kernel of the pullback of opA along m.  A Pade approximant of
    F_A(m(t)) / G_B(t) proposes p; the check is that
    den(t) F_A(m(t)) - num(t) G_B(t) vanishes through t^order.
    """
    terms = list(seqB.terms if isinstance(seqB, PeriodSequence) else seqB)
    n = order + 1
    if len(terms) < n:
        raise ValueError(f"need {n} terms of seqB, got {len(terms)}")
    gb = [Fraction(b) for b in terms[:n]]
    fa = frobenius_solutions(opA, order).f
    pulled = series_compose(fa, m.series(n), n)
    ratio = series_mul(pulled, series_inv(gb, n), n)
    best_remainder: tuple[Fraction, ...] | None = None
    for dp, dq in PADE_DEGREES:
        pq = _pade(ratio, dp, dq)
        if pq is None:
            continue
        P, Q = pq
        rem = [a - b for a, b in zip(series_mul(Q, pulled, n), series_mul(P, gb, n))]
        if not any(rem):
            return PullbackReport(True, (P, Q), tuple(rem), order)
        if best_remainder is None:
            best_remainder = tuple(rem)
    return PullbackReport(False, None, best_remainder or tuple([Fraction(0)] * n), order)
