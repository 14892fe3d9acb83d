"""Holonomic operators for period series: guessing, form conversion, singular points.

An operator is kept in theta form L = sum_i t^i P_i(theta) with theta = t d/dt,
stored as ``ode[k][i]`` = coefficient of t^i theta^k, and in shift form
sum_j p_j(n) a_{n+j} = 0, stored as ``rec[j][l]`` = coefficient of n^l in p_j.
The coefficient of t^n in L(sum a_m t^m) is sum_i P_i(n - i) a_{n-i}, so with
p_j(m) = P_{s-j}(m + j) the two forms describe the same equations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath as mp
import sympy

from .sequence import PeriodSequence

Poly = tuple[int, ...]  # ascending coefficients

SURPLUS = 10
_PRIME = 2**61 - 1


# ---------------------------------------------------------------------------
# small exact polynomial helpers (ascending integer coefficient tuples)


def _trim(p: Sequence[int]) -> Poly:
    p = list(p)
    while p and p[-1] == 0:
        p.pop()
    return tuple(p)


def _peval(p: Sequence, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _pmul(a: Sequence[int], b: Sequence[int]) -> Poly:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return _trim(out)


def _pshift(p: Sequence[int], c: int) -> Poly:
    """p(x + c)."""
    out: list[int] = []
    for coeff in reversed(p):
        out = list(_pmul(out, (c, 1))) if out else []
        if out:
            out[0] += coeff
        else:
            out = [coeff]
    return _trim(out)


def _pderiv(p: Sequence[int]) -> Poly:
    return _trim([k * p[k] for k in range(1, len(p))])


def _normalize(polys: Sequence[Sequence[int]], sign_source: Sequence[int]) -> tuple[Poly, ...]:
    """Divide by the content and make the first nonzero coefficient of sign_source positive."""
    g = 0
    for p in polys:
        for c in p:
            g = math.gcd(g, c)
    if g == 0:
        raise ValueError("zero operator")
    lead = next(c for c in sign_source if c)
    if lead < 0:
        g = -g
    return tuple(_trim([c // g for c in p]) for p in polys)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HolonomicOperator:
    """Picard-Fuchs type operator in theta form and/or shift form.

    ``series`` optionally carries the truncated solution the operator was
    derived from; conversions use it to decide which boundary factors are
    needed and tests check both forms against it.
    """

    ode: tuple[Poly, ...] | None = None
    rec: tuple[Poly, ...] | None = None
    series: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.ode is None and self.rec is None:
            raise ValueError("an operator needs at least one form")
        if self.ode is not None:
            ode = [_trim(q) for q in self.ode]
            while ode and not ode[-1]:
                ode.pop()
            if not ode:
                raise ValueError("zero operator")
            object.__setattr__(self, "ode", _normalize(ode, ode[-1]))
        if self.rec is not None:
            rec = [_trim(p) for p in self.rec]
            while rec and not rec[-1]:
                rec.pop()
            while rec and not rec[0]:
                rec.pop(0)
            if not rec:
                raise ValueError("zero operator")
            object.__setattr__(self, "rec", _normalize(rec, rec[-1][::-1]))
        if self.series is not None:
            object.__setattr__(self, "series", tuple(self.series))

    @property
    def has_ode(self) -> bool:
        return self.ode is not None

    @property
    def has_rec(self) -> bool:
        return self.rec is not None

    @property
    def order(self) -> int:
        """Differential order (theta degree)."""
        return len(self._ode()) - 1

    @property
    def degree(self) -> int:
        """Degree in t of the theta form."""
        return max(len(q) for q in self._ode()) - 1

    @property
    def rec_order(self) -> int:
        return len(self._rec()) - 1

    def _ode(self) -> tuple[Poly, ...]:
        if self.ode is None:
            raise ValueError("differential form not populated")
        return self.ode

    def _rec(self) -> tuple[Poly, ...]:
        if self.rec is None:
            raise ValueError("recurrence form not populated")
        return self.rec

    def theta_parts(self) -> list[Poly]:
        """P_i(theta) for i = 0..degree, ascending in theta."""
        ode = self._ode()
        s = self.degree
        return [_trim([q[i] if i < len(q) else 0 for q in ode]) for i in range(s + 1)]

    def leading_coefficient(self) -> Poly:
        """q_r(t), the coefficient of the top theta power."""
        return self._ode()[-1]

    def __str__(self) -> str:
        parts = []
        if self.ode is not None:
            parts.append("L = " + ode_str(self))
        if self.rec is not None:
            parts.append("0 = " + rec_str(self))
        return "\n".join(parts)


def _poly_sym(p: Sequence[int], var: sympy.Symbol):
    return sum(int(c) * var**k for k, c in enumerate(p))


def ode_str(op: HolonomicOperator) -> str:
    t, th = sympy.symbols("t theta")
    terms = []
    for k, q in enumerate(op._ode()):
        if q:
            terms.append(sympy.factor(_poly_sym(q, t)) * th**k)
    return str(sum(terms))


def rec_str(op: HolonomicOperator) -> str:
    n = sympy.Symbol("n")
    out = []
    for j, p in enumerate(op._rec()):
        if p:
            shift = "a(n)" if j == 0 else f"a(n+{j})"
            out.append(f"({sympy.factor(_poly_sym(p, n))})*{shift}")
    return " + ".join(out)


# ---------------------------------------------------------------------------
# application to truncated series


def apply_ode(op: HolonomicOperator, series: Sequence) -> list:
    """Coefficients of L(sum a_n t^n) for t^0 .. t^(len-1); exact for the truncation."""
    parts = op.theta_parts()
    out = []
    for n in range(len(series)):
        acc = 0
        for i, P in enumerate(parts):
            if n - i >= 0 and P:
                acc += _peval(P, n - i) * series[n - i]
        out.append(acc)
    return out


def apply_rec(op: HolonomicOperator, series: Sequence, start: int = 0) -> list:
    """Residuals sum_j p_j(n) a_{n+j} for every n >= start the truncation covers."""
    rec = op._rec()
    r = len(rec) - 1
    return [
        sum(_peval(p, n) * series[n + j] for j, p in enumerate(rec) if p)
        for n in range(start, len(series) - r)
    ]


# ---------------------------------------------------------------------------
# conversions


def ode_to_rec(op: HolonomicOperator) -> HolonomicOperator:
    """p_j(m) = P_{s-j}(m + j); valid for all m >= -s, in particular m >= 0."""
    parts = op.theta_parts()
    s = len(parts) - 1
    rec = [_pshift(parts[s - j], j) if parts[s - j] else () for j in range(s + 1)]
    return HolonomicOperator(ode=op.ode, rec=tuple(rec), series=op.series)


def _rec_boundary_ok(rec: Sequence[Poly], m: int, series: Sequence | None) -> bool:
    """Does sum_j p_j(m) a_{m+j} vanish for a negative m (with a_k = 0 for k < 0)?"""
    terms = [(j, _peval(p, m)) for j, p in enumerate(rec) if p and m + j >= 0]
    if all(v == 0 for _, v in terms):
        return True
    if series is None:
        return False
    return sum(v * series[m + j] for j, v in terms) == 0


def rec_to_ode(op: HolonomicOperator) -> HolonomicOperator:
    """theta form of a recurrence valid for n >= 0.

    The theta form also imposes the recurrence at n = -1 .. -r; where that
    fails, the recurrence is first multiplied by (n + k).
    """
    rec = list(op._rec())
    r = len(rec) - 1
    for k in range(1, r + 1):
        if not _rec_boundary_ok(rec, -k, op.series):
            rec = [_pmul(p, (k, 1)) if p else () for p in rec]
    # P_i(x) = p_{r-i}(x - (r - i))
    parts = [_pshift(rec[r - i], -(r - i)) if rec[r - i] else () for i in range(r + 1)]
    order = max(len(P) for P in parts)
    ode = [tuple(P[k] if k < len(P) else 0 for P in parts) for k in range(order)]
    return HolonomicOperator(ode=tuple(ode), rec=op.rec, series=op.series)


# ---------------------------------------------------------------------------
# exact linear algebra


def _nullity_mod_p(rows: list[list[int]], ncols: int, p: int = _PRIME) -> int:
    mat = [[x % p for x in row] for row in rows]
    rank = 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(mat)) if mat[i][col]), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        inv = pow(mat[rank][col], -1, p)
        prow = [x * inv % p for x in mat[rank]]
        mat[rank] = prow
        for i in range(rank + 1, len(mat)):
            f = mat[i][col]
            if f:
                mat[i] = [(a - f * b) % p for a, b in zip(mat[i], prow)]
        rank += 1
    return ncols - rank


def _row_content(row: list[int]) -> list[int]:
    g = 0
    for x in row:
        g = math.gcd(g, x)
    return [x // g for x in row] if g > 1 else row


def integer_kernel(rows: list[list[int]], ncols: int) -> list[tuple[int, ...]]:
    """Basis of the rational kernel, as primitive integer vectors (fraction-free Gauss-Jordan)."""
    mat = [_row_content(list(r)) for r in rows if any(r)]
    pivots: list[int] = []
    rank = 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(mat)) if mat[i][col]), None)
        if piv is None:
            continue
        mat[rank], mat[piv] = mat[piv], mat[rank]
        prow = mat[rank]
        a = prow[col]
        for i in range(len(mat)):
            if i != rank and mat[i][col]:
                b = mat[i][col]
                mat[i] = _row_content([a * x - b * y for x, y in zip(mat[i], prow)])
        pivots.append(col)
        rank += 1
    mat = mat[:rank]
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        lcm = 1
        for i, pc in enumerate(pivots):
            lcm = lcm * mat[i][pc] // math.gcd(lcm, mat[i][pc])
        vec = [0] * ncols
        vec[f] = lcm
        for i, pc in enumerate(pivots):
            vec[pc] = -mat[i][f] * (lcm // mat[i][pc])
        basis.append(tuple(_row_content(vec)))
    return basis


# ---------------------------------------------------------------------------
# guessing


def _equations(terms: Sequence, order: int, degree: int, count: int) -> list[list[int]]:
    """Row n: coefficient of t^n in L(sum a_m t^m) as a linear form in the unknowns c[i][k].

    Rational terms are allowed; each row is scaled to integers.
    """
    rows = []
    for n in range(count):
        row = []
        for i in range(degree + 1):
            m = n - i
            a = terms[m] if m >= 0 else 0
            row.extend(a * m**k for k in range(order + 1))
        if any(isinstance(x, Fraction) for x in row):
            den = math.lcm(*(Fraction(x).denominator for x in row))
            row = [int(x * den) for x in row]
        rows.append(row)
    return rows


def _operator_from_vector(vec: Sequence[int], order: int, degree: int, series) -> HolonomicOperator:
    ode = tuple(
        tuple(vec[i * (order + 1) + k] for i in range(degree + 1)) for k in range(order + 1)
    )
    return ode_to_rec(HolonomicOperator(ode=ode, series=tuple(series)))


def find_recurrence(
    seq: PeriodSequence | Sequence[int | Fraction], max_order: int, max_degree: int
) -> HolonomicOperator | None:
    """Smallest operator sum_{i<=degree} t^i P_i(theta), deg P_i <= order, killing the series.

    Boxes are searched by order, then degree.  Each candidate must be the
    unique solution of all but the last ``SURPLUS`` equations and satisfy
    those too.
    """
    terms = list(seq.terms if isinstance(seq, PeriodSequence) else seq)
    need = (max_order + 1) * (max_degree + 1) + SURPLUS
    if len(terms) < need:
        raise ValueError(f"box ({max_order}, {max_degree}) needs at least {need} terms, got {len(terms)}")
    count = len(terms)
    for order in range(1, max_order + 1):
        for degree in range(0, max_degree + 1):
            unknowns = (order + 1) * (degree + 1)
            rows = _equations(terms, order, degree, count)
            if _nullity_mod_p(rows, unknowns) == 0:
                continue
            head = integer_kernel(rows[: count - SURPLUS], unknowns)
            if len(head) != 1:
                continue
            vec = head[0]
            if any(sum(a * b for a, b in zip(row, vec)) for row in rows[count - SURPLUS:]):
                continue
            return _operator_from_vector(vec, order, degree, terms)
    return None


# ---------------------------------------------------------------------------
# singular points


@dataclass(frozen=True)
class SingularPoint:
    """A root of the leading coefficient.  ``minpoly`` is the irreducible factor
    (ascending integer coefficients) it belongs to; ``exact`` is a closed form
    when the factor has degree at most two."""

    minpoly: Poly
    multiplicity: int
    exact: str | None
    value: Fraction | None
    approx: complex

    def numeric(self, dps: int = 50):
        """The root to ``dps`` digits, refined from the defining factor."""
        with mp.workdps(dps + 10):
            roots = mp.polyroots(list(reversed(self.minpoly)), maxsteps=200, extraprec=4 * dps)
            best = min(roots, key=lambda z: abs(complex(z) - self.approx))
        return best


@dataclass(frozen=True)
class SingularLocus:
    points: tuple[SingularPoint, ...]
    zero_multiplicity: int
    infinity_exponents: tuple[str, ...]

    @property
    def finite_nonzero(self) -> tuple[SingularPoint, ...]:
        return self.points

    def count(self) -> int:
        return len(self.points)

    def contains(self, value, tol: float = 1e-20, dps: int = 50) -> bool:
        with mp.workdps(dps):
            target = mp.mpmathify(value)
            return any(abs(p.numeric(dps) - target) <= tol for p in self.points)


def singular_points(op: HolonomicOperator) -> SingularLocus:
    """Roots of the leading theta coefficient, grouped by irreducible factor over Q."""
    t = sympy.Symbol("t")
    lead = op.leading_coefficient()
    zero_mult = next(k for k, c in enumerate(lead) if c)
    poly = sympy.Poly(list(reversed(lead[zero_mult:])), t)
    _, factors = sympy.factor_list(poly)
    points = []
    for fac, mult in factors:
        coeffs = tuple(int(c) for c in reversed(fac.all_coeffs()))
        deg = len(coeffs) - 1
        if deg == 1:
            val = Fraction(-coeffs[0], coeffs[1])
            points.append(SingularPoint(coeffs, mult, str(val), val, complex(val)))
            continue
        with mp.workdps(30):
            approx = [complex(z) for z in mp.polyroots(list(reversed(coeffs)), maxsteps=200, extraprec=200)]
        exact: list[str | None] = [None] * deg
        if deg == 2:
            # align closed forms with the numeric roots
            syms = list(sympy.roots(fac.as_expr(), t))
            for idx, z in enumerate(approx):
                j = min(range(len(syms)), key=lambda k: abs(complex(sympy.N(syms[k], 30)) - z))
                exact[idx] = str(syms.pop(j))
        for z, ex in zip(approx, exact):
            points.append(SingularPoint(coeffs, mult, ex, None, z))
    points.sort(key=lambda p: (abs(p.approx), p.approx.real, p.approx.imag))
    # at infinity, u = 1/t turns theta into -theta; exponents are roots of P_s(-rho)
    parts = op.theta_parts()
    rho = sympy.Symbol("rho")
    top = sympy.Poly(_poly_sym(parts[-1], -rho), rho) if parts[-1] else None
    inf_exps: tuple[str, ...] = ()
    if top is not None and top.degree() > 0:
        inf_exps = tuple(sorted(str(r) for r, m in sympy.roots(top).items() for _ in range(m)))
    return SingularLocus(tuple(points), zero_mult, inf_exps)
