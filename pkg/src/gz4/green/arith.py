"""Arithmetic sums behind the Fourier expansion of the Green's function.

The non-identity cosets of Gamma0(N)*W_Q modulo translations are indexed by
bottom rows with c = sqrt(Q)*L, where L runs over

    S(N, Q) = {L >= 1 : (N/Q) | L, gcd(L, Q) = 1}.

Zero Fourier modes reduce to the Dirichlet series sum_{L in S} c_L(k) L^-4 of
Ramanujan sums, which has an exact Euler product; the other modes need the
twisted Kloosterman sums

    K_Q(-m, n; L) = sum_{d mod L, (d, L) = 1} e((-m*a + n*d)/L),  a = (Q d)^-1 mod L.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import mpmath as mp
import numpy as np
from scipy.special import iv, jv
from sympy import factorint


def exact_divisors(N: int) -> list[int]:
    """Q with Q | N and gcd(Q, N/Q) = 1."""
    return [Q for Q in range(1, N + 1) if N % Q == 0 and math.gcd(Q, N // Q) == 1]


def moduli(N: int, Q: int, Lmax: int) -> list[int]:
    R = N // Q
    return [L for L in range(R, Lmax + 1, R) if math.gcd(L, Q) == 1]


def _local_factor(p: int, r: int, v: int | None) -> Fraction:
    """sum_{e >= r} c_{p^e}(k) p^(-4e) with v = v_p(k) (None for k = 0)."""
    P = Fraction(1, p)
    if v is None:
        if r == 0:
            return (1 - P**4) / (1 - P**3)
        return (1 - P) * P ** (3 * r) / (1 - P**3)
    total = Fraction(0)
    for e in range(r, v + 2):
        if e == 0:
            total += 1
        elif e <= v:
            total += (Fraction(p**e) - p ** (e - 1)) * P ** (4 * e)
        else:
            total -= Fraction(p**v) * P ** (4 * e)
    return total


@lru_cache(maxsize=None)
def _ramanujan_series_parts(k: int, N: int, Q: int) -> tuple[Fraction, bool]:
    """sum_{L in S(N,Q)} c_L(k)/L^4 = rational * (zeta(3) if flag) / zeta(4)."""
    R = N // Q
    kf = factorint(abs(k)) if k else {}
    rational = Fraction(1)
    # all primes: product over p of the unrestricted factor, then correct at p | N
    if k == 0:
        with_zeta3 = True
    else:
        with_zeta3 = False
        for p, v in kf.items():  # sigma_{-3}(k) = prod_p sum_{j<=v} p^{-3j}
            rational *= sum(Fraction(1, p ** (3 * j)) for j in range(v + 1))
    for p in factorint(N):
        v = kf.get(p, 0) if k else None
        unrestricted = _local_factor(p, 0, v)
        if Q % p == 0:
            restricted = Fraction(1)
        else:
            r = 0
            while R % p ** (r + 1) == 0:
                r += 1
            restricted = _local_factor(p, r, v)
        rational *= restricted / unrestricted
    return rational, with_zeta3


def ramanujan_series(k: int, N: int, Q: int) -> mp.mpf:
    """sum over L in S(N, Q) of c_L(k) / L^4, exactly through Euler products."""
    rational, with_zeta3 = _ramanujan_series_parts(k, N, Q)
    value = mp.mpf(rational.numerator) / rational.denominator / mp.zeta(4)
    if with_zeta3:
        value *= mp.zeta(3)
    return value


def ramanujan_sum(L: int, k: int) -> int:
    """c_L(k) = sum_{d | gcd(L, k)} d * mu(L/d)."""
    g = math.gcd(L, k) if k else L
    total = 0
    for d in range(1, g + 1):
        if g % d == 0 and L % d == 0:
            total += d * _mobius(L // d)
    return total


def _mobius(n: int) -> int:
    f = factorint(n)
    if any(e > 1 for e in f.values()):
        return 0
    return -1 if len(f) % 2 else 1


def _bessel_weight(mm: np.ndarray, nn: np.ndarray, c: float) -> np.ndarray:
    arg = 4 * math.pi * np.sqrt(mm * np.abs(nn)) / c
    return np.where(nn > 0, iv(3, arg), jv(3, arg)) / c


def _inverse_mod(x: np.ndarray, L: int, phi: int) -> np.ndarray:
    """x^-1 mod L for units x, as x^(phi(L) - 1) by vectorised square-and-multiply."""
    if L > 3_000_000_000:
        raise OverflowError("modulus too large for int64 products")
    result = np.ones_like(x)
    base = x % L
    e = phi - 1
    while e:
        if e & 1:
            result = result * base % L
        base = base * base % L
        e >>= 1
    return result


class KloostermanTable:
    """Z(m, n) = sum_{L in S, L <= Lmax} K_Q(-m, n; L) B_3(4 pi sqrt(m|n|)/c)/c.

    B_3 is I_3 for n > 0 and J_3 for n < 0, c = sqrt(Q) L.  Rows m = 1..M,
    columns n = -Nn..Nn (the n = 0 column is unused and left at zero).
    Also stores sum_L phi(L)|B_3|/c, which bounds float rounding.
    """

    def __init__(self, N: int, Q: int, Lmax: int, M: int, Nn: int):
        self.N, self.Q, self.Lmax, self.M, self.Nn = N, Q, Lmax, M, Nn
        ms = np.arange(1, M + 1)
        ns = np.arange(-Nn, Nn + 1)
        mm, nn = np.meshgrid(ms, ns, indexing="ij")
        Z = np.zeros(mm.shape)
        Zabs = np.zeros(mm.shape)
        mask = nn != 0
        for L in moduli(N, Q, Lmax):
            if L == 1:
                d = np.array([0], dtype=np.int64)
                a = np.array([0], dtype=np.int64)
            else:
                k = np.arange(1, L, dtype=np.int64)
                d = k[np.gcd(k, L) == 1]
                a = _inverse_mod(d * Q % L, L, len(d))
            roots = np.exp(2j * np.pi * np.arange(L) / L)
            A = roots[(-np.outer(ms, a)) % L]
            D = roots[np.outer(d, ns) % L]
            K = (A @ D).real
            c = math.sqrt(Q) * L
            w = np.where(mask, _bessel_weight(mm, nn, c), 0.0)
            Z += K * w
            Zabs += len(d) * np.abs(w)
        self.Z = Z
        self.Zabs = Zabs

    def get(self, m: int, n: int) -> float:
        return float(self.Z[m - 1, n + self.Nn])

    def rounding(self, m: int, n: int) -> float:
        return float(self.Zabs[m - 1, n + self.Nn]) * 1e-14


_TABLES: dict[tuple[int, int, int], list[KloostermanTable]] = {}


def kloosterman_table(N: int, Q: int, Lmax: int, M: int, Nn: int) -> KloostermanTable:
    """Cached table; a cached table with a larger (M, Nn) box is reused."""
    tables = _TABLES.setdefault((N, Q, Lmax), [])
    for t in tables:
        if t.M >= M and t.Nn >= Nn:
            return t
    t = KloostermanTable(N, Q, Lmax, M, Nn)
    tables.append(t)
    return t


def log_bessel_bound(x: float, positive: bool) -> float:
    """log of an upper bound for |I_3(x)| (positive) or |J_3(x)|, x > 0.

    Uses I_3(x) <= (x/2)^3/3! cosh(x) and |J_3(x)| <= min(1, (x/2)^3/3!).
    """
    base = 3 * math.log(x / 2) - math.log(6)
    if positive:
        return base + x + math.log1p(math.exp(-2 * x)) - math.log(2)
    return min(0.0, base)


def log_kloosterman_abs_bound(N: int, Q: int, m: int, n: int) -> float:
    """log of a bound for |Z(m, n)| over all moduli, via |K| <= phi(L) <= L."""
    R = N // Q
    x1 = 4 * math.pi * math.sqrt(m * abs(n)) / (math.sqrt(Q) * R)
    if n > 0:
        # k >= 2 terms: (x1/2k)^3 <= (x1/4)^3 (2/k)^3 and sum_{k>=2} (2/k)^3 < 1.62
        a = log_bessel_bound(x1, True)
        b = math.log(1.62) + log_bessel_bound(x1 / 2, True)
        s = max(a, b) + math.log1p(math.exp(min(a, b) - max(a, b)))
    else:
        total = sum(math.exp(log_bessel_bound(x1 / k, False)) for k in range(1, 50))
        total += (x1 / 2) ** 3 / 6 / (2 * 49**2)
        s = math.log(total)
    return s - 0.5 * math.log(Q)


_SIEVE_LIMIT = 200000


@lru_cache(maxsize=None)
def _divisor_counts() -> np.ndarray:
    tau = np.zeros(_SIEVE_LIMIT + 1, dtype=np.int64)
    for d in range(1, _SIEVE_LIMIT + 1):
        tau[d::d] += 1
    return tau


@lru_cache(maxsize=None)
def _weil_tail_sum(N: int, Q: int, Lmax: int) -> float:
    """sum over L in S(N, Q), L > Lmax of tau(L) L^(-7/2), rigorously bounded."""
    tau = _divisor_counts()
    R = N // Q
    L = np.arange(R * (Lmax // R + 1), _SIEVE_LIMIT + 1, R)
    if Q > 1:
        L = L[np.gcd(L, Q) == 1]
    inside = float(np.sum(tau[L] * L.astype(float) ** -3.5))
    # tau(L) <= 2 sqrt(L) beyond the sieve
    return inside * (1 + 1e-12) + 1.0 / _SIEVE_LIMIT**2


def kloosterman_tail_bound(N: int, Q: int, Lmax: int, m: int, n: int) -> float:
    """Bound for the moduli L > Lmax in Z(m, n).

    Weil: |K_Q(-m, n; L)| <= tau(L) gcd(m, n, L)^(1/2) L^(1/2); the Bessel
    factor is at most (x/2)^3/6 times cosh(x) (n > 0) with x <= x at Lmax.
    """
    x_scale = 4 * math.pi * math.sqrt(m * abs(n)) / math.sqrt(Q)  # x_L = x_scale / L
    grow = math.cosh(x_scale / (Lmax + 1)) if n > 0 else 1.0
    g = math.gcd(m, abs(n))
    return (x_scale / 2) ** 3 / 6 * grow * math.sqrt(g) / math.sqrt(Q) * _weil_tail_sum(N, Q, Lmax)
