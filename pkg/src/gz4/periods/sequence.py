"""Constant-term period sequences a_n = [x^0 y^0 z^0] phi^n.

Powers of phi are kept as dense 3-d arrays modulo word-sized primes.  Since
a_{j+l} is the pairing of phi^j with the point reflection of phi^l, only
powers up to n/2 are needed.  The residues are combined by the Chinese
remainder theorem with enough primes to cover |a_n| <= (sum |c|)^n.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sympy import prevprime
from sympy.ntheory.modular import crt

from .laurent import LaurentPolynomial3
from .polytope import exponent_box


@dataclass(frozen=True)
class PeriodSequence:
    terms: tuple[int, ...]

    def __post_init__(self) -> None:
        terms = tuple(int(a) for a in self.terms)
        if not terms or terms[0] != 1:
            raise ValueError("a period sequence starts with a_0 = 1")
        object.__setattr__(self, "terms", terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __getitem__(self, i):
        return self.terms[i]

    def even_part(self) -> PeriodSequence:
        return PeriodSequence(self.terms[::2])


_PRIME_START = 2**31 - 1


def _primes(count: int) -> list[int]:
    out, p = [], _PRIME_START + 1
    for _ in range(count):
        p = prevprime(p)
        out.append(p)
    return out


class _ModularPowers:
    """phi^k as a dense array mod p, indexed from k * lo."""

    def __init__(self, phi: LaurentPolynomial3, p: int):
        self.p = p
        self.lo, self.hi = exponent_box(phi.support)
        self.width = tuple(h - l for l, h in zip(self.lo, self.hi))
        self.terms = [(tuple(e[i] - self.lo[i] for i in range(3)), c) for e, c in phi.terms]

    def step(self, cur: np.ndarray) -> np.ndarray:
        shape = tuple(s + w for s, w in zip(cur.shape, self.width))
        new = np.zeros(shape, dtype=np.int64)
        s0, s1, s2 = cur.shape
        # entries are reduced below p < 2^31; reduce again before they could reach 2^62
        budget = 2**62 // self.p
        used = 0
        for (o0, o1, o2), c in self.terms:
            if used + abs(c) > budget:
                new %= self.p
                used = 0
            view = new[o0:o0 + s0, o1:o1 + s1, o2:o2 + s2]
            if c == 1:
                view += cur
            else:
                view += c * cur
            used += abs(c)
        new %= self.p
        return new

    def pair(self, A: np.ndarray, j: int, B: np.ndarray, l: int) -> int:
        """sum_e A[e] B[-e] with A = phi^j, B = phi^l."""
        sl_a, sl_b = [], []
        for ax in range(3):
            K = -(j + l) * self.lo[ax]
            na, nb = A.shape[ax], B.shape[ax]
            i0, i1 = max(0, K - nb + 1), min(na - 1, K)
            if i0 > i1:
                return 0
            sl_a.append(slice(i0, i1 + 1))
            sl_b.append(slice(K - i1, K - i0 + 1))
        a = A[tuple(sl_a)]
        b = B[tuple(sl_b)][::-1, ::-1, ::-1]
        prod = (a * b) % self.p
        # at most 2^31 entries of size < 2^31 per partial sum
        return sum(int(chunk.sum()) for chunk in np.array_split(prod.ravel(), 1 + prod.size // 2**30)) % self.p


def _sequence_mod(phi: LaurentPolynomial3, n_max: int, p: int) -> list[int]:
    mp_ = _ModularPowers(phi, p)
    out = [0] * (n_max + 1)
    cur = np.ones((1, 1, 1), dtype=np.int64)  # phi^0 at exponent 0 = 0 * lo
    j = 0
    while 2 * j <= n_max:
        out[2 * j] = mp_.pair(cur, j, cur, j)
        if 2 * j + 1 > n_max:
            break
        nxt = mp_.step(cur)
        out[2 * j + 1] = mp_.pair(cur, j, nxt, j + 1)
        cur, j = nxt, j + 1
    return out


def period_sequence(phi: LaurentPolynomial3, n_max: int) -> PeriodSequence:
    """a_0 .. a_{n_max}, exact."""
    if n_max < 0:
        raise ValueError("n_max must be nonnegative")
    if phi.is_zero():
        return PeriodSequence((1,) + (0,) * n_max)
    norm1 = sum(abs(c) for _, c in phi.terms)
    bits = (max(norm1, 1) ** n_max).bit_length() + 2
    primes = _primes(bits // 30 + 1)
    residues = [_sequence_mod(phi, n_max, p) for p in primes]
    modulus = 1
    for p in primes:
        modulus *= p
    terms = []
    for n in range(n_max + 1):
        r, _ = crt(primes, [res[n] for res in residues])
        r = int(r)
        if r > modulus // 2:
            r -= modulus
        terms.append(r)
    return PeriodSequence(tuple(terms))


def period_sequence_naive(phi: LaurentPolynomial3, n_max: int) -> list[int]:
    """Direct expansion of the powers; slow, used as a cross-check."""
    out, power = [1], LaurentPolynomial3.constant(1)
    for _ in range(n_max):
        power = power * phi
        out.append(power.constant_term())
    return out
