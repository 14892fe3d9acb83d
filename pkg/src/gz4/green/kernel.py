"""Resolvent kernel Q_1 and exact sums over one translation class.

For a pair of points the translation sum

    S(tau, w) = sum_n Q_1(u(tau, w + n))

is the building block of the weight-4 Green's function.  It is evaluated
either directly with a Hurwitz-zeta tail, or through its Fourier series in
Re(tau - w), which converges geometrically when |Im tau - Im w| is large.
"""

from __future__ import annotations

import mpmath as mp

from ..modgroup import PointH


class DomainError(ValueError):
    pass


def legendre_q1(t) -> mp.mpf:
    """Q_1(t) = (t/2) ln((t+1)/(t-1)) - 1 for t > 1."""
    t = mp.mpf(t)
    if not t > 1:
        raise DomainError("Q_1 needs t > 1")
    return _q1_from_gap(t, t - 1)


def _q1_from_gap(t, gap):
    """Q_1(t) given t and t - 1 computed without cancellation."""
    if t < 3:
        return t / 2 * mp.log1p(2 / gap) - 1
    # sum_{k>=1} t^(-2k)/(2k+1), ratio at most 1/9
    s2 = 1 / (t * t)
    term, total, k = s2, mp.mpf(0), 1
    eps = mp.eps * 2
    while True:
        piece = term / (2 * k + 1)
        total += piece
        if piece < eps * total:
            return total
        term *= s2
        k += 1


def point_pair_invariant(tau: PointH, sigma: PointH) -> mp.mpf:
    with mp.workdps(max(tau.dps, sigma.dps) + 5):
        return 1 + ((tau.x - sigma.x) ** 2 + (tau.y - sigma.y) ** 2) / (2 * tau.y * sigma.y)


def _h(m: int, v):
    """cosh(a) - sinh(a)/a with a = 2 pi m v, stable for small a."""
    a = 2 * mp.pi * m * v
    if a < mp.mpf("0.5"):
        # sum_{j>=1} a^(2j) (1/(2j)! - 1/(2j+1)!)
        total, term, j = mp.mpf(0), mp.mpf(1), 1
        while True:
            term = term * a * a / ((2 * j - 1) * (2 * j))
            piece = term * (1 - mp.mpf(1) / (2 * j + 1))
            total += piece
            if abs(piece) < mp.eps * abs(total):
                return total
            j += 1
    return mp.cosh(a) - mp.sinh(a) / a


def translation_sum_fourier(dx, y, v, tol):
    """S via its Fourier series; returns (value, bound, terms).  Needs y != v.

    With Y = max(y, v) and s = min(y, v):
    S = 2 pi s^2/(3Y) + 2 sum_m h_m(s)/m (1 + 1/(2 pi m Y)) e^{-2 pi m Y} cos(2 pi m dx).
    """
    Y, s = (y, v) if y > v else (v, y)
    value = 2 * mp.pi * s * s / (3 * Y)
    gap = Y - s
    if gap <= 0:
        raise DomainError("Fourier form needs distinct heights")
    m = 1
    while True:
        coeff = 2 * _h(m, s) / m * (1 + 1 / (2 * mp.pi * m * Y)) * mp.exp(-2 * mp.pi * m * Y)
        value += coeff * mp.cos(2 * mp.pi * m * dx)
        # later terms are bounded by coeff * r^j with r = exp(-2 pi gap) * (slack)
        r = mp.exp(-2 * mp.pi * gap)
        bound = abs(coeff) * r / (1 - r)
        if bound < tol or m > 100000:
            return value, bound, m
        m += 1


def _expansion_coefficients(alpha, beta, count):
    """C_p with Q_1(alpha + beta X^2) = sum_{p>=2} C_p X^(-2p) for large X."""
    coeffs = [mp.mpf(0)] * (count + 1)
    for p in range(2, count + 1):
        total = mp.mpf(0)
        for k in range(1, p // 2 + 1):
            j = p - 2 * k
            total += mp.binomial(-2 * k, j) * alpha**j / (2 * k + 1)
        coeffs[p] = total / beta**p
    return coeffs


def translation_sum_direct(dx, y, v, tol):
    """S by direct summation for |X| <= X0 plus a Hurwitz-zeta tail.

    dx is reduced to [-1/2, 1/2); X = n + dx runs over the translates.
    Returns (value, bound, terms).
    """
    dx = dx - mp.floor(dx + mp.mpf(1) / 2)
    beta = 1 / (2 * y * v)
    dy2 = (y - v) ** 2
    alpha = 1 + dy2 * beta
    # the expansion in X^-2 has radius (y + v)^2; |X| >= n0 + 1/2 gives ratio <= 1/9
    n0 = int(mp.ceil(3 * (y + v))) + 1
    value = mp.mpf(0)
    for n in range(-n0, n0 + 1):
        X = n + dx
        gap = (X * X + dy2) * beta
        value += _q1_from_gap(1 + gap, gap)
    count = 8
    while True:
        coeffs = _expansion_coefficients(alpha, beta, count)
        tail = mp.mpf(0)
        last = mp.mpf(0)
        for p in range(2, count + 1):
            if coeffs[p] == 0:
                continue
            z = mp.zeta(2 * p, n0 + 1 + dx) + mp.zeta(2 * p, n0 + 1 - dx)
            last = abs(coeffs[p] * z)
            tail += coeffs[p] * z
        # later terms shrink geometrically with ratio q
        q = ((y + v) / (n0 + mp.mpf(1) / 2)) ** 2
        bound = 4 * last * q / (1 - q)
        if bound < tol or count > 400:
            return value + tail, bound, 2 * n0 + 1 + count
        count *= 2


def translation_sum(dx, y, v, tol):
    """Exact sum of Q_1 over one translation class, choosing the faster form."""
    if abs(y - v) * 2 * mp.pi > 3:
        return translation_sum_fourier(dx, y, v, tol)
    return translation_sum_direct(dx, y, v, tol)
