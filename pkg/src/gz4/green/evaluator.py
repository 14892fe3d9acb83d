"""Evaluation of G(tau, sigma) = -2 sum_{gamma in Gamma0} Q_1(u(tau, gamma sigma)).

Two independent routes are implemented.

spectral
    The cosets Gamma0(N) W_Q / translations are split into the identity
    class (Q = 1 only), summed exactly, and the classes with c != 0, whose
    translation sums are expanded in Fourier modes of tau.  Zero modes add up
    to a Ramanujan-sum Dirichlet series with an Euler product; the other modes
    are Kloosterman series in the modulus c, truncated at c <= sqrt(Q) Lmax
    with a bound for the rest.  Requires Im(tau) above every Im(gamma sigma),
    which holds when Im(tau) Im(sigma) N^2 / Q > 1.

direct
    Sum over the cosets with Im(gamma sigma) >= v_min of exact translation
    sums; for the remaining cosets the zero mode is added exactly and the other
    modes are bounded.  Slow and only accurate to ~1e-6, used as fallback and
    as a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy.special import kv

from ..modgroup import (
    GroupSpec,
    PointH,
    ProjectiveMatrix,
    _egcd,
    atkin_lehner as _al_involution,
    _enumerate_inner,
    moebius_apply,
    reduce_gamma0,
)
from .arith import (
    exact_divisors,
    log_kloosterman_abs_bound,
    kloosterman_table,
    kloosterman_tail_bound,
    ramanujan_series,
)
from .kernel import _h, translation_sum


class PoleHit(ValueError):
    """The evaluation point lies on (or numerically at) a pole."""


def _merge_methods(a: str, b: str) -> str:
    if a == "none" or a == b:
        return b
    if b == "none":
        return a
    return "mixed"


@dataclass(frozen=True)
class EvalResult:
    value: mp.mpf
    error_bound: mp.mpf
    cutoff: mp.mpf
    term_count: int
    method: str = "spectral"
    converged: bool = True

    def __add__(self, other: EvalResult) -> EvalResult:
        return EvalResult(
            self.value + other.value,
            self.error_bound + other.error_bound,
            max(self.cutoff, other.cutoff),
            self.term_count + other.term_count,
            _merge_methods(self.method, other.method),
            self.converged and other.converged,
        )

    def scaled(self, q) -> EvalResult:
        q = mp.mpf(q)
        return EvalResult(self.value * q, self.error_bound * abs(q), self.cutoff,
                          self.term_count, self.method, self.converged)


ZERO = EvalResult(mp.mpf(0), mp.mpf(0), mp.mpf(0), 0, "none", True)

L_LADDER = (60, 120, 250, 500, 1000, 2000, 4000)
M_LADDER = (3, 4, 6, 8, 12, 16, 24, 32, 48)
N_LADDER = (4, 6, 8, 12, 16, 24, 32, 48, 64, 96)
MIN_QUALITY = 1.3


def _al_matrix(Q: int, N: int) -> ProjectiveMatrix:
    """Some matrix in the Atkin-Lehner coset W_Q (not necessarily involutive)."""
    if Q == 1:
        return ProjectiveMatrix(1, 0, 0, 1)
    try:
        return _al_involution(Q, N)
    except ValueError:
        R = N // Q
        _, de, be = _egcd(Q, R)
        return ProjectiveMatrix(Q, -be, N, Q * de)


@dataclass(frozen=True)
class Configuration:
    """Evaluate sum over Gamma0(N) W_Q of Q_1(u(tau, g sigma))."""

    Q: int
    tau: PointH
    sigma: PointH
    quality: float


def configurations(N: int, tau: PointH, sigma: PointH) -> list[Configuration]:
    """All cusp-pair choices, best quality first.

    G is unchanged under a simultaneous Atkin-Lehner move and under swapping
    its arguments; then sigma is written as W_Q applied to a reduced point.
    """
    out = []
    divisors = exact_divisors(N)
    for p1, p2 in ((tau, sigma), (sigma, tau)):
        for Qa in divisors:
            Wa = _al_matrix(Qa, N)
            t1, _ = reduce_gamma0(moebius_apply(Wa, p1), N)
            s0 = moebius_apply(Wa, p2)
            for Qb in divisors:
                s1, _ = reduce_gamma0(moebius_apply(_al_matrix(Qb, N).inverse(), s0), N)
                q = float(t1.y * s1.y) * N * N / Qb
                out.append(Configuration(Qb, t1, s1, q))
    out.sort(key=lambda c: (-c.quality, c.Q))
    return out


def _k32(z: float) -> float:
    return math.sqrt(math.pi / (2 * z)) * math.exp(-z) * (1 + 1 / z)


def _mode_weights(y: float, ys: float, M: int, Nn: int):
    """pref_m and the n-dependent factor sqrt(m) 2 pi sqrt(ys) K_{3/2}(2 pi |n| ys)."""
    ms = np.arange(1, M + 1)
    pref = 2 / ms * (1 + 1 / (2 * np.pi * ms * y)) * np.exp(-2 * np.pi * ms * y)
    ns = np.arange(-Nn, Nn + 1)
    an = 2 * np.pi * np.abs(np.where(ns == 0, 1, ns)) * ys
    kfac = np.sqrt(np.pi / (2 * an)) * np.exp(-an) * (1 + 1 / an)
    kfac = np.where(ns == 0, 0.0, 2 * np.pi * math.sqrt(ys) * kfac)
    return pref, ns, kfac


def _term_bounds(N: int, Q: int, y: float, ys: float, Mb: int, Nb: int) -> np.ndarray:
    """Bounds for the (m, n) terms of the non-zero modes, m = 1..Mb, |n| <= Nb."""
    B = np.zeros((Mb, 2 * Nb + 1))
    for i in range(Mb):
        m = i + 1
        log_pref = math.log(2 / m * (1 + 1 / (2 * math.pi * m * y))) - 2 * math.pi * m * y
        for j, n in enumerate(range(-Nb, Nb + 1)):
            if n == 0:
                B[i, j] = math.exp(log_pref) * 1.2 / Q**2 * (2 * math.pi**3 / 3) * m * m / ys
                continue
            an = 2 * math.pi * abs(n) * ys
            log_k = math.log(2 * math.pi * math.sqrt(ys) * math.sqrt(math.pi / (2 * an)) * (1 + 1 / an)) - an
            log_b = log_pref + 0.5 * math.log(m) + log_k + log_kloosterman_abs_bound(N, Q, m, n)
            B[i, j] = math.exp(min(log_b, 700.0))
    return B


def _choose_box(B: np.ndarray, budget: float) -> tuple[int, int, float] | None:
    Mb, width = B.shape
    Nb = (width - 1) // 2
    # anything beyond the bound grid must itself be negligible
    edge = B[-1, :].sum() + B[:, 0].sum() + B[:, -1].sum()
    if edge > budget * 1e-3:
        return None
    best = None
    for M in M_LADDER:
        if M > Mb:
            break
        for Nn in N_LADDER:
            if Nn > Nb:
                break
            inside = B[:M, Nb - Nn:Nb + Nn + 1].sum()
            outside = B.sum() - inside + edge
            if outside <= budget:
                cost = M * Nn
                if best is None or cost < best[0]:
                    best = (cost, M, Nn, outside)
                break
    if best is None:
        return None
    return best[1], best[2], best[3]


def _zero_mode_sum(N: int, Q: int, xs, ys, tol) -> tuple[mp.mpf, mp.mpf, int]:
    """sum over c != 0 cosets of Im(g sigma)^2, exactly, with a tail bound."""
    base = mp.pi / (2 * ys * Q * Q)
    total = ramanujan_series(0, N, Q) * base
    n = 1
    while True:
        decay = (1 + 2 * mp.pi * n * ys) * mp.exp(-2 * mp.pi * n * ys)
        total += 2 * mp.cos(2 * mp.pi * n * xs) * ramanujan_series(n, N, Q) * base * decay
        r = mp.exp(-2 * mp.pi * ys)
        bound = 2 * mp.mpf("1.12") * base * decay * r / (1 - r) * 2
        if bound < tol:
            return total, bound, n
        n += 1


def spectral_evaluate(N: int, cfg: Configuration, target, Lmax: int | None = None) -> EvalResult | None:
    """The spectral route for one configuration; None if it cannot reach target."""
    tau, sigma, Q = cfg.tau, cfg.sigma, cfg.Q
    dps = max(tau.dps, sigma.dps)
    with mp.workdps(dps + 10):
        target = mp.mpf(target)
        x, y, xs, ys = tau.x, tau.y, sigma.x, sigma.y
        yf, ysf = float(y), float(ys)
        budget = float(target) / 8
        B = _term_bounds(N, Q, yf, ysf, 56, 112)
        box = _choose_box(B, budget)
        if box is None:
            box = _choose_box(B, 1e-15 + 1e3 * budget)
            if box is None:
                return None
        M, Nn, trunc = box
        pref, ns, kfac = _mode_weights(yf, ysf, M, Nn)

        def tail_total(L: int) -> float:
            s = 0.0
            for i in range(M):
                m = i + 1
                for j, n in enumerate(ns):
                    if n:
                        s += pref[i] * math.sqrt(m) * kfac[j] * kloosterman_tail_bound(N, Q, L, m, int(n))
            return s

        if Lmax is None:
            # past the ladder the result is returned with converged=False
            Lmax = next((L for L in L_LADDER if tail_total(L) <= budget), L_LADDER[-1])
        ctail = tail_total(Lmax)
        table = kloosterman_table(N, Q, Lmax, M, Nn)

        total = mp.mpf(0)
        bound = mp.mpf(0)
        terms = 0
        if Q == 1:
            s_id, b_id, k = translation_sum(x - xs, y, ys, target / 16)
            total += s_id
            bound += b_id
            terms += k
        e_sum, e_bound, k = _zero_mode_sum(N, Q, xs, ys, target / 16 * y)
        total += 2 * mp.pi / (3 * y) * e_sum
        bound += 2 * mp.pi / (3 * y) * e_bound
        terms += k

        # non-zero modes: n = 0 column exactly, the rest from the table
        xf, xsf = float(x), float(xs)
        phase_n = np.exp(2j * np.pi * ns * xsf)
        rounding = 0.0
        magnitude = 0.0
        for i in range(M):
            m = i + 1
            row = np.array([table.get(m, int(n)) if n else 0.0 for n in ns])
            rnd = np.array([table.rounding(m, int(n)) if n else 0.0 for n in ns])
            F = np.sum(phase_n * math.sqrt(m) * kfac * row)
            val = pref[i] * (np.exp(2j * np.pi * m * xf) * F).real
            zero_col = (ramanujan_series(m, N, Q) / (Q * Q) * (2 * mp.pi**3 / 3) * m * m / ys)
            val_mp = mp.mpf(float(val)) + mp.mpf(pref[i]) * mp.cos(2 * mp.pi * m * x) * zero_col
            total += val_mp
            terms += 2 * Nn + 1
            rounding += pref[i] * math.sqrt(m) * float(np.sum(kfac * rnd))
            magnitude += pref[i] * math.sqrt(m) * float(np.sum(np.abs(kfac * row)))
        rounding += 4e-16 * magnitude
        bound += mp.mpf(trunc) + mp.mpf(ctail) + mp.mpf(rounding)
        value = -2 * total
        bound = 2 * bound + abs(value) * mp.mpf(10) ** (-dps)
    return EvalResult(+value, +bound, mp.mpf(Lmax), terms, "spectral", bound <= target)


def direct_evaluate(N: int, tau: PointH, sigma: PointH, target, max_cosets: int = 20000) -> EvalResult:
    """Coset summation with exact translation sums; see the module docstring."""
    dps = max(tau.dps, sigma.dps)
    tau, _ = reduce_gamma0(tau, N)
    sigma, _ = reduce_gamma0(sigma, N)
    with mp.workdps(dps + 10):
        target = mp.mpf(target)
        x, y, xs, ys = tau.x, tau.y, sigma.x, sigma.y
        e_total, e_bound, _ = _zero_mode_sum(N, 1, xs, ys, mp.mpf(10) ** (-dps))
        e_total += ys * ys
        v_min = min(y, ys) / 4
        while True:
            images = []
            radius2 = ys / v_min
            cmax = int(mp.floor(mp.sqrt(radius2) / ys))
            for c in range(0, cmax + 1, N):
                rem = radius2 - (c * ys) ** 2
                if rem < 0:
                    continue
                if c == 0:
                    images.append(sigma)
                    continue
                r = mp.sqrt(rem)
                centre = -c * xs
                for d in range(int(mp.floor(centre - r)), int(mp.ceil(centre + r)) + 1):
                    if math.gcd(c, d) != 1:
                        continue
                    img_y = ys / ((c * xs + d) ** 2 + (c * ys) ** 2)
                    if img_y < v_min:
                        continue
                    _, a, b = _egcd(d, -c)
                    img_x = ((a * xs + b) * (c * xs + d) + a * c * ys * ys) / ((c * xs + d) ** 2 + (c * ys) ** 2)
                    images.append(PointH(img_x, img_y, dps))
            K1 = mp.mpf(0)
            m = 1
            while True:
                piece = 2 / mp.mpf(m) * (1 + 1 / (2 * mp.pi * m * y)) * mp.exp(-2 * mp.pi * m * y) * _h(m, v_min) / v_min**2
                K1 += piece
                if piece < K1 * mp.mpf(10) ** (-6):
                    K1 *= 1 + mp.mpf(10) ** (-5)
                    break
                m += 1
            included = sum((p.y**2 for p in images if p is not sigma), mp.mpf(0))
            rest = e_total - ys * ys - included
            tail_bound = K1 * max(rest, mp.mpf(0)) + e_bound
            if 2 * tail_bound <= target / 2 or len(images) > max_cosets:
                break
            v_min /= 2
        total = mp.mpf(0)
        bound = mp.mpf(0)
        for p in images:
            s, b, _ = translation_sum(x - p.x, y, p.y, target / (4 * len(images)))
            total += s
            bound += b
        total += 2 * mp.pi / (3 * y) * max(rest, mp.mpf(0))
        bound += 2 * mp.pi / (3 * y) * e_bound + tail_bound
        value = -2 * total
        bound = 2 * bound + abs(value) * mp.mpf(10) ** (-dps)
    return EvalResult(+value, +bound, 1 / v_min, len(images), "direct", bound <= target)


def check_pole_inner(N: int, tau: PointH, sigma: PointH) -> None:
    dps = max(tau.dps, sigma.dps)
    with mp.workdps(dps + 10):
        U = 1 + mp.mpf(10) ** (-(dps // 2))
    if _enumerate_inner(N, tau, sigma, U):
        raise PoleHit("evaluation point lies in the orbit of the pole")


def pair_inner(N: int, tau: PointH, sigma: PointH, target_error, cutoff: int | None = None,
               method: str = "auto") -> EvalResult:
    """G(tau, sigma) for Gamma0(N) itself; see green_pair."""
    check_pole_inner(N, tau, sigma)
    if method != "direct":
        best = None
        tried = set()
        for cfg in configurations(N, tau, sigma):
            if cfg.quality < MIN_QUALITY or len(tried) >= 3:
                break
            key = (cfg.Q, round(cfg.quality, 9))
            if key in tried:
                continue
            tried.add(key)
            res = spectral_evaluate(N, cfg, target_error, cutoff)
            if res is None:
                continue
            if res.converged:
                return res
            if best is None or res.error_bound < best.error_bound:
                best = res
        if best is not None:
            return best
        if method == "spectral":
            raise ValueError("spectral route not applicable at these points")
    return direct_evaluate(N, tau, sigma, target_error)


def green_pair(G: GroupSpec, tau: PointH, sigma: PointH, target_error=mp.mpf("1e-8"),
               cutoff: int | None = None, method: str = "auto") -> EvalResult:
    """G(tau, sigma) = -2 sum over the base group of Q_1(u(tau, gamma sigma)).

    ``cutoff`` fixes the Kloosterman modulus cutoff Lmax of the spectral route
    (used by two-cutoff consistency checks); ``method`` may force "direct" or
    "spectral".  A result that misses ``target_error`` has converged=False.
    """
    return pair_inner(G.level, G.to_inner(tau), G.to_inner(sigma), target_error, cutoff, method)
