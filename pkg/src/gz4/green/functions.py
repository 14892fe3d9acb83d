"""Green's functions attached to a CM pole: basic, Hecke translates, relations, and the
Atkin-Lehner antisymmetrisation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp

from ..modgroup import (
    CMPoint,
    GroupSpec,
    NotCoprime,
    PointH,
    gamma0_equivalent,
    hecke_cosets,
    moebius_apply,
)
from .evaluator import ZERO, EvalResult, pair_inner


class DegeneratePole(ValueError):
    """The antisymmetrised combination vanishes identically for this pole."""


@dataclass(frozen=True)
class GreenSpec:
    """The weight-4 Green's function of ``group`` with a log-pole at ``pole``."""

    group: GroupSpec
    pole: CMPoint
    k: int = 2

    def __post_init__(self) -> None:
        if self.k != 2:
            raise ValueError("only weight 4 (k = 2) is implemented")


@dataclass(frozen=True)
class HeckeRelation:
    """Formal combination sum a_m T_m.  Whether it kills S_4 is not checked."""

    terms: tuple[tuple[int, Fraction], ...] = ()
    verified: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        terms = tuple((int(m), Fraction(a)) for m, a in self.terms)
        ms = [m for m, _ in terms]
        if any(m < 1 for m in ms):
            raise ValueError("Hecke indices must be positive")
        if len(set(ms)) != len(ms):
            raise ValueError("Hecke indices must be distinct")
        object.__setattr__(self, "terms", terms)

    def check_level(self, N: int) -> None:
        for m, _ in self.terms:
            if math.gcd(m, N) != 1:
                raise NotCoprime(f"T_{m} is not allowed at level {N}")

    def scaled(self, q) -> HeckeRelation:
        q = Fraction(q)
        return HeckeRelation(tuple((m, a * q) for m, a in self.terms))


def _pole_inner(G: GroupSpec, pole: CMPoint, dps: int) -> PointH:
    return G.form_to_inner(pole).point(dps)


def green_basic(spec: GreenSpec, tau: PointH, target_error=mp.mpf("1e-8"), cutoff: int | None = None,
                method: str = "auto") -> EvalResult:
    """G_b(tau) for the pole b of ``spec``."""
    G = spec.group
    return pair_inner(G.level, G.to_inner(tau), _pole_inner(G, spec.pole, tau.dps),
                      target_error, cutoff, method)


def hecke_translate(G: GroupSpec, m: int, spec: GreenSpec, tau: PointH, target_error=mp.mpf("1e-8"),
                    cutoff: int | None = None, method: str = "auto") -> EvalResult:
    """(T_m^* G_b)(tau) = sum over the right cosets (a b; 0 d) of G_b((a tau + b)/d)."""
    reps = hecke_cosets(m, G.level)
    tau_i = G.to_inner(tau)
    sigma = _pole_inner(G, spec.pole, tau.dps)
    target = mp.mpf(target_error) / len(reps)
    total = ZERO
    for rep in reps:
        total = total + pair_inner(G.level, moebius_apply(rep, tau_i), sigma, target, cutoff, method)
    return total


def green_relation(G: GroupSpec, rel: HeckeRelation, pole: CMPoint, tau: PointH,
                   target_error=mp.mpf("1e-8"), cutoff: int | None = None,
                   method: str = "auto") -> EvalResult:
    """G_{T,b}(tau) = sum_m m a_m (T_m^* G_b)(tau)  (weight 4, so m^(k-1) = m)."""
    rel.check_level(G.level)
    weights = [(m, m * a) for m, a in rel.terms if a != 0]
    if not weights:
        return ZERO
    scale = sum(abs(w) for _, w in weights)
    spec = GreenSpec(G, pole)
    total = ZERO
    for m, w in weights:
        part = hecke_translate(G, m, spec, tau, mp.mpf(target_error) / scale, cutoff, method)
        total = total + part.scaled(mp.mpf(w.numerator) / w.denominator)
    return total


def hat_poles(G: GroupSpec, pole: CMPoint) -> list[tuple[CMPoint, int]]:
    """The poles gamma(b0) with characters chi(gamma), gamma in the Atkin-Lehner group.

    Raises DegeneratePole when an element with chi = -1 maps b0 into its own
    orbit, since then the signed sum cancels identically.
    """
    out = []
    for g, chi in G.fricke_group():
        image = pole.transform(g)
        if chi == -1 and gamma0_equivalent(image, pole, G):
            raise DegeneratePole(f"{pole} is equivalent to its image {image}")
        out.append((image, chi))
    return out


def green_hat(G: GroupSpec, pole: CMPoint, tau: PointH, target_error=mp.mpf("1e-8"),
              cutoff: int | None = None, method: str = "auto") -> EvalResult:
    """sum over the Atkin-Lehner group of chi(gamma) G_{gamma(b0)}(tau)."""
    poles = hat_poles(G, pole)
    target = mp.mpf(target_error) / len(poles)
    total = ZERO
    for image, chi in poles:
        part = green_basic(GreenSpec(G, image), tau, target, cutoff, method)
        total = total + part.scaled(chi)
    return total
