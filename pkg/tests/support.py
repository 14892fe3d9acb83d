"""Shared fixtures-by-function for the test modules (cached, deterministic)."""

from __future__ import annotations

import itertools
from functools import lru_cache

from gz4.periods import find_recurrence, period_sequence, period_sequence_naive
from gz4.registry import load_registry

MODULAR_N = (2, 3, 4, 5, 6, 7, 8, 9, 11)


@lru_cache(maxsize=None)
def records():
    return load_registry()


@lru_cache(maxsize=None)
def record(family_id: str):
    return next(r for r in records() if r.id == family_id)


@lru_cache(maxsize=None)
def explicit_ids() -> tuple[str, ...]:
    return tuple(r.id for r in records() if r.phi is not None)


@lru_cache(maxsize=None)
def terms(family_id: str, n_max: int) -> tuple[int, ...]:
    return period_sequence(record(family_id).phi, n_max).terms


@lru_cache(maxsize=None)
def naive_terms(family_id: str, n_max: int) -> tuple[int, ...]:
    return tuple(period_sequence_naive(record(family_id).phi, n_max))


@lru_cache(maxsize=None)
def operator(family_id: str, n_terms: int = 40, box: tuple[int, int] = (4, 5)):
    return find_recurrence(terms(family_id, n_terms - 1), *box)


def brute_constant_term(phi, n: int) -> int:
    """Constant term of phi^n by summing over all n-tuples of monomials."""
    items = list(phi.terms)
    total = 0
    for combo in itertools.product(items, repeat=n):
        if all(sum(e[i] for e, _ in combo) == 0 for i in range(3)):
            prod = 1
            for _, c in combo:
                prod *= c
            total += prod
    return total
