"""Lattice polytopes in Z^3: Newton polytopes, facets, polar duals, reflexivity."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

import numpy as np

from .laurent import Exponent, LaurentPolynomial3

Vector = tuple[int, int, int]


class OriginNotInterior(ValueError):
    pass


def _sub(a: Sequence[int], b: Sequence[int]) -> Vector:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def _cross(a: Sequence[int], b: Sequence[int]) -> Vector:
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def _dot(a: Sequence, b: Sequence):
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def _primitive(v: Sequence[int]) -> Vector:
    g = math.gcd(math.gcd(v[0], v[1]), v[2])
    return (v[0] // g, v[1] // g, v[2] // g)


def affine_dimension(points: Sequence[Vector]) -> int:
    if len(points) <= 1:
        return 0
    diffs = np.array([_sub(p, points[0]) for p in points[1:]], dtype=object)
    from sympy import Matrix

    return Matrix(diffs.tolist()).rank()


def _facets_full(points: Sequence[Vector]) -> list[tuple[Vector, int]]:
    """Outward primitive normals n and offsets h with n.x <= h on the hull."""
    arr = np.array(points, dtype=np.int64)
    facets = set()
    for a, b, c in combinations(range(len(points)), 3):
        n = _cross(_sub(points[b], points[a]), _sub(points[c], points[a]))
        if n == (0, 0, 0):
            continue
        n = _primitive(n)
        h = _dot(n, points[a])
        vals = arr @ np.array(n, dtype=np.int64)
        if vals.max() <= h:
            facets.add((n, h))
        elif vals.min() >= h:
            facets.add(((-n[0], -n[1], -n[2]), -h))
    return sorted(facets)


def _hull_2d(points: list[tuple[int, int]]) -> list[tuple[int, int]]:
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def turn(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower, upper = [], []
    for p in pts:
        while len(lower) >= 2 and turn(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(pts):
        while len(upper) >= 2 and turn(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def convex_hull_vertices(points: Sequence[Vector]) -> list[Vector]:
    """Extreme points of a finite set in Z^3, any affine dimension."""
    pts = sorted(set(tuple(int(v) for v in p) for p in points))
    if not pts:
        raise ValueError("empty point set")
    dim = affine_dimension(pts)
    if dim == 0:
        return pts[:1]
    if dim == 1:
        d = _sub(pts[-1], pts[0])
        key = [_dot(d, p) for p in pts]
        return sorted({pts[key.index(min(key))], pts[key.index(max(key))]})
    if dim == 2:
        n = None
        for a, b in combinations(pts[1:], 2):
            n = _cross(_sub(a, pts[0]), _sub(b, pts[0]))
            if n != (0, 0, 0):
                break
        # projection along a coordinate axis not parallel to the plane is injective
        drop = next(i for i in range(3) if n[i] != 0)
        keep = [i for i in range(3) if i != drop]
        lookup = {(p[keep[0]], p[keep[1]]): p for p in pts}
        return sorted(lookup[q] for q in _hull_2d(list(lookup)))
    facets = _facets_full(pts)
    vertices = []
    for p in pts:
        normals = [n for n, h in facets if _dot(n, p) == h]
        if len(normals) >= 3 and np.linalg.matrix_rank(np.array(normals, dtype=float)) == 3:
            vertices.append(p)
    return vertices


@dataclass(frozen=True)
class LatticePolytope3:
    """Convex hull of lattice points, stored by its vertices."""

    vertices: tuple[Vector, ...]

    def __post_init__(self) -> None:
        verts = convex_hull_vertices(self.vertices)
        object.__setattr__(self, "vertices", tuple(verts))

    @property
    def dimension(self) -> int:
        return affine_dimension(list(self.vertices))

    def facets(self) -> list[tuple[Vector, int]]:
        """(n, h) with n primitive outward and n.x <= h; full-dimensional only."""
        if self.dimension < 3:
            raise ValueError("facets need a full-dimensional polytope")
        return _facets_full(list(self.vertices))

    def contains(self, p: Sequence[int], strict: bool = False) -> bool:
        for n, h in self.facets():
            v = _dot(n, p)
            if v > h or (strict and v == h):
                return False
        return True

    def origin_interior(self) -> bool:
        return self.dimension == 3 and all(h > 0 for _, h in self.facets())


@dataclass(frozen=True)
class RationalPolytope3:
    vertices: tuple[tuple[Fraction, Fraction, Fraction], ...]

    def is_lattice(self) -> bool:
        return all(v.denominator == 1 for p in self.vertices for v in p)


def newton_polytope(phi: LaurentPolynomial3) -> LatticePolytope3:
    if phi.is_zero():
        raise ValueError("the zero polynomial has no Newton polytope")
    return LatticePolytope3(tuple(phi.support))


def _require_interior(P: LatticePolytope3) -> list[tuple[Vector, int]]:
    if P.dimension < 3:
        raise OriginNotInterior("polytope is not full-dimensional")
    facets = P.facets()
    if any(h <= 0 for _, h in facets):
        raise OriginNotInterior("origin is not an interior point")
    return facets


def polar_dual(P: LatticePolytope3) -> RationalPolytope3:
    """P* = {y : <x, y> >= -1 for x in P}; its vertices are -n/h over the facets."""
    facets = _require_interior(P)
    verts = sorted(tuple(Fraction(-c, h) for c in n) for n, h in facets)
    return RationalPolytope3(tuple(verts))


def is_reflexive(P: LatticePolytope3) -> bool:
    """Every facet at lattice distance one from the origin."""
    return all(h == 1 for _, h in _require_interior(P))


def facet_distances(P: LatticePolytope3) -> list[int]:
    return [h for _, h in _require_interior(P)]


def exponent_box(points: Sequence[Exponent]) -> tuple[Vector, Vector]:
    lo = tuple(min(p[i] for p in points) for i in range(3))
    hi = tuple(max(p[i] for p in points) for i in range(3))
    return lo, hi
