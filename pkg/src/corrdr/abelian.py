"""Finite torsion groups ``Z_delta^k``, their subgroups and the Weil pairing.

Elements are integer tuples reduced mod ``delta``.  The ``Pic`` and ``Alb``
copies of ``Z_delta^{2q}`` are paired by the identity block form (the natural
pairing of a lattice with its dual).  Subgroups are stored through the
Howell normal form of a generating matrix, which is unique per subgroup.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

from .graphs import Graph

Vector = tuple[int, ...]


class RankMismatch(ValueError):
    pass


class ResourceCapExceeded(RuntimeError):
    pass


class NotContained(ValueError):
    pass


# --------------------------------------------------------------------------
# Howell normal form


def _unit_normalizer(a: int, n: int) -> int:
    """A unit ``c`` mod ``n`` with ``c * a = gcd(a, n)`` mod ``n``."""
    g = math.gcd(a, n)
    for c in range(1, n + 1):
        if math.gcd(c, n) == 1 and (c * a - g) % n == 0:
            return c % n
    raise ArithmeticError("no unit normalizer")  # pragma: no cover


def howell_form(rows: Iterable[Sequence[int]], n: int, k: int) -> tuple[Vector, ...]:
    """Howell normal form of the row span of ``rows`` over ``Z_n^k``."""
    if n == 1:
        return ()
    a = [[x % n for x in r] for r in rows]
    for r in a:
        if len(r) != k:
            raise RankMismatch(f"row {r} does not have length {k}")
    a.extend([0] * k for _ in range(max(0, k - len(a))))
    piv = 0
    for j in range(k):
        if piv >= len(a):
            break
        for i in range(piv + 1, len(a)):
            if a[i][j] == 0:
                continue
            x, y = a[piv][j], a[i][j]
            g, s, t = _xgcd(x, y)
            u, v = -y // g, x // g
            rp, ri = a[piv], a[i]
            a[piv] = [(s * p + t * q) % n for p, q in zip(rp, ri)]
            a[i] = [(u * p + v * q) % n for p, q in zip(rp, ri)]
        if a[piv][j] == 0:
            continue
        c = _unit_normalizer(a[piv][j], n)
        a[piv] = [(c * x) % n for x in a[piv]]
        p = a[piv][j]
        for i in range(piv):
            f = a[i][j] // p
            if f:
                a[i] = [(x - f * y) % n for x, y in zip(a[i], a[piv])]
        # Howell property: the annihilator multiple of the pivot row stays in the span
        extra = [(n // p * x) % n for x in a[piv]]
        if any(extra):
            a.append(extra)
        piv += 1
    return tuple(tuple(r) for r in a if any(r))


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """``(g, s, t)`` with ``s*a + t*b = g = gcd(a, b)``."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return a, s0, t0


def _pivot(row: Vector) -> int:
    return next(i for i, x in enumerate(row) if x)


# --------------------------------------------------------------------------
# ambient and subgroups


@dataclass(frozen=True)
class TorsionAmbient:
    """``Z_delta^rank``; for a target of irregularity ``q`` the rank is ``2q``."""

    delta: int
    rank: int

    @classmethod
    def for_target(cls, delta: int, q: int) -> "TorsionAmbient":
        return cls(delta, 2 * q)

    @property
    def order(self) -> int:
        return self.delta ** self.rank

    def elements(self) -> Iterable[Vector]:
        return itertools.product(range(self.delta), repeat=self.rank)

    def reduce(self, x: Sequence[int]) -> Vector:
        if len(x) != self.rank:
            raise RankMismatch(f"element {tuple(x)} has rank {len(x)}, expected {self.rank}")
        return tuple(v % self.delta for v in x)

    def basis(self, i: int) -> Vector:
        return tuple(1 if j == i else 0 for j in range(self.rank))

    def zero_subgroup(self) -> "Subgroup":
        return Subgroup(self, ())

    def full_subgroup(self) -> "Subgroup":
        return Subgroup.generated(self, [self.basis(i) for i in range(self.rank)])


@dataclass(frozen=True)
class Subgroup:
    """A subgroup presented by its Howell normal-form rows."""

    ambient: TorsionAmbient
    rows: tuple[Vector, ...]

    @classmethod
    def generated(cls, ambient: TorsionAmbient, gens: Iterable[Sequence[int]]) -> "Subgroup":
        gens = [ambient.reduce(g) for g in gens]
        return cls(ambient, howell_form(gens, ambient.delta, ambient.rank))

    @property
    def delta(self) -> int:
        return self.ambient.delta

    @property
    def order(self) -> int:
        out = 1
        for r in self.rows:
            out *= self.delta // r[_pivot(r)]
        return out

    def __len__(self) -> int:
        return self.order

    @cached_property
    def element_set(self) -> frozenset[Vector]:
        n, k = self.delta, self.ambient.rank
        elems = {tuple([0] * k)}
        for r in self.rows:
            mult = n // r[_pivot(r)]
            elems = {tuple((x + c * y) % n for x, y in zip(e, r))
                     for e in elems for c in range(mult)}
        return frozenset(elems)

    def elements(self) -> list[Vector]:
        return sorted(self.element_set)

    def __contains__(self, x: Sequence[int]) -> bool:
        return self.ambient.reduce(x) in self.element_set

    def issubgroup(self, other: "Subgroup") -> bool:
        return all(r in other for r in self.rows)

    def join(self, other: "Subgroup") -> "Subgroup":
        return Subgroup.generated(self.ambient, list(self.rows) + list(other.rows))

    def meet(self, other: "Subgroup") -> "Subgroup":
        common = self.element_set & other.element_set
        return Subgroup.generated(self.ambient, common)

    def to_json(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    @classmethod
    def from_json(cls, ambient: TorsionAmbient, rows: Sequence[Sequence[int]]) -> "Subgroup":
        return cls.generated(ambient, rows)


# --------------------------------------------------------------------------
# Weil pairing


def weil_pair(x: Sequence[int], y: Sequence[int], level: int) -> int:
    """Pairing of ``x`` in the Pic copy with ``y`` in the Alb copy, in ``Z_level``."""
    if len(x) != len(y):
        raise RankMismatch(f"ranks differ: {len(x)} vs {len(y)}")
    return sum(a * b for a, b in zip(x, y)) % level


def weil_pair_circle(x: Sequence[int], y: Sequence[int], level: int) -> Fraction:
    """Same pairing as a point of ``R/Z`` (value in ``[0, 1)``)."""
    return Fraction(weil_pair(x, y, level), level)


def raise_level(x: Sequence[int], k: int) -> Vector:
    """Rewrite a ``delta``-torsion element as a ``k*delta``-torsion element."""
    return tuple(k * v for v in x)


def pairing_is_nondegenerate(ambient: TorsionAmbient) -> bool:
    """The adjoint map ambient -> Hom(ambient, Z_delta) is a bijection."""
    images = set()
    basis = [ambient.basis(i) for i in range(ambient.rank)]
    for x in ambient.elements():
        images.add(tuple(weil_pair(x, b, ambient.delta) for b in basis))
    return len(images) == ambient.order


def orthogonal(h: Subgroup) -> Subgroup:
    """Annihilator of ``h`` in the dual copy under :func:`weil_pair`."""
    amb = h.ambient
    if not h.rows:
        return amb.full_subgroup()
    ann = [y for y in amb.elements() if all(weil_pair(r, y, amb.delta) == 0 for r in h.rows)]
    return Subgroup.generated(amb, ann)


# --------------------------------------------------------------------------
# subgroup lattice


def enumerate_subgroups(ambient: TorsionAmbient, cap: int = 4096) -> list[Subgroup]:
    """All subgroups, sorted by order then by normal-form rows.

    Every subgroup is a join of cyclic subgroups, so the lattice is the closure
    of the cyclic subgroups under joins.  ``cap`` bounds the ambient order.
    """
    if ambient.order > cap:
        raise ResourceCapExceeded(f"ambient of order {ambient.order} exceeds cap {cap}")
    cyclic = {Subgroup.generated(ambient, [x]) for x in ambient.elements()}
    found = set(cyclic)
    frontier = set(cyclic)
    while frontier:
        nxt = set()
        for s in frontier:
            for c in cyclic:
                j = s.join(c)
                if j not in found:
                    found.add(j)
                    nxt.add(j)
        frontier = nxt
    return sorted(found, key=lambda s: (s.order, s.rows))


class SubgroupLattice:
    """Inclusion order and Möbius function on all subgroups of an ambient."""

    def __init__(self, ambient: TorsionAmbient, cap: int = 4096):
        self.ambient = ambient
        self.subgroups = enumerate_subgroups(ambient, cap)
        self.index = {s: i for i, s in enumerate(self.subgroups)}
        self._mu: dict[tuple[int, int], int] = {}

    def above(self, k: Subgroup) -> list[Subgroup]:
        return [h for h in self.subgroups if k.issubgroup(h)]

    def interval(self, k: Subgroup, h: Subgroup) -> list[Subgroup]:
        return [j for j in self.subgroups if k.issubgroup(j) and j.issubgroup(h)]

    def moebius(self, k: Subgroup, h: Subgroup) -> int:
        if not k.issubgroup(h):
            raise NotContained("moebius needs K contained in H")
        key = (self.index[k], self.index[h])
        if key not in self._mu:
            if k == h:
                val = 1
            else:
                val = -sum(self.moebius(k, j) for j in self.interval(k, h) if j != h)
            self._mu[key] = val
        return self._mu[key]


def moebius(k: Subgroup, h: Subgroup) -> int:
    return _lattice(k.ambient).moebius(k, h)


@lru_cache(maxsize=None)
def _lattice(ambient: TorsionAmbient) -> SubgroupLattice:
    return SubgroupLattice(ambient)


# --------------------------------------------------------------------------
# arithmetic functions


def prime_factors(n: int) -> list[int]:
    out, p = [], 2
    while p * p <= n:
        if n % p == 0:
            out.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


def jordan_J2(n: int) -> int:
    """Jordan totient ``J_2(n) = n^2 prod_{p | n} (1 - 1/p^2)``."""
    if n < 1:
        raise ValueError("J_2 needs n >= 1")
    out = n * n
    for p in prime_factors(n):
        out = out // (p * p) * (p * p - 1)
    return out


def element_order(x: Sequence[int], n: int) -> int:
    g = n
    for v in x:
        g = math.gcd(g, v % n)
    return n // g


def count_order_exactly(n: int, rank: int = 2) -> int:
    """Elements of order exactly ``n`` in ``Z_n^rank``, by direct count."""
    return sum(1 for x in itertools.product(range(n), repeat=rank) if element_order(x, n) == n)


def divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


# --------------------------------------------------------------------------
# coverings


@dataclass(frozen=True)
class CoveringDegrees:
    diag_components: int
    per_component_degree: Fraction
    torsor_degree: int


def covering_degrees(gr: Graph, h: Subgroup) -> CoveringDegrees:
    """Component count and degrees of the twisted diagonals of an H-cover."""
    size = h.order
    return CoveringDegrees(
        diag_components=size ** gr.b1,
        per_component_degree=Fraction(size) ** (gr.n_edges - 1),
        torsor_degree=size,
    )


def cochain_classes(gr: Graph, h: Subgroup) -> int:
    """``|C^1(Gamma, H) / d C^0(Gamma, H)|`` counted by brute-force orbits."""
    elems = h.elements()
    n = h.delta
    add = lambda x, y, s=1: tuple((a + s * b) % n for a, b in zip(x, y))
    seen: set = set()
    classes = 0
    for cochain in itertools.product(elems, repeat=gr.n_edges):
        if cochain in seen:
            continue
        classes += 1
        for f in itertools.product(elems, repeat=gr.n_vertices):
            seen.add(tuple(add(add(c, f[b]), f[a], -1) for c, (a, b) in zip(cochain, gr.edges)))
    return classes
