"""r-weightings, the cone functions P and L, and the assembled DR_K fans.

A weighting lives on the ``delta``-subdivided graph.  It is stored as one
residue per segment (the value on the tail half-edge; the head carries the
negative).  At every vertex the outgoing values plus the leg slopes
``a_i / delta`` are congruent to the divergence ``D(v)`` mod ``r``.

Edge factors use representatives in ``[0, r)``: a segment with value ``y``
contributes ``exp(y (r - y) / 2 * l_e / delta)``.  The normalized sum over all
weightings is a polynomial in ``r`` for large ``r`` and the cone function P
is its value at ``r = 0``.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

from .abelian import Subgroup, TorsionAmbient, enumerate_subgroups
from .exact import ConfigurationError, InterpolationError, TruncPoly, WindowError, constant_term, interpolate, monomials_up_to
from .graphs import Graph, SubdividedGraph, automorphism_count, contract_edge_map, cycle_basis
from .monodromy import MonodromyGraph, contract, enumerate_strata, find_isomorphic, right_kernel
from .tropical import (DivisorClass, PLFunction, TropicalDivisor, canonical_alpha, canonical_rep,
                       solve_alpha, TorsionError)

LegData = Mapping[int, int]  # leg label -> a_i (before division by delta)


def lvar(e: int) -> str:
    return f"l_{e}"


def _legs_tuple(legs: LegData | Sequence[int] | None, graph: Graph) -> tuple[tuple[int, int], ...]:
    if legs is None:
        return tuple((lab, 0) for lab in graph.leg_labels)
    if not isinstance(legs, Mapping):
        legs = dict(zip(sorted(graph.leg_labels), legs))
    return tuple(sorted((int(k), int(v)) for k, v in legs.items()))


# --------------------------------------------------------------------------
# weightings


@dataclass(frozen=True)
class Weighting:
    sub: SubdividedGraph
    r: int
    segment_values: tuple[int, ...]

    def half_edge(self, h: int) -> int:
        y = self.segment_values[h // 2]
        return y if h % 2 == 0 else (-y) % self.r

    @property
    def values(self) -> dict[int, int]:
        return {h: self.half_edge(h) for h in range(2 * self.sub.n_edges)}


def _demands(sub: SubdividedGraph, divergence: TropicalDivisor | None, legs: Sequence[tuple[int, int]]) -> list[int]:
    delta = sub.delta
    dem = [0] * sub.n_vertices
    if divergence is not None:
        for v, c in divergence.values:
            dem[v] += c
    for lab, a in legs:
        if a % delta:
            raise ConfigurationError(f"leg {lab}: {a} is not divisible by delta={delta}")
        dem[sub.base.leg_vertex(lab)] -= a // delta
    return dem


def _tree_flow(n_vertices: int, edges: Sequence[tuple[int, int]], demand: Sequence[int]) -> list[int] | None:
    """Integer flow on a BFS tree with outflow ``demand``; ``None`` if unbalanced."""
    if sum(demand) != 0:
        return None
    parent_edge: dict[int, tuple[int, int]] = {}
    order = [0]
    seen = {0}
    queue = deque([0])
    adj: dict[int, list[tuple[int, int, int]]] = {v: [] for v in range(n_vertices)}
    for i, (a, b) in enumerate(edges):
        if a != b:
            adj[a].append((i, b, 1))
            adj[b].append((i, a, -1))
    while queue:
        v = queue.popleft()
        for i, w, s in adj[v]:
            if w not in seen:
                seen.add(w)
                parent_edge[w] = (i, -s)
                order.append(w)
                queue.append(w)
    if len(seen) != n_vertices:
        return None
    flow = [0] * len(edges)
    need = list(demand)
    for v in reversed(order[1:]):
        i, s = parent_edge[v]
        # s = +1 when v is the tail of edge i
        flow[i] = s * need[v]
        a, b = edges[i]
        other = b if a == v else a
        need[other] += need[v]
        need[v] = 0
    return flow


def _lifted_cycles(sub: SubdividedGraph) -> list[list[int]]:
    out = []
    for gamma in cycle_basis(sub.base):
        out.append([gamma[sub.origin[s]] for s in range(sub.n_edges)])
    return out


def _particular(sub: SubdividedGraph, divergence: TropicalDivisor | None, legs,
                r: int | None = None) -> list[int] | None:
    dem = _demands(sub, divergence, legs)
    if r is not None and sum(dem) % r == 0:
        # only the residue mod r matters once r is fixed
        dem[0] -= sum(dem)
    return _tree_flow(sub.n_vertices, sub.edges, dem)


def enumerate_weightings(sub: SubdividedGraph, divergence: TropicalDivisor | None,
                         legs: LegData | None, r: int) -> list[Weighting]:
    if r <= 0:
        raise ConfigurationError("r must be positive")
    part = _particular(sub, divergence, _legs_tuple(legs, sub.base), r)
    if part is None:
        return []
    cycles = _lifted_cycles(sub)
    out = []
    for t in itertools.product(range(r), repeat=len(cycles)):
        vals = list(part)
        for tj, cyc in zip(t, cycles):
            for s, c in enumerate(cyc):
                vals[s] += tj * c
        out.append(Weighting(sub, r, tuple(v % r for v in vals)))
    return out


def is_weighting(w: Weighting, divergence: TropicalDivisor | None, legs: LegData | None) -> bool:
    """Check the edge, vertex and leg conditions directly on half-edge values."""
    sub, r = w.sub, w.r
    legs_t = _legs_tuple(legs, sub.base)
    vals = w.values
    for s in range(sub.n_edges):
        if not (0 <= vals[2 * s] < r) or (vals[2 * s] + vals[2 * s + 1]) % r:
            return False
    total = [0] * sub.n_vertices
    for s, (a, b) in enumerate(sub.edges):
        total[a] += vals[2 * s]
        total[b] += vals[2 * s + 1]
    for lab, a in legs_t:
        total[sub.base.leg_vertex(lab)] += a // sub.delta
    for v in range(sub.n_vertices):
        want = divergence[v] if divergence is not None else 0
        if (total[v] - want) % r:
            return False
    return True


# --------------------------------------------------------------------------
# the weighting sum at a fixed r


_INT64_SAFE = 2 ** 62


def _edge_sums(sub: SubdividedGraph, part: Sequence[int], r: int) -> np.ndarray:
    """Array of shape (r^b1, E): per base edge the sum of ``y (r - y)`` over segments."""
    cycles = np.array(_lifted_cycles(sub), dtype=np.int64).reshape(sub.b1, sub.n_edges)
    b1 = cycles.shape[0]
    grid = np.indices((r,) * b1).reshape(b1, -1).T if b1 else np.zeros((1, 0), dtype=np.int64)
    flows = (np.asarray(part, dtype=np.int64)[None, :] + grid @ cycles) % r
    seg = flows * (r - flows)
    n_base = sub.base.n_edges
    sums = np.zeros((flows.shape[0], n_base), dtype=np.int64)
    for e in range(n_base):
        sums[:, e] = seg[:, e * sub.delta:(e + 1) * sub.delta].sum(axis=1)
    return sums


def weighting_sum(sub: SubdividedGraph, divergence: TropicalDivisor | None, legs: LegData | None,
                  r: int, trunc: int) -> TruncPoly:
    """``r^{-b1} sum_w prod_e exp(C_e(w) / (2 delta) * l_e)`` truncated at ``trunc``."""
    legs_t = _legs_tuple(legs, sub.base)
    part = _particular(sub, divergence, legs_t, r)
    if part is None:
        return TruncPoly.zero(trunc)
    sums = _edge_sums(sub, part, r)
    n_w = sums.shape[0]
    n_base = sub.base.n_edges
    peak = int(sums.max()) if sums.size else 0
    use_object = n_w * max(peak, 1) ** max(trunc, 1) >= _INT64_SAFE
    arr = sums.astype(object) if use_object else sums
    scale = Fraction(1, r ** sub.b1)
    terms: dict = {(): Fraction(1)}
    names = [lvar(e) for e in range(n_base)]
    for mono in monomials_up_to(names, trunc):
        if not mono:
            continue
        prod = np.ones(n_w, dtype=arr.dtype)
        denom = 1
        k = 0
        for v, m in mono:
            prod = prod * arr[:, int(v[2:])] ** m
            denom *= math.factorial(m)
            k += m
        total = int(prod.sum())
        if total:
            terms[mono] = scale * Fraction(total, denom * (2 * sub.delta) ** k)
    return TruncPoly(terms, trunc)


# --------------------------------------------------------------------------
# constant term


@dataclass(frozen=True)
class Window:
    nodes: tuple[int, ...]
    degree: int


def interpolation_window(sub: SubdividedGraph, divergence: TropicalDivisor | None, legs: LegData | None,
                         trunc: int, extra_nodes: int = 0) -> Window:
    delta = sub.delta
    legs_t = _legs_tuple(legs, sub.base)
    max_div = max((abs(c) for _, c in divergence.values), default=0) if divergence is not None else 0
    r0 = sum(abs(a) for _, a in legs_t) // delta + delta * max_div + 2
    dmax = 2 * trunc + sub.b1 + 2
    count = dmax + 3 + extra_nodes
    return Window(tuple(r0 + i * delta for i in range(count)), dmax)


@lru_cache(maxsize=None)
def _p_cached(sub: SubdividedGraph, divergence: TropicalDivisor | None, legs_t: tuple, trunc: int,
              extra_nodes: int) -> TruncPoly:
    legs = dict(legs_t)
    win = interpolation_window(sub, divergence, legs, trunc, extra_nodes)
    nodes = [(r, weighting_sum(sub, divergence, legs, r, trunc)) for r in win.nodes]
    try:
        fitted = interpolate(nodes, degree=win.degree)
    except InterpolationError as exc:
        raise WindowError(
            f"window too small: nodes {win.nodes[0]}..{win.nodes[-1]} step {sub.delta}, "
            f"degree {win.degree}: {exc}") from exc
    return constant_term(fitted).with_bound(trunc)


def P_constant_term(sub: SubdividedGraph, divergence: TropicalDivisor | None, legs: LegData | None,
                    trunc: int, extra_nodes: int = 0) -> TruncPoly:
    return _p_cached(sub, divergence, _legs_tuple(legs, sub.base), trunc, extra_nodes)


# --------------------------------------------------------------------------
# L and the cone contribution


def _as_class(cone) -> DivisorClass:
    return cone.divisor_class if hasattr(cone, "divisor_class") else cone


def L_from(alpha: PLFunction, d: TropicalDivisor) -> TruncPoly:
    """``(1/delta^2) sum_v alpha(v) * delta * D(v)`` as a linear form in the ``l_e``."""
    delta = d.sub.delta
    acc: dict[int, Fraction] = {}
    for v, c in d.values:
        for e, x in alpha.value(v).items():
            acc[e] = acc.get(e, Fraction(0)) + x * delta * c
    return TruncPoly({((lvar(e), 1),): x / delta ** 2 for e, x in acc.items()})


def L_function(cone) -> TruncPoly:
    c = _as_class(cone)
    return L_from(canonical_alpha(c), canonical_rep(c))


def alpha_for(d: TropicalDivisor) -> PLFunction:
    try:
        return solve_alpha(d)
    except TorsionError:
        return solve_alpha(d, normalize=False)


def cone_contribution(cone, legs: LegData | None, trunc: int,
                      representative: TropicalDivisor | None = None) -> TruncPoly:
    """``exp(-L/2) * P`` for a divisor class, optionally at another representative."""
    c = _as_class(cone)
    if representative is None:
        d = canonical_rep(c)
        lin = L_function(c)
    else:
        d = representative
        lin = L_from(alpha_for(d), d)
    p = P_constant_term(d.sub, d, legs, trunc)
    return (lin * Fraction(-1, 2)).with_bound(trunc).exp() * p


# --------------------------------------------------------------------------
# fans


@dataclass
class Cone:
    mono: MonodromyGraph
    poly: TruncPoly
    n_classes: int

    @property
    def weight(self) -> Fraction:
        return Fraction(self.mono.ktilde.order, self.mono.delta ** self.mono.b1)


@dataclass
class PiecewisePolynomial:
    cones: list[Cone]
    trunc: int
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "params": self.params,
            "trunc": self.trunc,
            "fan": [{
                "cone": c.mono.to_json(),
                "aut": automorphism_count(c.mono.graph),
                "prefactor": f"{c.weight.numerator}/{c.weight.denominator}",
                "classes": c.n_classes,
                "polynomial": c.poly.to_text(),
            } for c in self.cones],
        }


def cone_polynomial(mg: MonodromyGraph, legs: LegData | None, trunc: int) -> tuple[TruncPoly, int]:
    g = mg.graph.genus
    pref = Fraction(mg.delta) ** (2 * g - 2 * mg.q) * mg.ktilde.order / Fraction(mg.delta) ** mg.b1
    total = TruncPoly.zero(trunc)
    classes = right_kernel(mg).elements()
    for v in classes:
        total = total + cone_contribution(DivisorClass(mg.graph, mg.delta, v), legs, trunc)
    return total * pref, len(classes)


def assemble_DRK(g: int, n: int, d: int, delta: int, q: int, k: Subgroup, trunc: int,
                 a: Sequence[int] | None = None, labels: Sequence[int] | None = None,
                 max_edges: int | None = None) -> PiecewisePolynomial:
    labels = list(labels) if labels is not None else list(range(1, n + 1))
    legs = dict(zip(labels, a)) if a is not None else {lab: 0 for lab in labels}
    fan = enumerate_strata(g, n, d, delta, q, k, labels=labels, max_edges=max_edges)
    cones = []
    for mg in fan:
        poly, nc = cone_polynomial(mg, legs, trunc)
        cones.append(Cone(mg, poly, nc))
    return PiecewisePolynomial(cones, trunc, {
        "g": g, "n": n, "d": d, "delta": delta, "q": q, "K": k.to_json(),
        "a": [legs[lab] for lab in labels], "labels": labels})


@dataclass(frozen=True)
class GluingReport:
    ok: bool
    checked: int
    cone: int | None = None
    edge: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def verify_gluing(pp: PiecewisePolynomial) -> GluingReport:
    """Restriction to every facet reproduces the contracted cone and its prefactor."""
    fan = [c.mono for c in pp.cones]
    checked = 0
    for i, cone in enumerate(pp.cones):
        mg = cone.mono
        for e in range(mg.graph.n_edges):
            small = contract(mg, e)
            found = find_isomorphic(small, fan)
            if found is None:
                return GluingReport(False, checked, i, e, "contracted cone missing from fan")
            j, iso = found
            _, emap, _ = contract_edge_map(mg.graph, e)
            restricted = cone.poly.subs({lvar(e): 0})
            mapping = {lvar(o): lvar(iso.target[nw]) for o, nw in enumerate(emap) if nw is not None}
            restricted = restricted.rename(mapping)
            other = pp.cones[j]
            if restricted != other.poly:
                return GluingReport(False, checked, i, e,
                                    f"restriction {restricted.to_text()} != {other.poly.to_text()}")
            lhs = cone.weight * Fraction(cone.n_classes, other.n_classes)
            if lhs != other.weight:
                return GluingReport(False, checked, i, e, f"prefactor {lhs} != {other.weight}")
            checked += 1
    return GluingReport(True, checked)


# --------------------------------------------------------------------------
# the correlated DR class


@dataclass
class CorrelatedDRClass:
    g: int
    a: tuple[int, ...]
    delta: int
    q: int
    trunc: int
    psi_prefactor: TruncPoly
    per_k: list[tuple[Subgroup, PiecewisePolynomial, list[TruncPoly]]]

    def to_json(self) -> dict:
        return {
            "g": self.g, "a": list(self.a), "delta": self.delta, "q": self.q, "trunc": self.trunc,
            "psi_prefactor": self.psi_prefactor.to_text(),
            "strata": [{
                "K": k.to_json(),
                "fan": pp.to_json()["fan"],
                "degree_g": [p.to_text() for p in parts],
            } for k, pp, parts in self.per_k],
        }


def psi_prefactor(a: Sequence[int], delta: int, trunc: int, labels: Sequence[int] | None = None) -> TruncPoly:
    labels = list(labels) if labels is not None else list(range(1, len(a) + 1))
    expo = TruncPoly.zero(trunc)
    for lab, ai in zip(labels, a):
        expo = expo + TruncPoly.var(f"psi_{lab}", trunc) * Fraction(-(ai // delta) ** 2, 2)
    return expo.exp()


def validate_legs(a: Sequence[int], delta: int) -> None:
    if delta < 1:
        raise ConfigurationError("delta must be positive")
    bad = [x for x in a if x % delta]
    if bad:
        raise ConfigurationError(f"delta={delta} does not divide {bad}")
    if sum(a) != 0:
        raise ConfigurationError(f"legs must sum to zero, got {sum(a)}")


def correlated_dr(g: int, a: Sequence[int], delta: int, q: int, k_range: Sequence[Subgroup] | None = None,
                  trunc: int | None = None, d: int = 0, max_edges: int | None = None) -> CorrelatedDRClass:
    validate_legs(a, delta)
    trunc = g if trunc is None else trunc
    amb = TorsionAmbient.for_target(delta, q)
    ks = list(k_range) if k_range is not None else enumerate_subgroups(amb)
    pre = psi_prefactor(a, delta, trunc)
    per_k = []
    for k in ks:
        pp = assemble_DRK(g, len(a), d, delta, q, k, trunc, a=a, max_edges=max_edges)
        parts = [(pre * c.poly).homogeneous_part(g) for c in pp.cones]
        per_k.append((k, pp, parts))
    return CorrelatedDRClass(g, tuple(a), delta, q, trunc, pre, per_k)
