"""Monodromy graphs ``(Gamma, Ktilde, phi)``.

``Ktilde`` is a subgroup of ``Z_delta^{2q}``; ``phi`` pairs it with
``H_1(Gamma, Z_delta)``.  It is stored as one row per normal-form generator of
``Ktilde`` and one column per fundamental cycle of ``Gamma``.  The left
kernel of ``phi`` is the core, the right kernel ``T`` constrains the divisor
classes of the correlator-0 cones.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

from .abelian import Subgroup, TorsionAmbient, enumerate_subgroups
from .graphs import (Graph, _orderings, _vertex_classes, contract_edge_map,
                     cycle_basis, enumerate_graphs, incidence_divergence)
from .tropical import DivisorClass, cycle_to_class


class IllDefinedPairing(ValueError):
    pass


class InvariantViolation(ArithmeticError):
    pass


# --------------------------------------------------------------------------
# graph isomorphisms with their action on edges


@dataclass(frozen=True)
class EdgeMap:
    """A graph isomorphism seen on edges: ``e -> (target[e], sign[e])``."""

    vertex: tuple[int, ...]
    target: tuple[int, ...]
    sign: tuple[int, ...]

    def push_cycle(self, cycle: Sequence[int], n_edges: int) -> list[int]:
        out = [0] * n_edges
        for e, x in enumerate(cycle):
            out[self.target[e]] += self.sign[e] * x
        return out


def isomorphisms(g1: Graph, g2: Graph) -> Iterator[EdgeMap]:
    """All isomorphisms ``g1 -> g2`` (vertex, half-edge level), leg labels fixed."""
    if (g1.n_vertices, g1.n_edges, g1.leg_labels) != (g2.n_vertices, g2.n_edges, g2.leg_labels):
        return
    c1, c2 = _vertex_classes(g1), _vertex_classes(g2)
    if [len(c) for c in c1] != [len(c) for c in c2]:
        return
    flat1 = [v for c in c1 for v in c]
    legs2 = {lab: v for v, lab in g2.legs}
    for order in _orderings(c2):
        vmap = dict(zip(flat1, order))
        if any(g1.vertices[v] != g2.vertices[vmap[v]] for v in vmap):
            continue
        if any(vmap[v] != legs2[lab] for v, lab in g1.legs):
            continue
        # group edges by their unordered endpoint pair
        groups1: dict[tuple[int, int], list[int]] = {}
        for e, (a, b) in enumerate(g1.edges):
            groups1.setdefault(tuple(sorted((vmap[a], vmap[b]))), []).append(e)
        groups2: dict[tuple[int, int], list[int]] = {}
        for e, (a, b) in enumerate(g2.edges):
            groups2.setdefault(tuple(sorted((a, b))), []).append(e)
        if {k: len(v) for k, v in groups1.items()} != {k: len(v) for k, v in groups2.items()}:
            continue
        keys = sorted(groups1)
        choices = []
        for k in keys:
            src, dst = groups1[k], groups2[k]
            opts = []
            for perm in itertools.permutations(dst):
                if k[0] == k[1]:
                    for flips in itertools.product((1, -1), repeat=len(src)):
                        opts.append(list(zip(src, perm, flips)))
                else:
                    row = []
                    for e, f in zip(src, perm):
                        a, _ = g1.edges[e]
                        s = 1 if vmap[a] == g2.edges[f][0] else -1
                        row.append((e, f, s))
                    opts.append(row)
            choices.append(opts)
        for combo in itertools.product(*choices):
            target = [0] * g1.n_edges
            sign = [0] * g1.n_edges
            for part in combo:
                for e, f, s in part:
                    target[e] = f
                    sign[e] = s
            yield EdgeMap(tuple(vmap[v] for v in range(g1.n_vertices)), tuple(target), tuple(sign))


def h1_action(g1: Graph, g2: Graph, iso: EdgeMap, delta: int) -> list[list[int]]:
    """Matrix of the induced map on ``H_1(-, Z_delta)`` in cycle-basis coordinates.

    Column ``j`` is the image of the ``j``-th fundamental cycle of ``g1``.
    """
    cols = []
    for gamma in cycle_basis(g1):
        img = iso.push_cycle(gamma, g2.n_edges)
        cols.append(list(cycle_to_class(g2, delta, img)))
    return [list(r) for r in zip(*cols)] if cols else []


# --------------------------------------------------------------------------
# monodromy graphs


@dataclass(frozen=True)
class MonodromyGraph:
    graph: Graph
    delta: int
    q: int
    ktilde: Subgroup
    phi: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.ktilde.ambient != TorsionAmbient.for_target(self.delta, self.q):
            raise ValueError("Ktilde lives in the wrong ambient")
        phi = tuple(tuple(x % self.delta for x in row) for row in self.phi)
        object.__setattr__(self, "phi", phi)
        if len(phi) != len(self.ktilde.rows):
            raise IllDefinedPairing("phi needs one row per generator of Ktilde")
        for row in phi:
            if len(row) != self.graph.b1:
                raise IllDefinedPairing(f"phi rows need {self.graph.b1} entries")
        _ = self.phi_map  # raises if ill-defined

    @property
    def ambient(self) -> TorsionAmbient:
        return self.ktilde.ambient

    @property
    def b1(self) -> int:
        return self.graph.b1

    @cached_property
    def phi_map(self) -> dict[tuple[int, ...], tuple[int, ...]]:
        """``L -> (phi(L, gamma_j))_j`` for every element ``L`` of Ktilde."""
        delta, b1 = self.delta, self.b1
        zero = tuple([0] * self.ambient.rank)
        table = {zero: tuple([0] * b1)}
        for gen, val in zip(self.ktilde.rows, self.phi):
            new = dict(table)
            for elem, v in table.items():
                for c in range(1, delta):
                    e2 = tuple((x + c * y) % delta for x, y in zip(elem, gen))
                    v2 = tuple((x + c * y) % delta for x, y in zip(v, val))
                    if e2 in new and new[e2] != v2:
                        raise IllDefinedPairing("phi does not respect the relations of Ktilde")
                    new[e2] = v2
            table = new
        return table

    def pair(self, elem: Sequence[int], cycle: Sequence[int]) -> int:
        """``phi(L, gamma)`` for a cycle given as an edge vector."""
        coords = cycle_to_class(self.graph, self.delta, cycle)
        vals = self.phi_map[self.ambient.reduce(elem)]
        return sum(c * v for c, v in zip(coords, vals)) % self.delta

    def to_json(self) -> dict:
        return {
            "graph": self.graph.to_json(),
            "delta": self.delta,
            "q": self.q,
            "Ktilde": self.ktilde.to_json(),
            "phi": [list(r) for r in self.phi],
        }

    @classmethod
    def from_json(cls, data: dict) -> "MonodromyGraph":
        amb = TorsionAmbient.for_target(data["delta"], data["q"])
        k = Subgroup(amb, tuple(tuple(r) for r in data["Ktilde"]))
        if Subgroup.generated(amb, k.rows) != k:
            raise ValueError("Ktilde rows are not in normal form")
        return cls(Graph.from_json(data["graph"]), data["delta"], data["q"], k,
                   tuple(tuple(r) for r in data["phi"]))


def core(mg: MonodromyGraph) -> Subgroup:
    zero = tuple([0] * mg.b1)
    return Subgroup.generated(mg.ambient, [e for e, v in mg.phi_map.items() if v == zero])


def right_kernel(mg: MonodromyGraph) -> Subgroup:
    """``T = {gamma : phi(L, gamma) = 0 for all L}`` inside ``Z_delta^{b1}``."""
    amb = TorsionAmbient(mg.delta, mg.b1)
    elems = [g for g in amb.elements()
             if all(sum(x * y for x, y in zip(row, g)) % mg.delta == 0 for row in mg.phi)]
    return Subgroup.generated(amb, elems)


def _lift_cycle(old: Graph, e: int, emap: Sequence[int | None], cycle_new: Sequence[int]) -> list[int]:
    """Lift a cycle of ``old / e`` to a cycle of ``old``."""
    z = [0] * old.n_edges
    for o, nw in enumerate(emap):
        if nw is not None:
            z[o] = cycle_new[nw]
    a, b = old.edges[e]
    if a != b:
        div = incidence_divergence(old, z)
        z[e] = -div[a]
    return z


def contract(mg: MonodromyGraph, e: int) -> MonodromyGraph:
    """Contract edge ``e``; a loop shrinks Ktilde to the loop's annihilator."""
    old = mg.graph
    new, emap, _ = contract_edge_map(old, e)
    if old.is_loop(e):
        unit = [0] * old.n_edges
        unit[e] = 1
        kt = Subgroup.generated(mg.ambient, [x for x in mg.ktilde.element_set if mg.pair(x, unit) == 0])
    else:
        kt = mg.ktilde
    lifts = [_lift_cycle(old, e, emap, gamma) for gamma in cycle_basis(new)]
    phi = tuple(tuple(mg.pair(r, z) for z in lifts) for r in kt.rows)
    return MonodromyGraph(new, mg.delta, mg.q, kt, phi)


def contract_with_map(mg: MonodromyGraph, e: int) -> tuple[MonodromyGraph, list[int | None]]:
    _, emap, _ = contract_edge_map(mg.graph, e)
    return contract(mg, e), emap


# --------------------------------------------------------------------------
# enumeration


def all_pairings(graph: Graph, ktilde: Subgroup) -> list[tuple[tuple[int, ...], ...]]:
    """Every well-defined ``phi`` on ``Ktilde``, as row tuples."""
    delta = ktilde.delta
    b1 = graph.b1
    rows = ktilde.rows
    out = []
    for flat in itertools.product(range(delta), repeat=b1 * len(rows)):
        phi = tuple(tuple(flat[i * b1:(i + 1) * b1]) for i in range(len(rows)))
        try:
            MonodromyGraph(graph, delta, ktilde.ambient.rank // 2, ktilde, phi)
        except IllDefinedPairing:
            continue
        out.append(phi)
    return out


def transport(mg: MonodromyGraph, iso: EdgeMap, target: Graph) -> MonodromyGraph:
    """Move ``phi`` along an isomorphism ``mg.graph -> target``."""
    inv_target = [0] * mg.graph.n_edges
    inv_sign = [0] * mg.graph.n_edges
    for e, (f, s) in enumerate(zip(iso.target, iso.sign)):
        inv_target[f] = e
        inv_sign[f] = s
    back = EdgeMap((), tuple(inv_target), tuple(inv_sign))
    cols = [back.push_cycle(gamma, mg.graph.n_edges) for gamma in cycle_basis(target)]
    phi = tuple(tuple(mg.pair(r, z) for z in cols) for r in mg.ktilde.rows)
    return MonodromyGraph(target, mg.delta, mg.q, mg.ktilde, phi)


def is_realizable(graph: Graph, delta: int, q: int, ktilde: Subgroup) -> bool:
    """The root count ``delta^{2g - b1 - 2q} |Ktilde|`` of the stratum is a positive integer.

    Strata failing this are empty; the condition is stable under contraction.
    """
    val = Fraction(delta) ** (2 * graph.genus - graph.b1 - 2 * q) * ktilde.order
    return val.denominator == 1 and val >= 1


def monodromy_graphs_on(graph: Graph, delta: int, q: int, k: Subgroup | None = None,
                        orbits: bool = True, realizable: bool = True) -> list[MonodromyGraph]:
    """All ``(Ktilde, phi)`` on a fixed graph, optionally with a fixed core.

    With ``orbits`` one representative per ``Aut(graph)``-orbit is kept; with
    ``realizable`` empty strata (see :func:`is_realizable`) are dropped.
    """
    amb = TorsionAmbient.for_target(delta, q)
    autos = list(isomorphisms(graph, graph)) if orbits else []
    out = []
    for kt in enumerate_subgroups(amb):
        if k is not None and not k.issubgroup(kt):
            continue
        if realizable and not is_realizable(graph, delta, q, kt):
            continue
        seen: set = set()
        for phi in all_pairings(graph, kt):
            mg = MonodromyGraph(graph, delta, q, kt, phi)
            if k is not None and core(mg) != k:
                continue
            if orbits:
                if phi in seen:
                    continue
                for iso in autos:
                    seen.add(transport(mg, iso, graph).phi)
            out.append(mg)
    return out


def enumerate_strata(g: int, n: int, d: int, delta: int, q: int, k: Subgroup | None = None,
                     labels: Sequence[int] | None = None, max_edges: int | None = None,
                     orbits: bool = True, cap: int = 20000, realizable: bool = True) -> list[MonodromyGraph]:
    """Monodromy graphs with core ``k`` over all stable graphs of ``(g, n, d)``."""
    graphs = enumerate_graphs(g, n, d, labels=labels, max_edges=max_edges)
    if len(graphs) > cap:
        from .abelian import ResourceCapExceeded
        raise ResourceCapExceeded(f"{len(graphs)} graphs exceed cap {cap}")
    out = []
    for gr in graphs:
        out.extend(monodromy_graphs_on(gr, delta, q, k, orbits, realizable))
    return out


def find_isomorphic(mg: MonodromyGraph, fan: Sequence[MonodromyGraph]) -> tuple[int, EdgeMap] | None:
    """Index of a fan member isomorphic to ``mg`` and an isomorphism into it."""
    for i, other in enumerate(fan):
        if other.ktilde != mg.ktilde or other.graph.canonical != mg.graph.canonical:
            continue
        for iso in isomorphisms(mg.graph, other.graph):
            if transport(mg, iso, other.graph).phi == other.phi:
                return i, iso
    return None


# --------------------------------------------------------------------------
# counting


@dataclass(frozen=True)
class StratumDegrees:
    spin_all: int
    spin_corr0: int


def stratum_degrees(mg: MonodromyGraph) -> StratumDegrees:
    g = mg.graph.genus
    delta = mg.delta
    spin_all = Fraction(delta) ** (2 * g - mg.b1)
    corr0 = Fraction(delta) ** (2 * g - mg.b1 - 2 * mg.q) * mg.ktilde.order
    for name, val in (("spin_all", spin_all), ("spin_corr0", corr0)):
        if val.denominator != 1 or val <= 0:
            raise InvariantViolation(f"{name} = {val} is not a positive integer")
    return StratumDegrees(int(spin_all), int(corr0))


def kernel_identity_holds(mg: MonodromyGraph) -> bool:
    """``|T| * |Ktilde / K| = delta^{b1}``."""
    return right_kernel(mg).order * mg.ktilde.order == mg.delta ** mg.b1 * core(mg).order


@dataclass(frozen=True)
class Corr0Cone:
    base: MonodromyGraph
    divisor_class: DivisorClass


def enumerate_corr0_cones(mg: MonodromyGraph) -> list[Corr0Cone]:
    return [Corr0Cone(mg, DivisorClass(mg.graph, mg.delta, v)) for v in right_kernel(mg).elements()]


def labeled_count(graph: Graph, delta: int, q: int, k: Subgroup | None = None,
                  realizable: bool = True) -> int:
    return len(monodromy_graphs_on(graph, delta, q, k, orbits=False, realizable=realizable))
