"""Stable graphs with genus and degree decorations.

A graph stores its vertices as ``(genus, degree)`` pairs, its edges as
``(tail, head)`` vertex pairs (loops allowed) and its legs as
``(vertex, label)`` pairs.  Edge ``i`` owns the half-edges ``2i`` (tail) and
``2i + 1`` (head); leg half-edges come after all edge half-edges.  Legs are
labelled and automorphisms never move them.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Sequence


class GraphError(ValueError):
    """Invalid graph data or an operation outside its domain."""


@dataclass(frozen=True)
class Graph:
    vertices: tuple[tuple[int, int], ...]
    edges: tuple[tuple[int, int], ...] = ()
    legs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple((int(g), int(d)) for g, d in self.vertices))
        object.__setattr__(self, "edges", tuple((int(a), int(b)) for a, b in self.edges))
        object.__setattr__(self, "legs", tuple((int(v), int(lab)) for v, lab in self.legs))
        nv = len(self.vertices)
        if nv == 0:
            raise GraphError("a graph needs at least one vertex")
        for g, d in self.vertices:
            if g < 0 or d < 0:
                raise GraphError("genus and degree must be non-negative")
        for a, b in self.edges:
            if not (0 <= a < nv and 0 <= b < nv):
                raise GraphError(f"edge ({a},{b}) uses an unknown vertex")
        labels = [lab for _, lab in self.legs]
        if len(set(labels)) != len(labels):
            raise GraphError("leg labels must be distinct")
        for v, _ in self.legs:
            if not 0 <= v < nv:
                raise GraphError(f"leg on unknown vertex {v}")

    # basic counts
    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def b1(self) -> int:
        return self.n_edges - self.n_vertices + 1

    @property
    def genus(self) -> int:
        return sum(g for g, _ in self.vertices) + self.b1

    @property
    def degree(self) -> int:
        return sum(d for _, d in self.vertices)

    @property
    def leg_labels(self) -> tuple[int, ...]:
        return tuple(sorted(lab for _, lab in self.legs))

    def leg_vertex(self, label: int) -> int:
        for v, lab in self.legs:
            if lab == label:
                return v
        raise GraphError(f"no leg labelled {label}")

    def valence(self, v: int) -> int:
        n = sum(1 for w, _ in self.legs if w == v)
        for a, b in self.edges:
            n += (a == v) + (b == v)
        return n

    def loops(self) -> list[int]:
        return [i for i, (a, b) in enumerate(self.edges) if a == b]

    def is_loop(self, e: int) -> bool:
        a, b = self.edges[e]
        return a == b

    def half_edges_at(self, v: int) -> list[int]:
        out = []
        for i, (a, b) in enumerate(self.edges):
            if a == v:
                out.append(2 * i)
            if b == v:
                out.append(2 * i + 1)
        base = 2 * self.n_edges
        out.extend(base + j for j, (w, _) in enumerate(self.legs) if w == v)
        return out

    def is_connected(self) -> bool:
        adj: list[set[int]] = [set() for _ in self.vertices]
        for a, b in self.edges:
            adj[a].add(b)
            adj[b].add(a)
        seen = {0}
        todo = [0]
        while todo:
            v = todo.pop()
            for w in adj[v] - seen:
                seen.add(w)
                todo.append(w)
        return len(seen) == self.n_vertices

    def is_stable(self) -> bool:
        return all(d > 0 or 2 * g - 2 + self.valence(v) > 0
                   for v, (g, d) in enumerate(self.vertices))

    def validate(self) -> None:
        if not self.is_connected():
            raise GraphError("graph is not connected")
        if not self.is_stable():
            raise GraphError("graph is not stable")

    def is_bridge(self, e: int) -> bool:
        a, b = self.edges[e]
        if a == b:
            return False
        rest = Graph(self.vertices, self.edges[:e] + self.edges[e + 1:], ())
        return not rest.is_connected()

    # serialization
    def to_json(self) -> dict:
        return {
            "vertices": [{"genus": g, "degree": d} for g, d in self.vertices],
            "edges": [[a, b] for a, b in self.edges],
            "legs": [{"vertex": v, "label": lab} for v, lab in sorted(self.legs, key=lambda t: t[1])],
        }

    @classmethod
    def from_json(cls, data: dict | str) -> "Graph":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(
            tuple((v["genus"], v.get("degree", 0)) for v in data["vertices"]),
            tuple(tuple(e) for e in data.get("edges", [])),
            tuple((leg["vertex"], leg["label"]) for leg in data.get("legs", [])),
        )

    @cached_property
    def canonical(self) -> "Graph":
        return canonical_form(self)

    def isomorphic(self, other: "Graph") -> bool:
        return self.canonical == other.canonical


# --------------------------------------------------------------------------
# canonical form and automorphisms


def _vertex_invariant(gr: Graph, v: int) -> tuple:
    g, d = gr.vertices[v]
    labels = tuple(sorted(lab for w, lab in gr.legs if w == v))
    loops = sum(1 for a, b in gr.edges if a == b == v)
    return (g, d, labels, gr.valence(v), loops)


def _vertex_classes(gr: Graph) -> list[list[int]]:
    inv = [_vertex_invariant(gr, v) for v in range(gr.n_vertices)]
    classes: dict[tuple, list[int]] = {}
    for v in sorted(range(gr.n_vertices), key=lambda v: inv[v]):
        classes.setdefault(inv[v], []).append(v)
    return [classes[k] for k in sorted(classes)]


def _orderings(classes: list[list[int]]) -> Iterator[tuple[int, ...]]:
    for parts in itertools.product(*(itertools.permutations(c) for c in classes)):
        yield tuple(v for part in parts for v in part)


def _relabel(gr: Graph, order: Sequence[int]) -> Graph:
    pos = {v: i for i, v in enumerate(order)}
    verts = tuple(gr.vertices[v] for v in order)
    edges = tuple(sorted(tuple(sorted((pos[a], pos[b]))) for a, b in gr.edges))
    legs = tuple(sorted(((pos[v], lab) for v, lab in gr.legs), key=lambda t: t[1]))
    return Graph(verts, edges, legs)


def _key(gr: Graph) -> tuple:
    return (gr.vertices, gr.edges, gr.legs)


def canonical_form(gr: Graph) -> Graph:
    """Minimal relabelling over vertex orders compatible with local invariants."""
    best = None
    for order in _orderings(_vertex_classes(gr)):
        cand = _relabel(gr, order)
        if best is None or _key(cand) < _key(best):
            best = cand
    return best


def _vertex_automorphisms(gr: Graph) -> list[tuple[int, ...]]:
    mult = Counter(tuple(sorted(e)) for e in gr.edges)
    legs = sorted(gr.legs, key=lambda t: t[1])
    out = []
    for order in _orderings(_vertex_classes(gr)):
        # order lists images in class order; build the permutation v -> image
        flat = [v for c in _vertex_classes(gr) for v in c]
        perm = dict(zip(flat, order))
        if any(gr.vertices[v] != gr.vertices[perm[v]] for v in perm):
            continue
        if any(perm[v] != v for v, _ in legs):
            continue
        if Counter(tuple(sorted((perm[a], perm[b]))) for a, b in mult.elements()) != mult:
            continue
        out.append(tuple(perm[v] for v in range(gr.n_vertices)))
    return out


def automorphism_count(gr: Graph) -> int:
    """Order of the automorphism group acting on vertices and half-edges."""
    mult = Counter(tuple(sorted(e)) for e in gr.edges)
    per_vertex_map = 1
    for (a, b), m in mult.items():
        per_vertex_map *= math.factorial(m) * (2 ** m if a == b else 1)
    return len(_vertex_automorphisms(gr)) * per_vertex_map


def loop_automorphism_count(gr: Graph) -> int:
    """Automorphisms fixing every vertex and every edge: only loops may flip."""
    return 2 ** len(gr.loops())


def brute_force_automorphisms(gr: Graph) -> int:
    """Count automorphisms by searching all vertex and half-edge bijections."""
    nh = 2 * gr.n_edges
    count = 0
    for vperm in itertools.permutations(range(gr.n_vertices)):
        if any(gr.vertices[v] != gr.vertices[vperm[v]] for v in range(gr.n_vertices)):
            continue
        if any(vperm[v] != v for v, _ in gr.legs):
            continue
        for hperm in itertools.permutations(range(nh)):
            ok = True
            for h in range(nh):
                e, side = divmod(h, 2)
                if vperm[gr.edges[e][side]] != gr.edges[hperm[h] // 2][hperm[h] % 2]:
                    ok = False
                    break
                # involution must commute with the permutation
                if hperm[h ^ 1] != hperm[h] ^ 1:
                    ok = False
                    break
            if ok:
                count += 1
    return count


# --------------------------------------------------------------------------
# contraction


def contract_edge_map(gr: Graph, e: int) -> tuple[Graph, list[int | None], list[int]]:
    """Contract edge ``e``; also return the edge map and the vertex map."""
    if not 0 <= e < gr.n_edges:
        raise GraphError(f"{e} is not an edge index")
    a, b = gr.edges[e]
    if a == b:
        verts = list(gr.vertices)
        g, d = verts[a]
        verts[a] = (g + 1, d)
        vmap = list(range(gr.n_vertices))
    else:
        keep, drop = min(a, b), max(a, b)
        vmap = []
        for v in range(gr.n_vertices):
            if v == drop:
                vmap.append(keep)
            else:
                vmap.append(v - (v > drop))
        verts = [None] * (gr.n_vertices - 1)
        for v, (g, d) in enumerate(gr.vertices):
            w = vmap[v]
            if verts[w] is None:
                verts[w] = (g, d)
            else:
                verts[w] = (verts[w][0] + g, verts[w][1] + d)
    emap: list[int | None] = []
    edges = []
    for i, (x, y) in enumerate(gr.edges):
        if i == e:
            emap.append(None)
            continue
        emap.append(len(edges))
        edges.append((vmap[x], vmap[y]))
    legs = tuple((vmap[v], lab) for v, lab in gr.legs)
    return Graph(tuple(verts), tuple(edges), legs), emap, vmap


def contract_edge(gr: Graph, e: int) -> Graph:
    """Contract edge ``e``: merge its ends, or raise the genus for a loop."""
    return contract_edge_map(gr, e)[0]


# --------------------------------------------------------------------------
# enumeration


def _splits(gr: Graph) -> Iterator[Graph]:
    """All graphs with one more edge that contract back to ``gr``."""
    for v, (g, d) in enumerate(gr.vertices):
        # new loop
        if g >= 1:
            verts = list(gr.vertices)
            verts[v] = (g - 1, d)
            yield Graph(tuple(verts), gr.edges + ((v, v),), gr.legs)
        # split v into v and a new vertex joined by an edge
        hs = gr.half_edges_at(v)
        new = gr.n_vertices
        for mask in range(2 ** len(hs)):
            moved = {hs[i] for i in range(len(hs)) if mask >> i & 1}
            for g1 in range(g + 1):
                for d1 in range(d + 1):
                    verts = list(gr.vertices) + [(g - g1, d - d1)]
                    verts[v] = (g1, d1)
                    edges = []
                    for i, (x, y) in enumerate(gr.edges):
                        x2 = new if 2 * i in moved else x
                        y2 = new if 2 * i + 1 in moved else y
                        edges.append((x2, y2))
                    base = 2 * gr.n_edges
                    legs = tuple((new if base + j in moved else w, lab)
                                 for j, (w, lab) in enumerate(gr.legs))
                    cand = Graph(tuple(verts), tuple(edges) + ((v, new),), legs)
                    if cand.is_stable():
                        yield cand


def enumerate_graphs(g: int, n: int, d: int, labels: Sequence[int] | None = None,
                     max_edges: int | None = None) -> list[Graph]:
    """One stable graph per isomorphism class of signature ``(g, n, d)``.

    ``labels`` defaults to ``1..n``.  ``max_edges`` caps the number of edges
    (codimension of the stratum).  Output is sorted by edge count, then by the
    canonical key.
    """
    if g < 0 or n < 0 or d < 0:
        raise GraphError("g, n, d must be non-negative")
    if labels is None:
        labels = list(range(1, n + 1))
    if len(labels) != n:
        raise GraphError("need exactly n labels")
    smooth = Graph(((g, d),), (), tuple((0, lab) for lab in labels))
    if not smooth.is_stable():
        raise GraphError(f"unstable signature (g={g}, n={n}, d={d})")
    level = {smooth.canonical}
    out = list(level)
    e = 0
    while level and (max_edges is None or e < max_edges):
        nxt = set()
        for gr in level:
            for cand in _splits(gr):
                nxt.add(cand.canonical)
        level = nxt
        out.extend(sorted(level, key=_key))
        e += 1
    return out


# --------------------------------------------------------------------------
# cycles


def spanning_tree(gr: Graph) -> list[int]:
    """Edges of the BFS spanning tree from vertex 0, scanning edges by index."""
    seen = {0}
    tree = []
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for i, (a, b) in enumerate(gr.edges):
            if a == b:
                continue
            if a == v and b not in seen:
                seen.add(b)
                tree.append(i)
                queue.append(b)
            elif b == v and a not in seen:
                seen.add(a)
                tree.append(i)
                queue.append(a)
    return sorted(tree)


def non_tree_edges(gr: Graph) -> list[int]:
    tree = set(spanning_tree(gr))
    return [i for i in range(gr.n_edges) if i not in tree]


def _tree_path(gr: Graph, tree: list[int], src: int, dst: int) -> dict[int, int]:
    """Signed edge vector of the tree path from ``src`` to ``dst``."""
    adj: dict[int, list[tuple[int, int, int]]] = {v: [] for v in range(gr.n_vertices)}
    for i in tree:
        a, b = gr.edges[i]
        adj[a].append((b, i, 1))
        adj[b].append((a, i, -1))
    prev: dict[int, tuple[int, int, int] | None] = {src: None}
    todo = deque([src])
    while todo:
        v = todo.popleft()
        for w, i, s in adj[v]:
            if w not in prev:
                prev[w] = (v, i, s)
                todo.append(w)
    path: dict[int, int] = {}
    v = dst
    while prev[v] is not None:
        u, i, s = prev[v]
        path[i] = path.get(i, 0) + s
        v = u
    return path


def cycle_basis(gr: Graph) -> list[list[int]]:
    """Fundamental cycles of the non-tree edges as signed edge vectors.

    The cycle of a non-tree edge ``f = (a, b)`` runs along ``f`` from ``a``
    to ``b`` and returns to ``a`` through the spanning tree.
    """
    tree = spanning_tree(gr)
    out = []
    for f in non_tree_edges(gr):
        vec = [0] * gr.n_edges
        vec[f] = 1
        a, b = gr.edges[f]
        if a != b:
            for i, s in _tree_path(gr, tree, b, a).items():
                vec[i] += s
        out.append(vec)
    return out


def incidence_divergence(gr: Graph, flow: Sequence[int]) -> list[int]:
    """Net outflow at each vertex of an edge flow oriented tail to head."""
    div = [0] * gr.n_vertices
    for (a, b), f in zip(gr.edges, flow):
        div[a] += f
        div[b] -= f
    return div


# --------------------------------------------------------------------------
# subdivision


@dataclass(frozen=True)
class SubdividedGraph:
    """Each base edge cut into ``delta`` segments.

    Interior vertices of base edge ``e = (a, b)`` are numbered
    ``V + e*(delta-1) + j`` for ``j = 0..delta-2``, ordered from ``a`` to ``b``.
    Segment ``e*delta + i`` joins the ``i``-th and ``(i+1)``-th points of that
    chain and has length ``l_e / delta``.
    """

    base: Graph
    delta: int
    edges: tuple[tuple[int, int], ...] = field(init=False)
    origin: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if self.delta < 1:
            raise GraphError("delta must be positive")
        edges = []
        origin = []
        for e in range(self.base.n_edges):
            chain = self.chain(e)
            for i in range(self.delta):
                edges.append((chain[i], chain[i + 1]))
                origin.append(e)
        object.__setattr__(self, "edges", tuple(edges))
        object.__setattr__(self, "origin", tuple(origin))

    @property
    def n_vertices(self) -> int:
        return self.base.n_vertices + (self.delta - 1) * self.base.n_edges

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def b1(self) -> int:
        return self.n_edges - self.n_vertices + 1

    def interior(self, e: int, j: int) -> int:
        """Vertex index of the ``j``-th interior point (1-based) on base edge ``e``."""
        if not 1 <= j <= self.delta - 1:
            raise GraphError(f"interior index {j} out of range")
        return self.base.n_vertices + e * (self.delta - 1) + (j - 1)

    def chain(self, e: int) -> list[int]:
        a, b = self.base.edges[e]
        return [a] + [self.interior(e, j) for j in range(1, self.delta)] + [b]

    def is_original(self, v: int) -> bool:
        return v < self.base.n_vertices

    def locate(self, v: int) -> tuple[int, int] | None:
        """``(base edge, interior index)`` of a new vertex, ``None`` for originals."""
        if self.is_original(v):
            return None
        k = v - self.base.n_vertices
        return k // (self.delta - 1), k % (self.delta - 1) + 1

    def as_graph(self) -> Graph:
        verts = tuple(self.base.vertices) + ((0, 0),) * ((self.delta - 1) * self.base.n_edges)
        return Graph(verts, self.edges, self.base.legs)


def subdivide(gr: Graph, delta: int) -> SubdividedGraph:
    return SubdividedGraph(gr, delta)


def graph_from_edges(vertices: Iterable[tuple[int, int]], edges: Iterable[tuple[int, int]] = (),
                     legs: Iterable[tuple[int, int]] = ()) -> Graph:
    return Graph(tuple(vertices), tuple(edges), tuple(legs))
