"""delta-torsion tropical divisors on subdivided graphs.

Edge lengths are formal symbols ``l_e``; a segment of the ``delta``-subdivided
graph has length ``l_e / delta``.  A PL function is given by its integer
slope on each segment (measured from the tail of the base edge toward its
head) and its values are linear forms in the ``l_e``.

Sign convention: ``div(alpha)(v) = -(sum of outgoing slopes at v)``, so that a
local maximum of ``alpha`` carries positive degree.  With this convention the
class-``k`` divisor on a loop of length ``l`` at ``delta = 2`` is
``mid - base`` and its ``alpha`` equals ``l/2`` at the midpoint.

Classes live in ``H_1(Gamma, Z_delta)``.  A delta-torsion divisor ``D`` has
``delta*D = div(alpha)`` with all slopes along one base edge congruent mod
``delta``; the negated common residue, over all edges, is a mod-``delta``
cycle.  Its values on the non-tree edges are the class vector.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .graphs import Graph, SubdividedGraph, contract_edge_map, cycle_basis, non_tree_edges, subdivide


class TorsionError(ValueError):
    """The divisor is not delta-torsion (or not a preferred representative)."""


class NoRoomError(ValueError):
    """A nonzero divisor on a graph without edges cannot be moved."""


LinearForm = dict[int, Fraction]  # base edge -> coefficient of l_e


@dataclass(frozen=True)
class TropicalDivisor:
    sub: SubdividedGraph
    values: tuple[tuple[int, int], ...] = ()

    @classmethod
    def from_map(cls, sub: SubdividedGraph, values: Mapping[int, int]) -> "TropicalDivisor":
        for v in values:
            if not 0 <= v < sub.n_vertices:
                raise ValueError(f"vertex {v} not in subdivided graph")
        return cls(sub, tuple(sorted((v, int(c)) for v, c in values.items() if c)))

    def as_dict(self) -> dict[int, int]:
        return dict(self.values)

    def __getitem__(self, v: int) -> int:
        return self.as_dict().get(v, 0)

    @property
    def total_degree(self) -> int:
        return sum(c for _, c in self.values)

    def __add__(self, other: "TropicalDivisor") -> "TropicalDivisor":
        out = self.as_dict()
        for v, c in other.values:
            out[v] = out.get(v, 0) + c
        return TropicalDivisor.from_map(self.sub, out)

    def __neg__(self) -> "TropicalDivisor":
        return TropicalDivisor(self.sub, tuple((v, -c) for v, c in self.values))

    def __sub__(self, other: "TropicalDivisor") -> "TropicalDivisor":
        return self + (-other)

    def scale(self, k: int) -> "TropicalDivisor":
        return TropicalDivisor.from_map(self.sub, {v: k * c for v, c in self.values})

    def support(self) -> set[int]:
        return {v for v, _ in self.values}

    def key(self, v: int) -> str:
        loc = self.sub.locate(v)
        return f"v{v}" if loc is None else f"e{loc[0]}.{loc[1]}"

    def to_json(self) -> dict[str, int]:
        return {self.key(v): c for v, c in self.values}

    @classmethod
    def from_json(cls, sub: SubdividedGraph, data: Mapping[str, int] | str) -> "TropicalDivisor":
        if isinstance(data, str):
            data = json.loads(data)
        out = {}
        for k, c in data.items():
            if k.startswith("v"):
                out[int(k[1:])] = c
            else:
                e, j = k[1:].split(".")
                out[sub.interior(int(e), int(j))] = c
        return cls.from_map(sub, out)


@dataclass(frozen=True)
class PLFunction:
    sub: SubdividedGraph
    slopes: tuple[int, ...]
    values: tuple[LinearForm, ...] = field(compare=False)

    def divisor(self) -> TropicalDivisor:
        """``div(alpha)`` with the global sign convention."""
        deg = [0] * self.sub.n_vertices
        for (x, y), s in zip(self.sub.edges, self.slopes):
            deg[x] -= s
            deg[y] += s
        return TropicalDivisor.from_map(self.sub, dict(enumerate(deg)))

    def value(self, v: int) -> LinearForm:
        return dict(self.values[v])

    def vanishes_on_original(self) -> bool:
        return all(not self.values[v] for v in range(self.sub.base.n_vertices))


def _values_from_slopes(sub: SubdividedGraph, slopes: Sequence[int]) -> tuple[LinearForm, ...] | None:
    """Integrate slopes from vertex 0; ``None`` if they do not close up."""
    vals: list[LinearForm | None] = [None] * sub.n_vertices
    vals[0] = {}
    adj: dict[int, list[tuple[int, int, int]]] = {v: [] for v in range(sub.n_vertices)}
    for j, (x, y) in enumerate(sub.edges):
        adj[x].append((y, j, 1))
        adj[y].append((x, j, -1))
    todo = [0]
    while todo:
        v = todo.pop()
        for w, j, sign in adj[v]:
            e = sub.origin[j]
            step = dict(vals[v])
            step[e] = step.get(e, Fraction(0)) + Fraction(sign * slopes[j], sub.delta)
            step = {k: c for k, c in step.items() if c}
            if vals[w] is None:
                vals[w] = step
                todo.append(w)
            elif vals[w] != step:
                return None
    return tuple(vals)  # type: ignore[arg-type]


def _solve_linear(rows: list[list[Fraction]], rhs: list[Fraction], nvars: int) -> list[Fraction] | None:
    """Solve a (possibly overdetermined) system exactly; ``None`` if inconsistent."""
    m = [r[:] + [b] for r, b in zip(rows, rhs)]
    piv_cols = []
    r = 0
    for c in range(nvars):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        piv_cols.append(c)
        r += 1
    for i in range(r, len(m)):
        if m[i][-1] != 0:
            return None
    sol = [Fraction(0)] * nvars
    for i, c in enumerate(piv_cols):
        sol[c] = m[i][-1]
    return sol


def _solve_slopes(sub: SubdividedGraph, target: Mapping[int, int], closed_everywhere: bool) -> list[int] | None:
    """Integer slopes with ``div = target``; ``None`` if impossible.

    Non-bridge base edges must have slopes summing to zero (closure around
    cycles with independent symbolic lengths).  With ``closed_everywhere``
    bridges must as well, which is the normalization ``alpha = 0`` on all
    original vertices.
    """
    base, delta = sub.base, sub.delta
    if sum(target.values()) != 0:
        return None
    offsets: dict[int, list[int]] = {}
    sigma: dict[int, Fraction] = {}
    free: list[int] = []
    for e in range(base.n_edges):
        chain = sub.chain(e)
        off = [0]
        for i in range(1, delta):
            off.append(off[-1] - target.get(chain[i], 0))
        offsets[e] = off
        if closed_everywhere or not base.is_bridge(e):
            total = -sum(off)
            if total % delta:
                return None
            sigma[e] = Fraction(total, delta)
        else:
            free.append(e)
    idx = {e: i for i, e in enumerate(free)}
    rows, rhs = [], []
    for v in range(base.n_vertices):
        row = [Fraction(0)] * len(free)
        const = Fraction(0)
        # -(sum outgoing) = target(v)
        for e, (a, b) in enumerate(base.edges):
            first = offsets[e][0]
            last = offsets[e][-1]
            if a == v:
                if e in idx:
                    row[idx[e]] -= 1
                    const -= first
                else:
                    const -= sigma[e] + first
            if b == v:
                if e in idx:
                    row[idx[e]] += 1
                    const += last
                else:
                    const += sigma[e] + last
        rows.append(row)
        rhs.append(Fraction(target.get(v, 0)) - const)
    sol = _solve_linear(rows, rhs, len(free)) if free else (
        [] if all(b == 0 for b in rhs) else None)
    if sol is None:
        return None
    for e, i in idx.items():
        sigma[e] = sol[i]
    if any(s.denominator != 1 for s in sigma.values()):
        return None
    slopes = []
    for e in range(base.n_edges):
        slopes.extend(int(sigma[e]) + o for o in offsets[e])
    return slopes


def solve_alpha(d: TropicalDivisor, delta: int | None = None, normalize: bool = True) -> PLFunction:
    """PL function with ``div(alpha) = delta * D``.

    With ``normalize`` the function vanishes on every original vertex, which
    fixes it uniquely; divisors that do not admit this raise ``TorsionError``.
    """
    sub = d.sub
    delta = sub.delta if delta is None else delta
    target = {v: delta * c for v, c in d.values}
    slopes = _solve_slopes(sub, target, normalize)
    if slopes is None:
        if normalize and _solve_slopes(sub, target, False) is not None:
            raise TorsionError("delta*D is principal but alpha cannot vanish on all original vertices")
        raise TorsionError("not delta-torsion")
    vals = _values_from_slopes(sub, slopes)
    if vals is None:  # pragma: no cover - closure is enforced by the solver
        raise TorsionError("slopes do not close up")
    return PLFunction(sub, tuple(slopes), vals)


def is_equivalent(d1: TropicalDivisor, d2: TropicalDivisor) -> bool:
    """``D1 - D2`` is the divisor of an integral-slope PL function."""
    if d1.sub != d2.sub:
        raise ValueError("divisors live on different subdivided graphs")
    diff = (d1 - d2).as_dict()
    return _solve_slopes(d1.sub, diff, False) is not None


# --------------------------------------------------------------------------
# classes


@dataclass(frozen=True)
class DivisorClass:
    graph: Graph
    delta: int
    vector: tuple[int, ...]

    def __post_init__(self):
        if len(self.vector) != self.graph.b1:
            raise ValueError(f"class vector needs {self.graph.b1} entries")
        object.__setattr__(self, "vector", tuple(x % self.delta for x in self.vector))

    def cycle(self) -> list[int]:
        return class_to_cycle(self.graph, self.delta, self.vector)

    def is_zero(self) -> bool:
        return not any(self.vector)


def class_to_cycle(gr: Graph, delta: int, vector: Sequence[int]) -> list[int]:
    """Edge values of ``sum_f vector_f * gamma_f`` mod ``delta``."""
    out = [0] * gr.n_edges
    for k, gamma in zip(vector, cycle_basis(gr)):
        for e, s in enumerate(gamma):
            out[e] += k * s
    return [x % delta for x in out]


def cycle_to_class(gr: Graph, delta: int, cycle: Sequence[int]) -> tuple[int, ...]:
    return tuple(cycle[f] % delta for f in non_tree_edges(gr))


def classify(d: TropicalDivisor) -> DivisorClass:
    sub = d.sub
    delta = sub.delta
    target = {v: delta * c for v, c in d.values}
    slopes = _solve_slopes(sub, target, False)
    if slopes is None:
        raise TorsionError("not delta-torsion")
    cycle = [(-slopes[e * delta]) % delta for e in range(sub.base.n_edges)]
    return DivisorClass(sub.base, delta, cycle_to_class(sub.base, delta, cycle))


def bump_slopes(k: int, delta: int) -> list[int]:
    """Slopes of the canonical bump carrying residue class ``k`` on one edge."""
    k %= delta
    if k == 0:
        return [0] * delta
    return [delta - k] * k + [-k] * (delta - k)


def canonical_alpha(c: DivisorClass) -> PLFunction:
    sub = subdivide(c.graph, c.delta)
    slopes = []
    for k in c.cycle():
        slopes.extend(bump_slopes(k, c.delta))
    vals = _values_from_slopes(sub, slopes)
    assert vals is not None
    return PLFunction(sub, tuple(slopes), vals)


def canonical_rep(c: DivisorClass) -> TropicalDivisor:
    """Preferred representative: one bump per edge, built from the edge cycle.

    On an edge whose cycle value is ``k`` (taken in ``[0, delta)``) the PL
    function rises with slope ``delta - k`` for ``k`` segments and falls with
    slope ``k`` for the rest.  The result depends only on the cycle, not on
    the spanning tree, so it is compatible with edge contraction.
    """
    alpha = canonical_alpha(c)
    deg = alpha.divisor().as_dict()
    out = {}
    for v, x in deg.items():
        if x % c.delta:
            raise TorsionError("class vector does not give an integral divisor")  # pragma: no cover
        out[v] = x // c.delta
    return TropicalDivisor.from_map(alpha.sub, out)


def all_classes(gr: Graph, delta: int) -> list[DivisorClass]:
    import itertools
    return [DivisorClass(gr, delta, v) for v in itertools.product(range(delta), repeat=gr.b1)]


def contract_class(c: DivisorClass, e: int) -> DivisorClass:
    """Transport a class to ``Gamma/e``; a loop coordinate is dropped."""
    new, emap, _ = contract_edge_map(c.graph, e)
    cyc = c.cycle()
    new_cycle = [0] * new.n_edges
    for old, nw in enumerate(emap):
        if nw is not None:
            new_cycle[nw] = cyc[old]
    return DivisorClass(new, c.delta, cycle_to_class(new, c.delta, new_cycle))


def contract_divisor(d: TropicalDivisor, e: int) -> TropicalDivisor:
    """Push a divisor forward along the contraction of base edge ``e``.

    The whole chain of ``e`` collapses to one vertex and coefficients add up.
    """
    sub = d.sub
    new, emap, vmap = contract_edge_map(sub.base, e)
    nsub = subdivide(new, sub.delta)
    a, _ = sub.base.edges[e]
    out: dict[int, int] = {}
    for v, x in d.values:
        loc = sub.locate(v)
        if loc is None:
            w = vmap[v]
        elif loc[0] == e:
            w = vmap[a]
        else:
            w = nsub.interior(emap[loc[0]], loc[1])
        out[w] = out.get(w, 0) + x
    return TropicalDivisor.from_map(nsub, out)


# --------------------------------------------------------------------------
# moving a divisor off the original vertices


def move_off_vertices(gr: Graph, d: Mapping[int, int]) -> tuple[SubdividedGraph, TropicalDivisor, PLFunction]:
    """Trade a degree-0 divisor on ``V(Gamma)`` for one on new vertices.

    Every edge is cut in three.  At each vertex the whole coefficient is put
    on the outgoing slope of its first flag; the PL function is zero on
    ``V(Gamma)`` and ``D + div(alpha)`` vanishes there.
    """
    if sum(d.values()) != 0:
        raise ValueError("divisor must have total degree 0")
    if gr.n_edges == 0:
        if any(d.values()):
            raise NoRoomError("no edges to move the divisor onto")
    sub = subdivide(gr, 3)
    flag_slope: dict[tuple[int, int], int] = {}
    for v, x in d.items():
        if not x:
            continue
        for e, (a, b) in enumerate(gr.edges):
            if a == v:
                flag_slope[(e, 0)] = flag_slope.get((e, 0), 0) + x
                break
            if b == v:
                flag_slope[(e, 1)] = flag_slope.get((e, 1), 0) + x
                break
    slopes = []
    for e in range(gr.n_edges):
        s_tail = flag_slope.get((e, 0), 0)
        s_head = flag_slope.get((e, 1), 0)
        slopes.extend([s_tail, s_head - s_tail, -s_head])
    vals = _values_from_slopes(sub, slopes)
    assert vals is not None
    alpha = PLFunction(sub, tuple(slopes), vals)
    pulled = TropicalDivisor.from_map(sub, dict(d))
    return sub, pulled + alpha.divisor(), alpha


def pullback(gr: Graph, d: Mapping[int, int], delta: int) -> TropicalDivisor:
    """A divisor on ``V(Gamma)`` viewed on the ``delta``-subdivision."""
    return TropicalDivisor.from_map(subdivide(gr, delta), dict(d))
