"""Correlated invariants of elliptic-curve targets.

Point-insertion invariants ``N`` and ``N0``, their lambda-class versions, the
genus-one graph sum built from the Pixton engine, the subgroup sum over
``Z_delta^2`` and the product-formula q-series.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .abelian import Subgroup, TorsionAmbient, covering_degrees, divisors, jordan_J2
from .exact import BiSeries, ConfigurationError, LaurentQ, qint, sin_series, useries_mul
from .graphs import Graph, automorphism_count, enumerate_graphs, subdivide
from .pixton import P_constant_term, lvar, psi_prefactor


class InvariantMismatch(ArithmeticError):
    pass


def sigma_k(k: int, d: int) -> int:
    """``sum_{m | d} m^k``."""
    if d < 1:
        raise ValueError("sigma needs d >= 1")
    return sum(m ** k for m in divisors(d))


def sigma(d: int) -> int:
    return sigma_k(1, d)


def sigma_bar(omega: int, n: int) -> int:
    """``sigma(n / omega)``, zero when ``omega`` does not divide ``n``."""
    return sigma(n // omega) if n % omega == 0 else 0


def _check_legs(a: Sequence[int], delta: int = 1) -> None:
    if sum(a) != 0:
        raise ConfigurationError(f"legs must sum to zero, got {sum(a)}")
    if not a or a[0] == 0:
        raise ConfigurationError("the first leg must be nonzero")
    if any(x % delta for x in a):
        raise ConfigurationError(f"delta={delta} must divide every leg")


# --------------------------------------------------------------------------
# point insertions


def N_point(d: int, a: Sequence[int]) -> Fraction:
    _check_legs(a)
    n = len(a)
    return Fraction(a[0] ** 2 * d ** (n - 1) * sigma(d))


def N0_point_by_jordan(d: int, a: Sequence[int], delta: int) -> Fraction:
    n = len(a)
    s = sum(jordan_J2(w) * sigma_bar(w, d) for w in divisors(delta))
    return Fraction(a[0], delta) ** 2 * d ** (n - 1) * s


def N0_point_by_gcd(d: int, a: Sequence[int], delta: int) -> Fraction:
    n = len(a)
    s = sum(Fraction(d // l * math.gcd(l, delta) ** 2, delta ** 2) for l in divisors(d))
    return a[0] ** 2 * d ** (n - 1) * s


def N0_point(d: int, a: Sequence[int], delta: int) -> Fraction:
    _check_legs(a, delta)
    x = N0_point_by_jordan(d, a, delta)
    y = N0_point_by_gcd(d, a, delta)
    if x != y:
        raise InvariantMismatch(f"closed forms disagree at d={d}, a={tuple(a)}, delta={delta}: {x} vs {y}")
    return x


def subgroup_sum_N0(d: int, a: Sequence[int], delta: int) -> Fraction:
    """Sum the covering contribution over every ``L`` in ``Z_delta^2``."""
    _check_legs(a, delta)
    n = len(a)
    amb = TorsionAmbient.for_target(delta, 1)
    point = Graph(((1, d),))
    total = Fraction(0)
    for elem in amb.elements():
        h = Subgroup.generated(amb, [elem])
        cover = covering_degrees(point, h).torsor_degree
        if d % cover == 0:
            total += Fraction(a[0], delta) ** 2 * d ** (n - 1) * sigma(d // cover)
    return total


# --------------------------------------------------------------------------
# lambda insertions


def _subset_factor(g: int, a: Sequence[int]) -> Fraction:
    n = len(a)
    if any(x == 0 for x in a):
        raise ConfigurationError("lambda invariants need every leg nonzero")
    expo = 2 * g - 2 + n
    s = 0
    for size in range(n + 1):
        for sub in itertools.combinations(a, size):
            s += (-1) ** size * sum(sub) ** expo
    prod = math.prod(a)
    return Fraction(a[0] ** 2, prod) * s * (-1) ** (n + g - 1) / math.factorial(n + 2 * g - 2)


def N_lambda(g: int, d: int, a: Sequence[int]) -> Fraction:
    _check_legs(a)
    n = len(a)
    return _subset_factor(g, a) * d ** (n - 1) * sigma_k(2 * g - 1, d)


def N0_lambda(g: int, d: int, a: Sequence[int], delta: int) -> Fraction:
    _check_legs(a, delta)
    n = len(a)
    arith = sum(Fraction((d // k) ** (2 * g - 1) * math.gcd(k, delta) ** 2, delta ** 2) for k in divisors(d))
    return _subset_factor(g, a) * d ** (n - 1) * arith


def N0_lambda_by_rescaling(g: int, d: int, a: Sequence[int], delta: int) -> Fraction:
    """``delta^{2g-2} sum_{w | delta} J_2(w) w^{n-1} N_{g, d/w}(a / delta)``."""
    _check_legs(a, delta)
    n = len(a)
    small = [x // delta for x in a]
    total = Fraction(0)
    for w in divisors(delta):
        if d % w == 0:
            total += jordan_J2(w) * w ** (n - 1) * N_lambda(g, d // w, small)
    return Fraction(delta) ** (2 * g - 2) * total


# --------------------------------------------------------------------------
# genus-one graph sum


@dataclass(frozen=True)
class GraphSumTerm:
    graph: Graph
    monomial: str
    coefficient: Fraction
    integral: int


def vertex_integrals(d: int, n: int) -> dict[str, int]:
    """The three genus-one invariants with point insertions (supplied constants)."""
    base = sigma(d) * d ** (n - 1)
    return {"boundary": base, "psi_other": base, "psi_1": n * base}


def _allowed(gr: Graph) -> bool:
    """Trees whose genus-0 vertex carries marking 1 and exactly one other marking."""
    if gr.n_edges != 1 or gr.is_loop(0):
        return False
    low = [v for v, (g, _) in enumerate(gr.vertices) if g == 0]
    if len(low) != 1:
        return False
    labels = {lab for v, lab in gr.legs if v == low[0]}
    return 1 in labels and len(labels) == 2


def genus1_terms(d: int, a: Sequence[int]) -> list[GraphSumTerm]:
    """Degree-one DR decorations paired with their vertex integrals.

    Markings are ``0..n`` with ``a_0 = 0``.  The psi prefactor enters with
    ``psi -> -psi`` and each boundary tree with its P constant term.
    """
    _check_legs(a)
    n = len(a)
    labels = list(range(n + 1))
    legs = {0: 0, **{i + 1: x for i, x in enumerate(a)}}
    ints = vertex_integrals(d, n)
    out: list[GraphSumTerm] = []
    smooth = Graph(((1, 0),), (), tuple((0, lab) for lab in labels))
    pre = psi_prefactor([legs[lab] for lab in labels], 1, 1, labels=labels)
    for lab in labels:
        c = -pre.coeff(((f"psi_{lab}", 1),))
        key = "psi_1" if lab == 1 else "psi_other"
        out.append(GraphSumTerm(smooth, f"psi_{lab}", c, ints[key]))
    for gr in enumerate_graphs(1, n + 1, 0, labels=labels, max_edges=1):
        if not _allowed(gr):
            continue
        p = P_constant_term(subdivide(gr, 1), None, legs, 1)
        c = p.coeff(((lvar(0), 1),)) / automorphism_count(gr)
        out.append(GraphSumTerm(gr, lvar(0), c, ints["boundary"]))
    return out


def genus1_bracket(a: Sequence[int]) -> Fraction:
    """Graph sum divided by ``sigma(d) d^{n-1}``."""
    return sum((t.coefficient * t.integral for t in genus1_terms(1, a)), Fraction(0))


def genus1_graph_sum(d: int, a: Sequence[int]) -> Fraction:
    return sum((t.coefficient * t.integral for t in genus1_terms(d, a)), Fraction(0))


# --------------------------------------------------------------------------
# q-series


def bracket_product_sin(k: int, a: Sequence[int], order: int) -> list[Fraction]:
    """u-series of ``(-i)^n prod_i [k a_i] / a_i`` with ``[m] = 2i sin(m u / 2)``.

    The factors ``(-i)^n (2i)^n`` pair to ``2^n``.
    """
    out = [Fraction(0)] * (order + 1)
    out[0] = Fraction(2 ** len(a))
    for x in a:
        s = [c / x for c in sin_series(Fraction(k * x, 2), order)]
        out = useries_mul(out, s, order)
    return out


def bracket_product_q(k: int, a: Sequence[int], order: int) -> list[Fraction]:
    """Same series from Laurent polynomials in ``q^{1/2}`` with ``q = e^{iu}``."""
    prod = LaurentQ({0: 1})
    for x in a:
        prod = prod * qint(k * x)
    re, im = prod.u_expansion(order)
    n = len(a)
    # multiply by (-i)^n and keep the real part
    real = {0: re, 1: im, 2: [-c for c in re], 3: [-c for c in im]}[n % 4]
    denom = math.prod(a)
    return [Fraction(c) / denom for c in real]


def product_series(a: Sequence[int], delta: int, max_u: int, max_y: int, route: str = "sin") -> BiSeries:
    n = len(a)
    expand = bracket_product_sin if route == "sin" else bracket_product_q
    out = BiSeries({}, max_u, max_y)
    for w in divisors(delta):
        jw = jordan_J2(w)
        for k in range(1, max_y // w + 1):
            us = expand(k, a, max_u)
            for l in range(1, max_y // (w * k) + 1):
                scale = jw * (w * l) ** (n - 1)
                out = out + BiSeries.from_u_series([c * scale for c in us], w * k * l, max_u, max_y)
    return out * (Fraction(a[0], delta) ** 2)


@dataclass
class QSeriesReport:
    checked: int = 0
    mismatches: list[tuple[int, int, Fraction, Fraction]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def __bool__(self) -> bool:
        return self.ok


def qseries_check(a: Sequence[int], delta: int, g_max: int, d_max: int, route: str = "sin") -> QSeriesReport:
    _check_legs(a, delta)
    rep = QSeriesReport()
    if g_max < 1 or d_max < 1:
        return rep
    n = len(a)
    series = product_series(a, delta, n + 2 * g_max - 2, d_max, route)
    for g in range(1, g_max + 1):
        for d in range(1, d_max + 1):
            got = series.coeff(n + 2 * g - 2, d)
            want = N0_lambda(g, d, a, delta)
            rep.checked += 1
            if got != want:
                rep.mismatches.append((g, d, got, want))
    return rep


# --------------------------------------------------------------------------
# reporting


CSV_FIELDS = ("g", "d", "delta", "a", "N", "N0", "source")


def invariant_rows(a: Sequence[int], delta: int, d_max: int, g_max: int = 1) -> list[dict]:
    rows = []
    a_txt = ",".join(str(x) for x in a)
    for d in range(1, d_max + 1):
        n_pt = N_point(d, a)
        rows.append(dict(g=1, d=d, delta=delta, a=a_txt, N=n_pt, N0=N0_point(d, a, delta), source="closed_form"))
        rows.append(dict(g=1, d=d, delta=delta, a=a_txt, N=n_pt, N0=subgroup_sum_N0(d, a, delta),
                         source="subgroup_sum"))
        rows.append(dict(g=1, d=d, delta=delta, a=a_txt, N=genus1_graph_sum(d, a), N0="", source="graph_sum"))
        if all(a):
            series = product_series(a, delta, len(a) + 2 * g_max - 2, d)
            for g in range(1, g_max + 1):
                rows.append(dict(g=g, d=d, delta=delta, a=a_txt, N=N_lambda(g, d, a),
                                 N0=series.coeff(len(a) + 2 * g - 2, d), source="qseries"))
    return rows


def rows_to_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: str(v) for k, v in r.items()})
    return buf.getvalue()
