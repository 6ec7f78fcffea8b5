"""End-to-end acceptance checks, one test per criterion.

Each test prints a single ``ACCEPTANCE n: PASS|FAIL`` line and enforces its
runtime budget.
"""

from __future__ import annotations

import itertools
import random
import time
from fractions import Fraction

from conftest import SMALL, banana_graph, loop_graph, theta_graph, torsion_divisors
from corrdr.abelian import (SubgroupLattice, TorsionAmbient, cochain_classes, covering_degrees, divisors,
                            enumerate_subgroups, jordan_J2, orthogonal, pairing_is_nondegenerate, raise_level,
                            weil_pair_circle)
from corrdr.elliptic import (N0_point_by_gcd, N0_point_by_jordan, N_point, genus1_graph_sum, genus1_terms,
                             qseries_check, subgroup_sum_N0, vertex_integrals)
from corrdr.exact import TruncPoly
from corrdr.graphs import Graph, enumerate_graphs, subdivide
from corrdr.monodromy import contract, core, enumerate_strata, right_kernel, stratum_degrees
from corrdr.pixton import P_constant_term, assemble_DRK, enumerate_weightings, is_weighting, verify_gluing
from corrdr.tropical import (TorsionError, TropicalDivisor, is_equivalent, move_off_vertices,
                             solve_alpha)


def run_criterion(capsys, number: int, title: str, budget: float, body) -> None:
    start = time.perf_counter()
    try:
        detail = body()
        elapsed = time.perf_counter() - start
        assert elapsed < budget, f"took {elapsed:.1f}s, budget {budget:.0f}s"
    except BaseException as exc:
        with capsys.disabled():
            print(f"\nACCEPTANCE {number}: FAIL {title}: {exc}")
        raise
    with capsys.disabled():
        print(f"\nACCEPTANCE {number}: PASS {title} ({detail}; {elapsed:.2f}s)")


def _sigma(d: int) -> int:
    return sum(k for k in range(1, d + 1) if d % k == 0)


def test_acceptance_1_point_invariants(capsys):
    def body():
        checked = 0
        for delta in range(1, 13):
            for a in ((delta, -delta), (2 * delta, -delta, -delta)):
                for d in range(1, 61):
                    x = N0_point_by_jordan(d, a, delta)
                    assert x == N0_point_by_gcd(d, a, delta) == subgroup_sum_N0(d, a, delta), (d, a, delta)
                    if delta == 1:
                        assert x == a[0] ** 2 * d ** (len(a) - 1) * _sigma(d) == N_point(d, a)
                    checked += 1
        return f"{checked} triples agree"

    run_criterion(capsys, 1, "correlated point invariants", 10, body)


def test_acceptance_2_lambda_qseries(capsys):
    def body():
        checked = 0
        for delta in (1, 2):
            for a in ((delta, -delta), (2 * delta, -delta, -delta)):
                for route in ("sin", "q"):
                    rep = qseries_check(a, delta, 4, 12, route)
                    assert rep.ok, rep.mismatches[:3]
                    assert rep.checked == 4 * 12
                    checked += rep.checked
        return f"{checked} coefficients"

    run_criterion(capsys, 2, "lambda invariants from the product formula", 60, body)


def test_acceptance_3_genus_one_graph_sum(capsys):
    vectors = [(2, -2), (5, -5), (3, -1, -2), (2, 1, -3), (4, -1, -1, -2), (1, 2, -4, 1)]

    def body():
        for a in vectors:
            a1 = a[0]
            trees = {t.graph: t.coefficient for t in genus1_terms(1, a) if t.graph.n_edges}
            flows = sorted(-Fraction((a1 + x) ** 2, 2) for x in (0,) + a[1:])
            assert sorted(trees.values()) == flows
            for d in range(1, 11):
                ints = vertex_integrals(d, len(a))
                assert ints["psi_1"] == len(a) * ints["boundary"] == len(a) * _sigma(d) * d ** (len(a) - 1)
                assert genus1_graph_sum(d, a) == N_point(d, a)
        return f"{len(vectors)} vectors, n in {{2,3,4}}, d <= 10"

    run_criterion(capsys, 3, "genus-one graph sum", 10, body)


def test_acceptance_4_pixton_anchors(capsys):
    def body():
        l0 = TruncPoly.var("l_0", 1)
        assert P_constant_term(subdivide(loop_graph(), 1), None, None, 1) == 1 - l0 / 12
        # the oracle behind -1/12
        assert all(sum(w * (r - w) for w in range(r)) == r * (r * r - 1) // 6 for r in range(1, 60))
        rng = random.Random(20)
        pool = enumerate_graphs(1, 2, 0) + enumerate_graphs(2, 1, 0) + enumerate_graphs(0, 4, 0)
        for _ in range(20):
            gr = rng.choice(pool)
            delta = rng.choice([1, 2, 3])
            sub = subdivide(gr, delta)
            a = [delta * rng.randint(-3, 3) for _ in gr.leg_labels]
            a[-1] -= sum(a)
            legs = dict(zip(gr.leg_labels, a))
            vals = {v: rng.randint(-2, 2) for v in range(sub.n_vertices)}
            vals[0] -= sum(vals.values())
            div = TropicalDivisor.from_map(sub, vals)
            r = rng.randint(2, 6)
            ws = enumerate_weightings(sub, div, legs, r)
            assert len(ws) == r ** sub.b1 == len({w.segment_values for w in ws})
            assert all(is_weighting(w, div, legs) for w in ws)
        cases = [(subdivide(loop_graph(), 1), None, None), (subdivide(theta_graph(), 2), None, None),
                 (subdivide(banana_graph(), 3), None, None)]
        for sub, div, legs in cases:
            for trunc in (1, 2):
                assert P_constant_term(sub, div, legs, trunc) == P_constant_term(sub, div, legs, trunc, extra_nodes=3)
        return "loop -1/12, 20 weighting counts, +3 node stability"

    run_criterion(capsys, 4, "Pixton engine anchors", 30, body)


def test_acceptance_5_gluing(capsys):
    def body():
        facets = 0
        for delta in (2, 3):
            for g in (1, 2):
                for k in enumerate_subgroups(TorsionAmbient.for_target(delta, 1)):
                    for trunc in (1, 2):
                        pp = assemble_DRK(g, 2, 0, delta, 1, k, trunc, a=(delta, -delta))
                        rep = verify_gluing(pp)
                        assert rep.ok, (delta, g, k.to_json(), trunc, rep.cone, rep.edge, rep.reason)
                        facets += rep.checked
                    for cone in pp.cones:
                        mg = cone.mono
                        t = right_kernel(mg).order
                        for e in range(mg.graph.n_edges):
                            small = contract(mg, e)
                            lhs = Fraction(mg.ktilde.order, delta ** mg.b1) * Fraction(t, right_kernel(small).order)
                            assert lhs == Fraction(small.ktilde.order, delta ** small.b1)
        return f"{facets} facet restrictions"

    run_criterion(capsys, 5, "gluing of assembled fans", 300, body)


def test_acceptance_6_finite_abelian(capsys):
    def body():
        for d in range(1, 31):
            assert sum(jordan_J2(w) for w in divisors(d)) == d * d
        for delta in (2, 3, 4, 6):
            lat = SubgroupLattice(TorsionAmbient.for_target(delta, 1))
            rng = random.Random(delta)
            f = {h: rng.randint(-99, 99) for h in lat.subgroups}
            up = {k: sum(f[h] for h in lat.above(k)) for k in lat.subgroups}
            assert {k: sum(lat.moebius(k, h) * up[h] for h in lat.above(k)) for k in lat.subgroups} == f
        for delta in range(1, 7):
            amb = TorsionAmbient.for_target(delta, 1)
            assert pairing_is_nondegenerate(amb)
            elems = list(amb.elements())
            for k in range(1, 5):
                for x, y in itertools.product(elems, repeat=2):
                    lhs = weil_pair_circle(raise_level(x, k), raise_level(y, k), k * delta)
                    assert lhs == (k * weil_pair_circle(x, y, delta)) % 1
        count = 0
        for delta, q in [(d, 1) for d in range(1, 7)] + [(2, 2), (3, 2)]:
            for h in enumerate_subgroups(TorsionAmbient.for_target(delta, q)):
                assert h.order * orthogonal(h).order == delta ** (2 * q)
                count += 1
        return f"J2 to 30, Moebius, Weil, {count} subgroups"

    run_criterion(capsys, 6, "finite abelian suite", 10, body)


def test_acceptance_7_strata_degrees(capsys):
    sigs = [(0, 3, 0), (0, 4, 0), (1, 1, 0), (1, 2, 0), (2, 0, 0), (2, 1, 0), (2, 2, 0)]

    def body():
        seen = 0
        for sig in sigs:
            for mg in enumerate_strata(*sig, delta=2, q=1):
                deg = stratum_degrees(mg).spin_corr0
                want = Fraction(2) ** (2 * mg.graph.genus - mg.b1 - 2) * mg.ktilde.order
                assert deg == want and want.denominator == 1 and want > 0
                assert right_kernel(mg).order * (mg.ktilde.order // core(mg).order) == 2 ** mg.b1
                seen += 1
        pool = [loop_graph(), theta_graph(), banana_graph(), Graph(((1, 0), (1, 0)), ((0, 1),))]
        pool += [g for g in enumerate_graphs(2, 0, 0) if g.n_edges][:6]
        assert len(pool) == 10
        for gr in pool:
            for h in (TorsionAmbient(2, 1).full_subgroup(), TorsionAmbient(3, 1).full_subgroup(),
                      TorsionAmbient.for_target(2, 1).full_subgroup()):
                assert covering_degrees(gr, h).diag_components == h.order ** gr.b1 == cochain_classes(gr, h)
        return f"{seen} monodromy graphs, 10 coverings"

    run_criterion(capsys, 7, "strata degrees and cone counts", 30, body)


def test_acceptance_8_tropical(capsys):
    def body():
        for delta in (2, 3):
            for gi, gr in enumerate(SMALL):
                sub = subdivide(gr, delta)
                reps: dict[tuple, TropicalDivisor] = {}
                found = []
                stream = itertools.chain(torsion_divisors(sub, 1), torsion_divisors(sub, delta, random.Random(gi), 3000))
                for d, c in stream:
                    reps.setdefault(c.vector, d)
                    found.append((d, c))
                    if len(reps) == delta ** gr.b1 and len(found) >= 20:
                        break
                assert len(reps) == delta ** gr.b1, (gi, delta, len(reps))
                for x, y in itertools.combinations(reps.values(), 2):
                    assert not is_equivalent(x, y)
                for d, c in found[:20]:
                    assert is_equivalent(d, reps[c.vector])
        rng = random.Random(8)
        done = 0
        while done < 50:
            gr = rng.choice(SMALL)
            sub = subdivide(gr, rng.choice([2, 3]))
            for d, _ in torsion_divisors(sub, sub.delta, rng, 4):
                try:
                    alpha = solve_alpha(d)
                except TorsionError:
                    alpha = solve_alpha(d, normalize=False)
                assert alpha.divisor() == d.scale(sub.delta)
                done += 1
        moved = 0
        for gr in SMALL:
            if not gr.n_edges:
                continue
            for _ in range(5):
                vals = [rng.randint(-3, 3) for _ in range(gr.n_vertices - 1)]
                d = {0: -sum(vals), **{i + 1: x for i, x in enumerate(vals)}}
                sub, out, _ = move_off_vertices(gr, d)
                assert not any(sub.is_original(v) for v in out.support())
                pulled = TropicalDivisor.from_map(sub, d)
                assert is_equivalent(out, pulled)
                moved += 1
        return f"{len(SMALL)} graphs x 2 levels, 50 alpha solves, {moved} moves"

    run_criterion(capsys, 8, "tropical divisor suite", 30, body)


def test_acceptance_summary_lists_eight_criteria():
    names = [n for n in globals() if n.startswith("test_acceptance_") and n[16].isdigit()]
    assert sorted(int(n[16]) for n in names) == list(range(1, 9))
