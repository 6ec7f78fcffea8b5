from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

import itertools
import random

from corrdr.graphs import Graph, enumerate_graphs
from corrdr.tropical import TorsionError, TropicalDivisor, classify

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def loop_graph(genus: int = 0, legs: int = 1) -> Graph:
    return Graph(((genus, 0),), ((0, 0),), tuple((0, i + 1) for i in range(legs)))


def theta_graph() -> Graph:
    return Graph(((0, 0), (0, 0)), ((0, 1), (0, 1), (0, 1)))


def banana_graph(deg: int = 1) -> Graph:
    return Graph(((0, deg), (0, deg)), ((0, 1), (0, 1)))


def edge_graph() -> Graph:
    return Graph(((1, 0), (1, 0)), ((0, 1),))


@pytest.fixture
def loop():
    return loop_graph()


@pytest.fixture
def theta():
    return theta_graph()


def small_graphs() -> list[Graph]:
    """One graph per underlying multigraph with b1 <= 2, from small moduli signatures."""
    seen = {}
    for sig in [(0, 3, 0), (0, 4, 0), (1, 1, 0), (1, 2, 0), (2, 0, 0), (2, 1, 0)]:
        for gr in enumerate_graphs(*sig):
            if gr.b1 > 2:
                continue
            bare = Graph(((0, 0),) * gr.n_vertices, gr.edges).canonical
            seen.setdefault(bare, gr)
    return list(seen.values())


SMALL = small_graphs()


def torsion_divisors(sub, box: int, rng: random.Random | None = None, samples: int = 0):
    """Degree-0 divisors with interior entries in [-box, box] (exhaustive) or a random sample."""
    nv = sub.n_vertices
    if rng is None:
        rows = itertools.product(range(-box, box + 1), repeat=nv - 1)
    else:
        rows = ([rng.randint(-box, box) for _ in range(nv - 1)] for _ in range(samples))
    for vals in rows:
        d = TropicalDivisor.from_map(sub, {0: -sum(vals), **{i + 1: x for i, x in enumerate(vals)}})
        try:
            yield d, classify(d)
        except TorsionError:
            continue
