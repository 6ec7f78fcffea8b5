"""
The constant term behind -1/12
==============================

On a single loop the normalized sum over r-weightings is a polynomial in r.
Interpolating it and evaluating at r = 0 gives the familiar -1/12.
"""

from fractions import Fraction

from corrdr.exact import constant_term, interpolate
from corrdr.graphs import Graph, subdivide
from corrdr.pixton import P_constant_term, enumerate_weightings, weighting_sum

loop = subdivide(Graph(((0, 0),), ((0, 0),), ((0, 1),)), 1)

# one weighting per residue class: r^{b1} of them
for r in (3, 4, 5):
    print(r, [w.segment_values for w in enumerate_weightings(loop, None, None, r)])

# the l-coefficient at several r, and the polynomial through them
nodes = [(r, weighting_sum(loop, None, None, r, 1)) for r in range(3, 9)]
for r, poly in nodes:
    print(f"r={r}: {poly.to_text()}   (r^2-1)/12 = {Fraction(r * r - 1, 12)}")
fitted = interpolate(nodes)
print("interpolated:", fitted.to_text())
print("value at r=0:", constant_term(fitted).to_text())
print("P on the loop:", P_constant_term(loop, None, None, 1).to_text())
