"""
Torsion classes on a theta graph
================================

Subdivide the theta graph into thirds, list the 3^{b1} = 9 torsion classes
with a representative each, and solve for the piecewise linear function that
witnesses 3 D ~ 0.
"""

from corrdr.graphs import Graph, subdivide
from corrdr.tropical import DivisorClass, all_classes, canonical_rep, classify, move_off_vertices, solve_alpha

theta = Graph(((0, 0), (0, 0)), ((0, 1), (0, 1), (0, 1)))
for c in all_classes(theta, 3):
    rep = canonical_rep(c)
    alpha = solve_alpha(rep)
    assert classify(rep) == c and alpha.divisor() == rep.scale(3)
    print(c.vector, rep.to_json(), alpha.slopes)

# a divisor on the vertices can be moved onto the edges
sub, moved, _ = move_off_vertices(theta, {0: 1, 1: -1})
print("moved off the vertices:", moved.to_json())
print("cycle of class (1, 2):", DivisorClass(theta, 3, (1, 2)).cycle())
