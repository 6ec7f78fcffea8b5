"""
Gluing the cone polynomials
===========================

Assemble the piecewise polynomial over the monodromy fan for genus 2,
delta = 2 and every core K, then check that setting an edge length to zero
reproduces the polynomial on the contracted cone.
"""

from corrdr.abelian import TorsionAmbient, enumerate_subgroups
from corrdr.pixton import assemble_DRK, verify_gluing

amb = TorsionAmbient.for_target(2, 1)
for k in enumerate_subgroups(amb):
    pp = assemble_DRK(2, 2, 0, 2, 1, k, 2, a=(2, -2))
    report = verify_gluing(pp)
    print(f"K = {sorted(k.element_set)}: {len(pp.cones)} cones, {report.checked} facets, glued: {report.ok}")

# a peek at one cone with a single loop
pp = assemble_DRK(1, 2, 0, 2, 1, amb.zero_subgroup(), 1, a=(2, -2))
for cone in pp.cones[:4]:
    print(cone.mono.graph.edges, cone.weight, cone.poly.to_text())
