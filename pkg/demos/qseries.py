"""
Two presentations of the lambda invariants
==========================================

Expand the product formula as a series in (u, y) and read off the
coefficients, then compare with the closed form for every genus up to 4.
"""

from corrdr.elliptic import N0_lambda, product_series, qseries_check

a, delta = (2, -2), 2
series = product_series(a, delta, 8, 6)
for g in range(1, 5):
    n = len(a) + 2 * g - 2
    coeffs = [series.coeff(n, d) for d in range(1, 7)]
    print(f"g={g}:", [str(c) for c in coeffs])
print("closed form g=2:", [str(N0_lambda(2, d, a, delta)) for d in range(1, 7)])

for route in ("sin", "q"):
    rep = qseries_check(a, delta, 4, 12, route)
    print(route, "route:", rep.checked, "coefficients,", "all equal" if rep.ok else rep.mismatches)
