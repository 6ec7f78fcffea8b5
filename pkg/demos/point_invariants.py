"""
Point invariants of an elliptic curve
=====================================

Compare the plain invariant N_d(a) with its correlated version N0_d(a) for a
few degrees, computed by two closed forms and by a sum over Z_delta^2.
"""

from corrdr.elliptic import N0_point_by_gcd, N0_point_by_jordan, N_point, subgroup_sum_N0

# legs divisible by delta = 2
a, delta = (2, -2), 2

print(" d      N     N0 (Jordan)  N0 (gcd)  N0 (subgroups)")
for d in range(1, 9):
    row = (N_point(d, a), N0_point_by_jordan(d, a, delta), N0_point_by_gcd(d, a, delta),
           subgroup_sum_N0(d, a, delta))
    print(f"{d:2d} {row[0]!s:>6} {row[1]!s:>12} {row[2]!s:>9} {row[3]!s:>15}")

# with delta = 1 nothing is correlated and the two agree
print(all(N0_point_by_jordan(d, (3, -1, -2), 1) == N_point(d, (3, -1, -2)) for d in range(1, 30)))
