"""
Splitting a lattice set by column size
======================================
"""

from mlinbound.lattice import LatticeSet, nested_enumeration, split_columns

# a long column along the first axis plus some scattered points
pts = [(i, 0) for i in range(12)] + [(0, j) for j in range(1, 5)] + [(5, 7), (-3, 2)]
U = LatticeSet(1, 2, tuple(pts))
s = split_columns(U, len(U))

print("N =", s.N, " thresholds =", [round(t, 3) for t in s.thresholds])
for j, part in enumerate(s.parts, 1):
    print(f"U^{j}: {len(part)} points")
print("certificate:", s.certificate())

# every point is visited exactly once by the nested sum
assert sorted(nested_enumeration(U, [1])) == sorted(U.points)
