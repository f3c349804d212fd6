"""Roots off the origin with unequal characters of tau.

For m = 2, characters (1/3, 2/7) and p = x^2 - 4 the De Rham image of a fat
module can be Gamma-stable without splitting along the roots +2 and -2.  With
equal characters the same construction splits.
"""
from gmpy2 import mpq

from ncadelic.grassmannian import (
    Frame,
    de_rham,
    fat_closure,
    free_orbit_splitting_example,
    primary_decomposability_report,
)
from ncadelic.quiver import GammaModule
from ncadelic.scalars import ONE, ZERO, GroupAlgElem

ex = free_orbit_splitting_example()
print("unequal characters (1/3, 2/7):")
for k, v in ex.items():
    print(f"  {k}: {v}")

print("\nequal characters (1, 1), generator p y - 2 x:")
F = Frame(GroupAlgElem(2, [ONE, ONE]), GammaModule((1, 0)), [mpq(-4), ZERO, ONE])
N = fat_closure(F, [{(0, 2, 1): ONE, (0, 0, 1): mpq(-4), (0, 1, 0): mpq(-2)}], 4)
U = de_rham(N)
print("  dim U:", U.dim, " report:", primary_decomposability_report(U))
