"""GL(3) Voronoi summation and the approximate-functional-equation kernels.

Run:  python3 demos/voronoi_and_kernels.py
"""
import math

from gl3moments.gl3 import eisenstein_coefficients, sym2_delta
from gl3moments.special_fn import LanglandsParams
from gl3moments.transforms import BumpFunction, afe_transform_U, afe_transform_V, voronoi_identity_check

# Eisenstein series with parameters (0,0,0): A(n,1) = d_3(n).  The bump on [1,2]
# vanishes at both integers, so the left side is 0 and the polar term must cancel
# the dual sum.
f = eisenstein_coefficients(LanglandsParams())
r = voronoi_identity_check(f, 1, 1, 1, BumpFunction(1.0, 9.0))
print(f"d_3, bump on [1,2]:  lhs {abs(r.lhs):.1e}   dual {complex(r.rhs - r.polar).real:+.10f}"
      f"   polar {complex(r.polar).real:+.10f}")

g = sym2_delta()
for m, c, X in ((1, 2, 50.0), (2, 3, 200.0)):
    r = voronoi_identity_check(g, m, c, 1, BumpFunction(X, 9.0))
    print(f"sym^2 Delta, m={m} c={c} X={X:g}:  lhs {complex(r.lhs):.10f}  rhs {complex(r.rhs):.10f}")

print()
print("V(y, t) is a smooth cut-off at y ~ (t/2pi)^3; U(y, t) ~ 3 log(t/2pi) - log y for small y.")
t = 500.0
for y in (1.0, 1e3, 1e6, (t / (2 * math.pi)) ** 3, 1e8):
    v = afe_transform_V(y, t)
    u = afe_transform_U(y, t)
    print(f"y = {y:10.3e}   V = {complex(v).real:+.8f}   U = {complex(u).real:+.6f}"
          f"   3 log(t/2pi) - log y = {3 * math.log(t / (2 * math.pi)) - math.log(y):+.6f}")
