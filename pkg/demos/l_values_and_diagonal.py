"""L(1, sym^2 Delta) three ways, then the diagonal of the twisted moment by both routes.

Run:  python3 demos/l_values_and_diagonal.py
"""
import math

from gl3moments.gl3 import l_value_at_one, sym2_delta
from gl3moments.moments import diagonal_term, predict_moment

f = sym2_delta()

# Petersson norm of Delta gives L(1, sym^2 Delta) in closed form:
# L(1, sym^2 f) = pi^{k+1} 2^{2k-1} <f, f> / (k-1)!,  k = 12
norm = 1.035362056804320922e-6
closed = math.pi ** 13 * 2 ** 23 * norm / math.factorial(11)
print(f"Petersson closed form      L(1) = {closed:.15f}")

for method, N in (("partial", 20000), ("riesz", 16384), ("afe", 200)):
    v = l_value_at_one(f, 0, N, method=method)
    print(f"{method:>8s} (N={N:>6d})        L(1) = {v.value:.15f}   est. error {v.error:.1e}"
          f"   actual {abs(v.value - closed):.1e}")

print()
print("Diagonal term, p = 2, M = T/5: route A sums the truncated m-series on the")
print("kernel contour, route B is the closed form L(1) (A(p,1)p - 1) p^{-3/2} pi^{-1} I.")
print(f"{'T':>6s} {'route A':>22s} {'route B':>22s} {'rel. gap':>10s}")
for T in (100.0, 200.0, 300.0, 400.0):
    d = diagonal_term(f, 2, T, T / 5)
    print(f"{T:6.0f} {float(d.route_a):22.12f} {float(d.route_b):22.12f} {d.relative_gap:10.2e}")

print()
r = predict_moment(f, 2, 400.0, 80.0)
print(f"Predicted main term at T=400, M=80, p=2: {r.main:.6f}  (error-shape budget {r.error_budget:.3e})")
