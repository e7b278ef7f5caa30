"""Both sides of the Kuznetsov formula with the vendored SL(2,Z) Maass-form corpus.

The corpus holds every Hecke-Maass cusp form with 9 <= t <= 30, computed by
Hejhal collocation.  A Gaussian pair centred at T = 9 sees only the first few.

Run:  python3 demos/kuznetsov_on_the_corpus.py
"""
from gl3moments.arith import kloosterman, num_divisors
from gl3moments.cli import vendored_corpus_path
from gl3moments.gl3 import ingest_maass_data
from gl3moments.kuznetsov import kuznetsov_check

forms = ingest_maass_data(vendored_corpus_path())
print(f"{len(forms)} forms, first t_j = {min(r.t_j for r in forms):.6f}")

# Weil's bound on a few Kloosterman sums
for a, b, c in ((1, 1, 5), (3, 7, 101), (12, 5, 2310)):
    s = kloosterman(a, b, c)
    print(f"S({a},{b};{c}) = {s:+.6f}   Weil bound {num_divisors(c) * c ** 0.5:.2f}")
print()

for parity in ("even", "odd"):
    for m, n in ((1, 1), (1, 2)):
        rep = kuznetsov_check(m, n, 9.0, 2.0, parity, forms, c_max=500)
        total = rep.spectral_total + rep.eisenstein_total
        # the K^- term enters with the sign of the parity
        sign = 1 if parity == "even" else -1
        geo = rep.diagonal_term + rep.kloosterman_plus + sign * rep.kloosterman_minus
        print(f"{parity:>4s} m={m} n={n}: cusp {rep.spectral_total:+.10f}  continuous {rep.eisenstein_total:+.10f}")
        print(f"           spectral {total:+.10f}  geometric {geo:+.10f}  residual {abs(rep.residual):.1e}")
