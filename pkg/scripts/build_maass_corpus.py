"""Regenerate the vendored Maass-form corpus (both parities, t <= 30).

    python3 scripts/build_maass_corpus.py [out_path] [r_max]

Each parity is cached next to the output (out_path.even, out_path.odd), so an
interrupted run resumes with the missing parity only.
"""
import os
import sys
import time

from gl3moments.gl3 import ingest_maass_data, write_maass_data
from gl3moments.hejhal import find_eigenvalues, maass_form_record


def main(argv):
    out = argv[1] if len(argv) > 1 else "src/gl3moments/data/maass_sl2z.txt"
    r_max = float(argv[2]) if len(argv) > 2 else 30.0
    records = []
    for parity in ("even", "odd"):
        part = f"{out}.{parity}"
        if os.path.exists(part):
            records.extend(ingest_maass_data(part))
            print(f"{parity}: reused {part}", flush=True)
            continue
        t0 = time.time()
        rs = find_eigenvalues(parity, 9.0, r_max)
        print(f"{parity}: {len(rs)} forms in {time.time() - t0:.0f}s", flush=True)
        found = []
        for r in rs:
            rec = maass_form_record(r, parity)
            print(f"  t={r:.10f} omega={rec.omega_j:.6e} hecke={rec.hecke_defect():.1e}", flush=True)
            found.append(rec)
        with open(part, "w", encoding="utf-8") as fh:
            write_maass_data(found, fh)
        records.extend(found)
    records.sort(key=lambda rec: rec.t_j)
    with open(out, "w", encoding="utf-8") as fh:
        write_maass_data(records, fh, comment=(
            "Hecke-Maass cusp forms for SL(2,Z), Hejhal collocation (gl3moments.hejhal).\n"
            f"All forms with 9 <= t <= {r_max:g}; lambda(1..100); omega = harmonic weight 4 pi |rho(1)|^2 / cosh(pi t)."))
    print("validated", len(ingest_maass_data(out)), "records")
    for parity in ("even", "odd"):
        os.remove(f"{out}.{parity}")


if __name__ == "__main__":
    main(sys.argv)
