"""The ``mm`` command line.

Exit codes: 0 success, 2 a numerical contract failed (identity residual,
truncation or accuracy), 3 bad input (arguments, config, data files, network).

Configuration is a key=value file (``#`` comments, TOML-style scalars)
given by ``--config`` or the MM_CONFIG environment variable; command-line
flags override it.  Recognized keys: tolerance, A, contour_abscissa,
contour_height, cache_dir, corpus_path.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import random
import sys
import tempfile
import time
import urllib.error
import urllib.parse
import urllib.request
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import errors
from .arith import kloosterman
from .gl3 import (
    GL3Coefficients,
    MaassFormRecord,
    eisenstein_coefficients,
    ingest_maass_data,
    sym2_delta,
    write_maass_data,
)
from .special_fn import GammaFactorKind, LanglandsParams
from .transforms import (
    BumpFunction,
    ContourSpec,
    ZeroFunction,
    afe_transform_U,
    afe_transform_V,
    voronoi_identity_check,
    voronoi_Psi_exact,
)

EXIT_OK, EXIT_CONTRACT, EXIT_INPUT = 0, 2, 3
CACHE_VERSION = 1
LMFDB_URL = "https://www.lmfdb.org/api/maass_newforms/"
_DEFAULTS = {
    "tolerance": None,
    "A": 16,
    "contour_abscissa": None,
    "contour_height": 15.0,
    "cache_dir": None,
    "corpus_path": None,
}


class InputError(Exception):
    """Bad command-line or config input (exit 3)."""


class ContractFailure(Exception):
    """A checked identity did not hold (exit 2)."""


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


def _parse_scalar(text: str):
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def load_config(path: str | None) -> dict:
    """Defaults overlaid with the key=value file at ``path`` (or $MM_CONFIG)."""
    cfg = dict(_DEFAULTS)
    path = path or os.environ.get("MM_CONFIG")
    if not path:
        return cfg
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as ex:
        raise InputError(f"cannot read config {path}: {ex}") from ex
    for i, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{i}: expected key = value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _DEFAULTS:
            raise InputError(f"{path}:{i}: unknown key {key!r}")
        cfg[key] = _parse_scalar(val)
    return cfg


def _opt(args, name, default=None):
    return getattr(args, name, default)


def _setting(args, cfg, name, default=None):
    v = getattr(args, name, None)
    if v is not None:
        return v
    v = cfg.get(name)
    return default if v is None else v


# ---------------------------------------------------------------------------
# cache
# ---------------------------------------------------------------------------


@dataclass
class CacheEntry:
    key: str
    value: bytes
    created: float
    version: int = CACHE_VERSION


def canonical_key(op: str, args: dict) -> str:
    return op + ":" + json.dumps(args, sort_keys=True, separators=(",", ":"))


class DiskCache:
    """One JSON file per entry, written through a temporary file and os.replace."""

    def __init__(self, directory: str):
        self.dir = directory
        os.makedirs(directory, exist_ok=True)

    def _path(self, key: str) -> str:
        return os.path.join(self.dir, hashlib.sha256(key.encode()).hexdigest() + ".json")

    def get(self, key: str) -> CacheEntry | None:
        try:
            with open(self._path(key), encoding="utf-8") as fh:
                d = json.load(fh)
        except (OSError, ValueError):
            return None
        if d.get("version") != CACHE_VERSION or d.get("key") != key:
            return None
        return CacheEntry(d["key"], d["value"].encode(), d["created"], d["version"])

    def put(self, key: str, value: bytes) -> CacheEntry:
        entry = CacheEntry(key, value, time.time())
        doc = {"key": key, "value": value.decode(), "created": entry.created, "version": entry.version}
        fd, tmp = tempfile.mkstemp(dir=self.dir, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                json.dump(doc, fh, sort_keys=True)
            os.replace(tmp, self._path(key))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return entry

    def entries(self) -> list:
        out = []
        for name in sorted(os.listdir(self.dir)):
            if name.endswith(".json"):
                try:
                    with open(os.path.join(self.dir, name), encoding="utf-8") as fh:
                        d = json.load(fh)
                except (OSError, ValueError):
                    continue
                if d.get("version") == CACHE_VERSION:
                    out.append(CacheEntry(d["key"], d["value"].encode(), d["created"], d["version"]))
        return out


def _cache(args, cfg) -> DiskCache | None:
    d = _setting(args, cfg, "cache_dir")
    return DiskCache(os.path.expanduser(str(d))) if d else None


# ---------------------------------------------------------------------------
# input helpers
# ---------------------------------------------------------------------------


def _parse_form(spec: str) -> GL3Coefficients:
    """'sym2' (symmetric-square lift of Delta) or 'eis:a,b,c' with Langlands parameters."""
    if spec == "sym2":
        return sym2_delta()
    if spec.startswith("eis:"):
        try:
            vals = [complex(v.replace(" ", "")) for v in spec[4:].split(",")]
        except ValueError as ex:
            raise InputError(f"bad Eisenstein parameters {spec!r}") from ex
        if len(vals) != 3:
            raise InputError("Eisenstein parameters need three values")
        try:
            return eisenstein_coefficients(LanglandsParams(*vals))
        except (ValueError, errors.MomentsError) as ex:
            raise InputError(str(ex)) from ex
    raise InputError(f"unknown form {spec!r}; use 'sym2' or 'eis:a,b,c'")


def _float_list(text: str) -> list:
    """Comma list, or start:stop:step (stop inclusive)."""
    try:
        if ":" in text:
            a, b, s = (float(v) for v in text.split(":"))
            if s <= 0:
                raise ValueError
            n = int(np.floor((b - a) / s + 1e-9)) + 1
            return [a + i * s for i in range(n)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as ex:
        raise InputError(f"bad number list {text!r}") from ex


def _m_rule(rule: str):
    """'frac:r' -> M = r T, 'power:e' -> M = T^e, 'const:c' -> M = c."""
    try:
        kind, val = rule.split(":")
        val = float(val)
    except ValueError as ex:
        raise InputError(f"bad M rule {rule!r}") from ex
    rules = {"frac": lambda T: val * T, "power": lambda T: T ** val, "const": lambda T: val}
    if kind not in rules:
        raise InputError(f"unknown M rule {kind!r}")
    return rules[kind]


def vendored_corpus_path() -> str:
    return str(resources.files("gl3moments") / "data" / "maass_sl2z.txt")


def _emit(text: str, out: str | None):
    if out:
        d = os.path.dirname(os.path.abspath(out))
        fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, out)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def kloosterman_table_csv(c_max: int, a_max: int, b_max: int) -> str:
    if not 1 <= c_max <= 10 ** 7:
        raise errors.RangeError("c_max must be in [1, 10^7]")
    if a_max < 1 or b_max < 1:
        raise errors.RangeError("a_max and b_max must be positive")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", "b", "c", "value"])
    for c in range(1, c_max + 1):
        for a in range(1, a_max + 1):
            for b in range(1, b_max + 1):
                w.writerow([a, b, c, repr(float(kloosterman(a, b, c)))])
    return buf.getvalue()


def cmd_kloosterman_table(args, cfg):
    _emit(kloosterman_table_csv(args.c_max, args.a_max, args.b_max), _opt(args, "out"))
    return EXIT_OK


def cmd_voronoi_check(args, cfg):
    f = _parse_form(args.form)
    testfn = ZeroFunction((args.X, 2 * args.X)) if args.zero else BumpFunction(args.X, args.sharpness)
    tol = float(_setting(args, cfg, "tolerance", 1e-6))
    try:
        rep = voronoi_identity_check(f, args.m, args.c, args.d, testfn, args.truncation, tol=tol)
    except errors.TruncationError as ex:
        _emit(_json({"error": "truncation-insufficient", "message": str(ex), "tail": ex.tail}), _opt(args, "out"))
        return EXIT_CONTRACT
    _emit(_json(rep.to_json()), _opt(args, "out"))
    return EXIT_OK if rep.passed else EXIT_CONTRACT


def cmd_kuznetsov_check(args, cfg):
    from .kuznetsov import kuznetsov_check

    path = args.corpus or _setting(args, cfg, "corpus_path") or vendored_corpus_path()
    forms = ingest_maass_data(path)
    rep = kuznetsov_check(args.m, args.n, args.T, args.M, args.parity, forms, c_max=args.c_max)
    tol = float(_setting(args, cfg, "tolerance", 1e-2))
    used = [f for f in forms if f.parity == args.parity]
    doc = rep.to_json()
    doc["empty_spectral_side"] = not used
    doc["relative_residual"] = abs(rep.residual) / abs(rep.spectral_total) if rep.spectral_total else None
    budget = tol * abs(rep.spectral_total) + rep.tail_estimate
    doc["budget"] = budget
    doc["passed"] = bool(used) and abs(rep.residual) <= budget
    _emit(_json(doc), _opt(args, "out"))
    return EXIT_OK if doc["passed"] else EXIT_CONTRACT


def _lmfdb_get(params: dict, attempts: int = 3, timeout: float = 20.0):
    url = LMFDB_URL + "?" + urllib.parse.urlencode(params)
    delay = 1.0
    last = None
    for i in range(attempts):
        try:
            with urllib.request.urlopen(url, timeout=timeout) as resp:
                return json.loads(resp.read().decode())
        except (urllib.error.URLError, OSError, ValueError) as ex:
            last = ex
            if i + 1 < attempts:
                time.sleep(delay)
                delay *= 2
    raise errors.NetworkError(f"LMFDB unreachable after {attempts} attempts: {last}")


def _records_from_lmfdb(doc: dict, n_coeffs: int) -> list:
    from .hejhal import petersson_norm

    try:
        rows = doc["data"]
    except (KeyError, TypeError) as ex:
        raise errors.SchemaDriftError("response has no 'data' list") from ex
    out = []
    for row in rows:
        try:
            t = float(row["spectral_parameter"])
            parity = "even" if int(row["symmetry"]) == 0 else "odd"
            lam = np.asarray(row["coefficients"][:n_coeffs], dtype=float)
        except (KeyError, TypeError, ValueError) as ex:
            raise errors.SchemaDriftError(f"missing or malformed field: {ex}") from ex
        lam = lam / lam[0]
        # harmonic weight from the Petersson norm of the form built from these coefficients
        norm = petersson_norm(t, parity, lam[:60])
        omega = 2 * np.pi / ((1 + np.exp(-2 * np.pi * t)) * norm)
        out.append(MaassFormRecord(t, parity, float(omega), lam))
    return out


def fetch_maass(min_t: float, max_t: float, n_coeffs: int, offline: bool) -> str:
    if min_t > max_t:
        raise InputError("min_t must not exceed max_t")
    if n_coeffs < 1:
        raise InputError("n_coeffs must be positive")
    if offline:
        path = vendored_corpus_path()
        recs = ingest_maass_data(path)
        if all(min_t <= r.t_j <= max_t for r in recs) and all(r.n_max <= n_coeffs for r in recs):
            with open(path, encoding="utf-8") as fh:
                return fh.read()
        keep = [MaassFormRecord(r.t_j, r.parity, r.omega_j, r.lam[:n_coeffs]) for r in recs
                if min_t <= r.t_j <= max_t]
    else:
        doc = _lmfdb_get({"level": 1, "weight": 0, "spectral_parameter": f"{min_t}-{max_t}",
                          "_format": "json", "_fields": "spectral_parameter,symmetry,coefficients"})
        keep = sorted(_records_from_lmfdb(doc, n_coeffs), key=lambda r: r.t_j)
    buf = io.StringIO()
    write_maass_data(keep, buf, comment=f"Maass forms for SL(2,Z) with {min_t:g} <= t <= {max_t:g}")
    text = buf.getvalue()
    ingest_maass_data(io.StringIO(text))  # Hecke gate on what is written
    return text


def cmd_fetch_maass(args, cfg):
    text = fetch_maass(args.min_t, args.max_t, args.n_coeffs, _opt(args, "offline", False))
    _emit(text, _opt(args, "out"))
    return EXIT_OK


def moment_rows(form: str, p: int, Ts: list, m_rule: str, derivative: bool) -> list:
    from .moments import predict_moment

    f = _parse_form(form)
    rule = _m_rule(m_rule)
    return [predict_moment(f, p, T, rule(T), derivative=derivative) for T in Ts]


def cmd_moment_predict(args, cfg):
    from .moments import predictions_to_csv

    Ts = _float_list(args.T)
    cache = _cache(args, cfg)
    key = canonical_key("moment-predict", {"form": args.form, "p": args.p, "T": Ts, "M_rule": args.M_rule,
                                           "derivative": bool(args.derivative)})
    if cache is not None and (hit := cache.get(key)) is not None:
        text = hit.value.decode()
    else:
        rows = moment_rows(args.form, args.p, Ts, args.M_rule, args.derivative)
        text = predictions_to_csv(rows) if args.format == "csv" else _json([json.loads(r.to_json()) for r in rows])
        if cache is not None and args.format == "csv":
            cache.put(key, text.encode())
    _emit(text, _opt(args, "out"))
    return EXIT_OK


def transforms_values(kind: str, form: str, points: list, t: float | None, sign: int, X: float,
                      abscissa: float | None, height: float, A: int, tol: float) -> list:
    f = _parse_form(form)
    params = f.arch if f.arch is not None else LanglandsParams()
    if kind in ("V", "U"):
        if t is None:
            raise InputError("V and U need --t")
        contour = None if abscissa is None else ContourSpec(float(abscissa), float(height), 0)
        fn = afe_transform_V if kind == "V" else afe_transform_U
        vals = fn(np.asarray(points, dtype=float), t, GammaFactorKind("minus", params), contour, int(A), tol)
    elif kind == "Psi":
        if sign not in (1, -1):
            raise InputError("sign must be +1 or -1")
        vals = voronoi_Psi_exact(np.asarray(points, dtype=float), params, BumpFunction(X, 9.0), sign)
    else:
        raise InputError(f"unknown transform {kind!r}")
    return [[complex(v).real, complex(v).imag] for v in np.atleast_1d(vals)]


def _transforms_args(args, cfg) -> dict:
    return {
        "kind": args.kind,
        "form": args.form,
        "points": _float_list(args.points),
        "t": args.t,
        "sign": args.sign,
        "X": args.X,
        "abscissa": _setting(args, cfg, "contour_abscissa"),
        "height": float(_setting(args, cfg, "contour_height", 15.0)),
        "A": int(_setting(args, cfg, "A", 16)),
        "tol": float(_setting(args, cfg, "tolerance", 1e-9)),
    }


def cmd_transforms_eval(args, cfg):
    targs = _transforms_args(args, cfg)
    cache = _cache(args, cfg)
    key = canonical_key("transforms-eval", targs)
    if cache is not None and (hit := cache.get(key)) is not None:
        vals = json.loads(hit.value.decode())
    else:
        vals = transforms_values(**targs)
        if cache is not None:
            cache.put(key, json.dumps(vals).encode())
    _emit(_json({"args": targs, "values": vals}), _opt(args, "out"))
    return EXIT_OK


def _recompute(entry: CacheEntry):
    op, _, payload = entry.key.partition(":")
    a = json.loads(payload)
    if op == "transforms-eval":
        return transforms_values(**a), json.loads(entry.value.decode()), float(a["tol"])
    if op == "moment-predict":
        from .moments import predictions_to_csv

        rows = moment_rows(a["form"], a["p"], a["T"], a["M_rule"], a["derivative"])
        fresh = list(csv.reader(io.StringIO(predictions_to_csv(rows))))[1:]
        old = list(csv.reader(io.StringIO(entry.value.decode())))[1:]
        return [[float(v) for v in r] for r in fresh], [[float(v) for v in r] for r in old], 1e-9
    raise InputError(f"unknown cached operation {op!r}")


def cmd_cache_verify(args, cfg):
    cache = _cache(args, cfg)
    if cache is None:
        raise InputError("no cache directory configured (--cache-dir or cache_dir in the config)")
    entries = cache.entries()
    sample = random.Random(0).sample(entries, min(args.sample, len(entries)))
    report = []
    ok = True
    for e in sample:
        fresh, old, tol = _recompute(e)
        a, b = np.asarray(fresh, dtype=float), np.asarray(old, dtype=float)
        dev = float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b)))) if a.size else 0.0
        good = a.shape == b.shape and dev <= tol
        ok &= good
        report.append({"key": e.key, "deviation": dev, "passed": good})
    _emit(_json({"checked": len(sample), "passed": ok, "entries": report}), _opt(args, "out"))
    return EXIT_OK if ok else EXIT_CONTRACT


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    # SUPPRESS keeps a subcommand from resetting a flag given before it
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS, allow_abbrev=False)
    common.add_argument("--config", help="key=value config file (default $MM_CONFIG)")
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--tolerance", type=float)
    common.add_argument("--offline", action="store_true", help="never touch the network")
    common.add_argument("--cache-dir", dest="cache_dir")

    ap = argparse.ArgumentParser(prog="mm", description="GL(3) spectral-moment toolkit", parents=[common],
                                 allow_abbrev=False)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("kloosterman-table", parents=[common], allow_abbrev=False, help="CSV of S(a,b;c)")
    p.add_argument("--c-max", type=int, required=True)
    p.add_argument("--a-max", type=int, default=5)
    p.add_argument("--b-max", type=int, default=5)
    p.set_defaults(func=cmd_kloosterman_table)

    p = sub.add_parser("voronoi-check", parents=[common], allow_abbrev=False, help="both sides of the GL(3) Voronoi formula")
    p.add_argument("--form", default="sym2")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--c", type=int, default=2)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--X", type=float, default=50.0)
    p.add_argument("--sharpness", type=float, default=9.0)
    p.add_argument("--truncation", type=int)
    p.add_argument("--zero", action="store_true", help="use psi = 0")
    p.set_defaults(func=cmd_voronoi_check)

    p = sub.add_parser("kuznetsov-check", parents=[common], allow_abbrev=False, help="both sides of the Kuznetsov formula")
    p.add_argument("--corpus", help="maass v1 file (default: vendored corpus)")
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--T", type=float, default=9.0)
    p.add_argument("--M", type=float, default=2.0)
    p.add_argument("--parity", choices=("even", "odd"), default="even")
    p.add_argument("--c-max", type=int, default=500)
    p.set_defaults(func=cmd_kuznetsov_check)

    p = sub.add_parser("fetch-maass", parents=[common], allow_abbrev=False, help="Maass form data in the maass v1 format")
    p.add_argument("--min-t", type=float, default=0.0)
    p.add_argument("--max-t", type=float, default=30.0)
    p.add_argument("--n-coeffs", type=int, default=100)
    p.set_defaults(func=cmd_fetch_maass)

    p = sub.add_parser("moment-predict", parents=[common], allow_abbrev=False, help="predicted main terms over a T sweep")
    p.add_argument("--form", default="sym2")
    p.add_argument("--p", type=int, default=2)
    p.add_argument("--T", default="200", help="comma list or start:stop:step")
    p.add_argument("--M-rule", dest="M_rule", default="frac:0.2", help="frac:r, power:e or const:c")
    p.add_argument("--derivative", action="store_true")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_moment_predict)

    p = sub.add_parser("transforms-eval", parents=[common], allow_abbrev=False, help="V, U or Psi at given points")
    p.add_argument("--kind", choices=("V", "U", "Psi"), required=True)
    p.add_argument("--form", default="eis:0,0,0")
    p.add_argument("--points", required=True, help="y values (V, U) or x values (Psi)")
    p.add_argument("--t", type=float)
    p.add_argument("--sign", type=int, default=1)
    p.add_argument("--X", type=float, default=10.0, help="bump support [X, 2X] for Psi")
    p.set_defaults(func=cmd_transforms_eval)

    p = sub.add_parser("cache", parents=[common], allow_abbrev=False, help="disk cache maintenance")
    csub = p.add_subparsers(dest="cache_command", required=True)
    v = csub.add_parser("verify", parents=[common], allow_abbrev=False, help="recompute a sample of cached entries")
    v.add_argument("--sample", type=int, default=5)
    v.set_defaults(func=cmd_cache_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as ex:
        return EXIT_OK if ex.code == 0 else EXIT_INPUT
    try:
        cfg = load_config(_opt(args, "config"))
        return args.func(args, cfg)
    except (InputError, errors.ParseError, errors.ValidationError, errors.RangeError, errors.NetworkError,
            errors.SchemaDriftError, errors.MissingPrimeError, FileNotFoundError) as ex:
        print(f"mm: input error: {ex}", file=sys.stderr)
        return EXIT_INPUT
    except (errors.TruncationError, errors.AccuracyError, ContractFailure) as ex:
        print(f"mm: contract failure: {ex}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    sys.exit(main())
