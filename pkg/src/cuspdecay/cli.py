"""Command line entry point: ``cuspdecay <command> ...``.

Every report is CSV on stdout (or ``--out``): a ``# generated`` timestamp line,
a header row, then data.  Spaces and eigenbases are cached as JSON under the
cache directory (``$CUSPDECAY_CACHE``, default ``~/.cache/cuspdecay``).
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np
from filelock import FileLock

from . import hecke as _hecke
from .analytic import DEFAULT_PRIME_CUTOFF, petersson_delta_check
from .decomp import QuadraticFormSpec, SpecError, decompose_spec, lp_scan
from .hecke import Eigenform, default_precision, eigenforms
from .moments import TripleContext, dist_report, moment_sum
from .space import CuspSpace, cusp_space, dim_cusp, miller_basis

log = logging.getLogger("cuspdecay")

SCHEMA_VERSION = 1
CACHE_ENV = "CUSPDECAY_CACHE"


# configuration ----------------------------------------------------------------

@dataclass
class Config:
    precision_bits: int | None = None  # None: 64 + 2k
    residual_margin: int = 25
    prime_cutoff_P: int = DEFAULT_PRIME_CUTOFF
    cache_dir: str = ""
    jobs: int = 0  # 0: all cores
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.cache_dir:
            self.cache_dir = os.environ.get(CACHE_ENV) or str(Path.home() / ".cache" / "cuspdecay")
        self.validate()

    def validate(self):
        if self.precision_bits is not None and self.precision_bits < 64:
            raise ValueError(f"precision_bits must be >= 64, got {self.precision_bits}")
        if self.residual_margin < 5:
            raise ValueError(f"residual_margin must be >= 5, got {self.residual_margin}")
        if self.prime_cutoff_P < 100:
            raise ValueError("prime_cutoff_P must be >= 100")
        return self

    def precision(self, k):
        return default_precision(k) if self.precision_bits is None else self.precision_bits

    def workers(self):
        return self.jobs if self.jobs > 0 else (os.cpu_count() or 1)

    def tol(self, name, default):
        return float(self.tolerances.get(name, default))


def load_config(args):
    """Config from flags, then the JSON config file; file values that differ
    from an explicit flag win but are reported on stderr."""
    cfg = {}
    for name in ("precision_bits", "residual_margin", "prime_cutoff_P", "cache_dir", "jobs"):
        val = getattr(args, name, None)
        if val is not None:
            cfg[name] = val
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as fh:
            try:
                extra = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SpecError(f"config file {args.config}: line {exc.lineno}: {exc.msg}") from None
        known = {f.name for f in fields(Config)}
        for key, val in extra.items():
            if key not in known:
                raise SpecError(f"config file {args.config}: unknown key {key!r}")
            if key in cfg and cfg[key] != val:
                log.warning("config file overrides --%s: %r -> %r", key.replace("_", "-"), cfg[key], val)
            cfg[key] = val
    return Config(**cfg)


# cache ------------------------------------------------------------------------

class Cache:
    """JSON entries keyed by (kind, k, N, precision, schema version)."""

    def __init__(self, root):
        self.root = Path(root)

    def _path(self, key):
        name = "_".join(f"{k}{v}" for k, v in key.items())
        return self.root / f"{name}_v{SCHEMA_VERSION}.json"

    @staticmethod
    def checksum(payload):
        blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()

    def load(self, key):
        path = self._path(key)
        if not path.exists():
            return None
        try:
            with FileLock(str(path) + ".lock"):
                entry = json.loads(path.read_text(encoding="utf-8"))
            if entry.get("schema") != SCHEMA_VERSION or entry.get("key") != key:
                log.info("cache entry %s has a different schema or key; recomputing", path.name)
                return None
            if self.checksum(entry["payload"]) != entry.get("checksum"):
                log.warning("cache entry %s failed its checksum; recomputing", path.name)
                return None
            return entry
        except (OSError, ValueError, KeyError, TypeError) as exc:
            log.warning("cache entry %s unreadable (%s); recomputing", path.name, exc)
            return None

    def store(self, key, payload):
        self.root.mkdir(parents=True, exist_ok=True)
        path = self._path(key)
        entry = {"schema": SCHEMA_VERSION, "key": key, "payload": payload,
                 "checksum": self.checksum(payload)}
        tmp = path.with_suffix(".tmp")
        with FileLock(str(path) + ".lock"):
            tmp.write_text(json.dumps(entry, sort_keys=True), encoding="utf-8")
            os.replace(tmp, path)
        return entry


def _mpf_to_str(x):
    return str(_hecke._mpf_to_fraction(x))


def cached_space(cache, k, N):
    key = {"kind": "space", "k": k, "N": N}
    entry = cache.load(key)
    if entry is not None:
        rows = tuple([int(c) for c in r] for r in entry["payload"]["rows"])
        from .exactq import QSeries

        miller = tuple(QSeries.from_ints(k, r) for r in rows)
        return CuspSpace(k, len(rows), N, miller, rows), entry["checksum"], "cache"
    space = miller_basis(k, N)
    entry = cache.store(key, {"rows": [[str(c) for c in r] for r in space.rows]})
    return space, entry["checksum"], "computed"


def cached_eigenbasis(cache, k, N, precision):
    """Eigenbasis from the cache when present; also registered for in-process reuse."""
    key = {"kind": "eigen", "k": k, "N": N, "prec": precision}
    entry = cache.load(key)
    if entry is not None:
        basis = []
        half = mpmath.mpf(k - 1) / 2
        for rec in entry["payload"]["forms"]:
            with mpmath.workprec(precision):
                a = tuple(mpmath.mpf(Fraction(s).numerator) / Fraction(s).denominator for s in rec["a"])
            with mpmath.workprec(64):
                lam = np.zeros(len(a))
                for n in range(1, len(a)):
                    lam[n] = float(a[n] / mpmath.mpf(n) ** half)
            basis.append(Eigenform(k=k, index=rec["index"], a=a, lam=lam, precision=precision,
                                   residual=rec["residual"],
                                   charpoly=tuple(int(c) for c in entry["payload"]["charpoly"])))
        source = "cache"
    else:
        basis = eigenforms(cusp_space(k, N), precision) if dim_cusp(k) else []
        payload = {
            "forms": [{"index": h.index, "residual": h.residual, "a": [_mpf_to_str(x) for x in h.a]}
                      for h in basis],
            "charpoly": [str(c) for c in (basis[0].charpoly if basis else ())],
        }
        cache.store(key, payload)
        source = "computed"
    if basis:
        with _hecke._BASES_LOCK:
            cur = _hecke._BASES.get((k, precision))
            if cur is None or cur[0].trunc < basis[0].trunc:
                _hecke._BASES[(k, precision)] = basis
    return basis, source


# output -----------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        v = v.item()
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    if isinstance(v, (mpmath.mpf,)):
        return mpmath.nstr(v, 17)
    return str(v)


def write_csv(rows, header, out=None):
    fh = open(out, "w", encoding="utf-8", newline="") if out else sys.stdout
    try:
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
        fh.write(f"# generated {stamp}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(r[h]) for h in header])
    finally:
        if out:
            fh.close()


def _parse_p_list(text):
    try:
        ps = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad p list {text!r}") from None
    if not ps or any(p <= 0 for p in ps):
        raise argparse.ArgumentTypeError("p values must be positive")
    return ps


def _parse_range(text):
    """A:B:STEP or a comma list."""
    try:
        if ":" in text:
            a, b, *rest = (int(t) for t in text.split(":"))
            step = rest[0] if rest else 2
            return list(range(a, b + 1, step))
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad weight range {text!r}") from None


def _even_weight(text):
    try:
        k = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"weight must be an integer, got {text!r}") from None
    if k % 2 or k < 0:
        raise argparse.ArgumentTypeError(f"weight {k} must be even and nonnegative (level one)")
    return k


# commands -------------------------------------------------------------------

def cmd_basis(args, cfg):
    cache = Cache(cfg.cache_dir)
    k = args.weight
    d = dim_cusp(k)
    N = args.trunc if args.trunc is not None else max(2 * d, d + 1, 2)
    if d == 0:
        print(f"dim=0 weight={k}")
        return 0
    space, checksum, source = cached_space(cache, k, N)
    print(f"dim={space.dim} weight={k} trunc={space.trunc} source={source} checksum={checksum}")
    rows = []
    for i, r in enumerate(space.rows):
        tail = [c for c in r[space.dim + 1:space.dim + 4]]
        rows.append({"index": i, "pivot": i + 1, "next_coeffs": " ".join(str(c) for c in tail)})
    write_csv(rows, ["index", "pivot", "next_coeffs"], args.out)
    return 0


def cmd_eigen(args, cfg):
    k = args.weight
    d = dim_cusp(k)
    rows = []
    if d:
        N = args.trunc if args.trunc is not None else max(2 * d, 30)
        basis, _ = cached_eigenbasis(Cache(cfg.cache_dir), k, N, cfg.precision(k))
        for h in basis:
            with mpmath.workprec(h.precision):
                a2 = mpmath.nstr(h.a[2], 20)
            rows.append({"index": h.index, "a2": a2, "lambda2": float(h.lam[2]),
                         "residual": h.residual, "precision": h.precision})
    write_csv(rows, ["index", "a2", "lambda2", "residual", "precision"], args.out)
    return 0


def cmd_decompose(args, cfg):
    with open(args.spec, encoding="utf-8") as fh:
        spec = QuadraticFormSpec.from_json(fh.read())
    dec = decompose_spec(spec, args.p, margin=cfg.residual_margin,
                         tol=cfg.tol("decompose_residual", 1e-10))
    rows = []
    for r in range(dec.dim):
        c, inner = complex(dec.c[r]), complex(dec.inner[r])
        rows.append({"quantity": "c", "index": r, "real": c.real, "imag": c.imag})
        rows.append({"quantity": "inner", "index": r, "real": inner.real, "imag": inner.imag})
    for p in args.p:
        rows.append({"quantity": "lp", "index": p, "real": dec.lp[p], "imag": 0.0})
    rows.append({"quantity": "residual", "index": "", "real": dec.residual, "imag": 0.0})
    a2 = complex(dec.second_coeff)
    rows.append({"quantity": "second_coeff", "index": 2, "real": a2.real, "imag": a2.imag})
    write_csv(rows, ["quantity", "index", "real", "imag"], args.out)
    return 0


def _scan_one(task):
    k, ps, mode, margin = task
    return lp_scan([k], ps, mode, margin=margin)


def _run_tasks(fn, tasks, cfg):
    n = min(cfg.workers(), len(tasks))
    if n <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, tasks))


def cmd_scan(args, cfg):
    tasks = [(k, args.p, args.mode, cfg.residual_margin) for k in args.weights]
    rows = [row for part in _run_tasks(_scan_one, tasks, cfg) for row in part]
    write_csv(rows, ["k", "p", "mode", "value", "ref_log8", "ref_log4"], args.out)
    return 0


def _petersson_one(task):
    k, max_mn, P, strict = task
    out = []
    if dim_cusp(k) == 0:
        return out
    from .hecke import hecke_basis

    basis = hecke_basis(k, max(P, max_mn))
    for m in range(1, max_mn + 1):
        for n in range(m, max_mn // m + 1):
            val = petersson_delta_check(k, m, n, basis=basis, P=P, strict=False)
            delta = 1.0 if m == n else 0.0
            out.append({"k": k, "m": m, "n": n, "value": val, "delta": delta,
                        "abs_err": abs(val - delta), "in_range": m * n * 10 ** 4 <= k * k})
    return out


def cmd_petersson_check(args, cfg):
    weights = args.weight
    tasks = []
    for k in weights:
        mmax = args.max_mn if args.max_mn is not None else max(1, k * k // 10 ** 4)
        tasks.append((k, mmax, cfg.prime_cutoff_P, True))
    rows = [row for part in _run_tasks(_petersson_one, tasks, cfg) for row in part]
    write_csv(rows, ["k", "m", "n", "value", "delta", "abs_err", "in_range"], args.out)
    return 0


def cmd_moments(args, cfg):
    res = moment_sum(args.l, args.weights, P=min(cfg.prime_cutoff_P, args.P))
    rows = [{"k": r.k, "l": r.l, "dim": r.dim, "moment": r.moment, "reference": r.reference,
             "mu": r.mu, "B": " ".join(str(b) for b in r.B), "ibp_residual": r.ibp_residual}
            for r in res]
    write_csv(rows, ["k", "l", "dim", "moment", "reference", "mu", "B", "ibp_residual"], args.out)
    return 0


def cmd_dist(args, cfg):
    from .hecke import hecke_basis

    k = args.weight
    k1 = args.k1
    k2 = k - k1
    if dim_cusp(k1) == 0 or dim_cusp(k2) == 0 or dim_cusp(k) == 0:
        raise SpecError(f"need nonzero S_{k1}, S_{k2} and S_{k}")
    x = k ** args.x_exp
    N = int(x) + 1
    ctx = TripleContext(hecke_basis(k1, N)[0], hecke_basis(k2, N)[0], hecke_basis(k, N), x, args.l)
    rep = dist_report(ctx)
    rows = [
        {"quantity": "dim", "V": "", "value": rep.dim},
        {"quantity": "mean", "V": "", "value": rep.mean},
        {"quantity": "variance", "V": "", "value": rep.variance},
        {"quantity": "predicted_variance", "V": "", "value": rep.predicted_variance},
        {"quantity": "predicted_variance_smoothed", "V": "", "value": rep.predicted_variance_smoothed},
        {"quantity": "window_sum", "V": "", "value": rep.window["sum"]},
        {"quantity": "window_reference", "V": "", "value": rep.window["reference"]},
    ]
    rows += [{"quantity": "A", "V": V, "value": c} for V, c in rep.tail_counts.items()]
    print(f"# k={k} k1={k1} k2={k2} x={x:.6g} l={args.l}", file=sys.stderr)
    write_csv(rows, ["quantity", "V", "value"], args.out)
    return 0


def _global_options(parser, default):
    parser.add_argument("--config", default=default, help="JSON config file (values override flags, with a warning)")
    parser.add_argument("--precision-bits", dest="precision_bits", type=int, default=default)
    parser.add_argument("--residual-margin", dest="residual_margin", type=int, default=default)
    parser.add_argument("--prime-cutoff", dest="prime_cutoff_P", type=int, default=default)
    parser.add_argument("--cache-dir", dest="cache_dir", default=default)
    parser.add_argument("--jobs", type=int, default=default)
    parser.add_argument("-v", "--verbose", action="store_true", default=default)


def build_parser():
    ap = argparse.ArgumentParser(prog="cuspdecay", description=__doc__.splitlines()[0],
                                 allow_abbrev=False)
    _global_options(ap, None)
    # the same options after the subcommand; SUPPRESS keeps them from
    # clobbering values given before it
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    _global_options(common, argparse.SUPPRESS)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_, parents=[common], allow_abbrev=False)
        p.add_argument("--out", help="write CSV here instead of stdout")
        p.set_defaults(func=fn)
        return p

    p = add("basis", cmd_basis, "Miller basis of S_k")
    p.add_argument("--weight", type=_even_weight, required=True)
    p.add_argument("--trunc", type=int)
    p = add("eigen", cmd_eigen, "Hecke eigenbasis of S_k")
    p.add_argument("--weight", type=_even_weight, required=True)
    p.add_argument("--trunc", type=int)
    p = add("decompose", cmd_decompose, "decompose a quadratic form given as JSON")
    p.add_argument("--spec", required=True)
    p.add_argument("--p", type=_parse_p_list, default=[1.0, 2.0])
    p = add("scan", cmd_scan, "l^p norms of normalized products across weights")
    p.add_argument("--weights", type=_parse_range, required=True)
    p.add_argument("--p", type=_parse_p_list, default=[1.0])
    p.add_argument("--mode", choices=["products", "squares"], default="squares")
    p = add("petersson-check", cmd_petersson_check, "Petersson formula against delta_{m=n}")
    p.add_argument("--weight", type=_parse_range, required=True)
    p.add_argument("--max-mn", dest="max_mn", type=int)
    p = add("moments", cmd_moments, "Watson-surrogate moments")
    p.add_argument("--l", type=float, default=1.0)
    p.add_argument("--weights", type=_parse_range, required=True)
    p.add_argument("--P", type=int, default=1000, help="prime cutoff for L(1, sym^2)")
    p = add("dist", cmd_dist, "distribution of P(h; x, x)")
    p.add_argument("--weight", type=_even_weight, required=True)
    p.add_argument("--x-exp", dest="x_exp", type=float, default=0.5)
    p.add_argument("--l", type=float, default=1.0)
    p.add_argument("--k1", type=_even_weight, default=12)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
    except (ValueError, OSError) as exc:
        ap.error(str(exc))
    for attr in ("weights",):
        for k in getattr(args, attr, None) or []:
            if k % 2:
                ap.error(f"weight {k} must be even (level one)")
    if isinstance(getattr(args, "weight", None), list):
        for k in args.weight:
            if k % 2:
                ap.error(f"weight {k} must be even (level one)")
    try:
        return args.func(args, cfg)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
