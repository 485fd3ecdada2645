"""Command-line front end: resolutions, cohomology tables, checks and rank reports."""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .cech import CohomologyError, CohomologyTable, table
from .exactalg import DEFAULT_EXACT_THRESHOLD, DEFAULT_SEED, MatrixTooLargeError, RankPolicy
from .instanton import (LongRunRequired, ResolutionError, build_resolution, chi_E, chi_EE, chi_F,
                        e_complex, ee_complex, instanton_axioms, moduli_dimension_check,
                        s2_from_ee, verify_coh0, verify_exactness, verify_lepotier, line_table,
                        _guard)
from .psheaf import FreeSheaf, Poly, PolyMatrix, chi_line
from .ulrich import (VeroneseParams, check_ulrich, natural_cohomology, rank_constraint,
                     rank_divisibility, ulrich_twists)

log = logging.getLogger("sl2ulrich")

CACHE_ENV = "SL2ULRICH_CACHE_DIR"
CACHE_SCHEMA = 1
SHEAVES = ("E", "EtensorE", "S2E", "LineBundle")
CHECKS = ("instanton", "coh0", "lepotier", "moduli-dim", "ulrich", "natural")

EXIT_OK, EXIT_FALSIFIED, EXIT_ERROR = 0, 1, 2


# --- matrix files --------------------------------------------------------------


def matrix_to_dict(A: PolyMatrix) -> dict:
    entries = []
    for (i, j) in sorted(A.entries):
        terms = sorted(A.entries[i, j].terms.items(), reverse=True)
        entries.append([i, j, [[c.numerator, c.denominator, *m] for m, c in terms]])
    return {
        "rows": A.target.rank,
        "cols": A.source.rank,
        "source_twists": list(A.source.twists),
        "target_twists": list(A.target.twists),
        "entries": entries,
    }


def matrix_from_dict(data: dict) -> PolyMatrix:
    src, tgt = FreeSheaf(tuple(data["source_twists"])), FreeSheaf(tuple(data["target_twists"]))
    if src.rank != data["cols"] or tgt.rank != data["rows"]:
        raise ValueError("matrix shape does not match its twists")
    entries = {}
    for i, j, terms in data["entries"]:
        entries[i, j] = Poly({tuple(t[2:]): Fraction(t[0], t[1]) for t in terms})
    return PolyMatrix(src, tgt, entries)


def dump_json(obj, path: Path):
    """Deterministic JSON, written atomically."""
    text = json.dumps(obj, indent=1, sort_keys=True, ensure_ascii=False) + "\n"
    atomic_write(Path(path), text)


def atomic_write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- result cache ----------------------------------------------------------------


class ResultCache:
    """One JSON file per (sheaf, m, twist, truncation, primes) cohomology row."""

    def __init__(self, root: Path, bound: int | None = None):
        self.root = Path(root)
        self.bound = bound
        self.hits = 0
        self.misses = 0

    def key_fields(self, sheaf: str, m: int, t: int, policy: RankPolicy) -> dict:
        return {
            "version": __version__,
            "schema": CACHE_SCHEMA,
            "sheaf": sheaf,
            "m": m,
            "twist": t,
            "truncation": self.bound if self.bound is not None else "auto",
            "mode": policy.mode,
            "primes": list(policy.primes),
        }

    @staticmethod
    def key(fields: dict) -> str:
        return hashlib.sha256(json.dumps(fields, sort_keys=True).encode()).hexdigest()

    def path(self, key: str) -> Path:
        return self.root / f"{key}.json"

    def get(self, sheaf: str, m: int, t: int, policy: RankPolicy) -> dict | None:
        fields = self.key_fields(sheaf, m, t, policy)
        key = self.key(fields)
        p = self.path(key)
        if not p.exists():
            return None
        try:
            entry = json.loads(p.read_text(encoding="utf-8"))
            if entry["schema"] != CACHE_SCHEMA or entry["key"] != key or entry["fields"] != fields:
                raise ValueError("key mismatch")
            payload = entry["payload"]
            h = tuple(int(x) for x in payload["h"])
            if len(h) != 4:
                raise ValueError("bad payload")
            return {"h": h, "bound": int(payload["bound"])}
        except (ValueError, KeyError, TypeError) as exc:
            log.warning("deleting corrupt cache entry %s (%s)", p.name, exc)
            p.unlink(missing_ok=True)
            return None

    def put(self, sheaf: str, m: int, t: int, policy: RankPolicy, h, bound: int):
        fields = self.key_fields(sheaf, m, t, policy)
        key = self.key(fields)
        p = self.path(key)
        if p.exists():
            return
        entry = {"schema": CACHE_SCHEMA, "key": key, "fields": fields,
                 "payload": {"h": list(h), "bound": bound}, "timestamp": time.time()}
        dump_json(entry, p)

    # interface used by the instanton checks
    def get_table(self, sheaf: str, m: int, ts, policy: RankPolicy):
        rows = {}
        for t in ts:
            hit = self.get(sheaf, m, t, policy)
            if hit is None:
                return None
            rows[t] = hit
        self.hits += len(rows)
        log.info("cached: %s m=%d twists %s", sheaf, m, list(ts))
        return _assemble(sheaf, m, rows, policy)

    def put_table(self, tab: CohomologyTable, policy: RankPolicy):
        bounds = tab.provenance.get("bounds", {})
        for t in tab.twists:
            self.put(tab.sheaf, tab.m, t, policy, tab[t], int(bounds.get(str(t), 0)))


def _assemble(sheaf: str, m: int, rows: dict, policy: RankPolicy) -> CohomologyTable:
    tab = CohomologyTable(sheaf, m, {t: r["h"] for t, r in rows.items()})
    tab.provenance = {
        "method": "reduced",
        "bounds": {str(t): rows[t]["bound"] for t in sorted(rows)},
        "euler_certified": True,
        "stability": "B and B+1 agree",
        **{"rank_" + k: v for k, v in policy.describe().items()},
    }
    return tab


def computed_table(sheaf: str, m: int, ts, policy: RankPolicy, bound: int | None = None,
                   jobs: int = 1, cache: ResultCache | None = None) -> CohomologyTable:
    """Table of E or EtensorE over ``ts``, reusing cached rows where present."""
    complex_ = {"E": e_complex, "EtensorE": ee_complex}[sheaf](m)
    ts = sorted(set(ts))
    rows, missing = {}, []
    for t in ts:
        hit = cache.get(sheaf, m, t, policy) if cache else None
        if hit is None:
            missing.append(t)
        else:
            rows[t] = hit
    if rows:
        log.info("cached: %s m=%d twists %s", sheaf, m, sorted(rows))
        if cache:
            cache.hits += len(rows)
    if missing:
        log.info("computing %s m=%d twists %s", sheaf, m, missing)
        fresh = table(complex_, missing, sheaf=sheaf, m=m, bound=bound, policy=policy, jobs=jobs)
        for t in missing:
            rows[t] = {"h": fresh[t], "bound": int(fresh.provenance["bounds"][str(t)])}
            if cache:
                cache.misses += 1
                cache.put(sheaf, m, t, policy, rows[t]["h"], rows[t]["bound"])
    return _assemble(sheaf, m, rows, policy)


def sheaf_table(sheaf: str, m: int, ts, policy: RankPolicy, bound=None, jobs=1, cache=None,
                n: int = 0) -> CohomologyTable:
    if sheaf == "LineBundle":
        return line_table(n, ts)
    if sheaf == "S2E":
        return s2_from_ee(computed_table("EtensorE", m, ts, policy, bound, jobs, cache))
    return computed_table(sheaf, m, ts, policy, bound, jobs, cache)


def closed_form_chi(sheaf: str, m: int, n: int = 0):
    return {
        "E": lambda t: chi_E(m, t),
        "EtensorE": lambda t: chi_EE(m, t),
        "S2E": lambda t: chi_F(m, t),
        "LineBundle": lambda t: chi_line(n + t),
    }[sheaf]


# --- argument parsing ------------------------------------------------------------


def parse_range(text: str) -> list[int]:
    """``a..b`` (inclusive) or a single integer."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
        else:
            lo = hi = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad twist range {text!r}; expected a..b") from None
    if lo > hi:
        raise argparse.ArgumentTypeError(f"empty twist range {text!r}")
    return list(range(lo, hi + 1))


def positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def default_range(m: int) -> list[int]:
    return list(range(-2 * m - 6, 2 * m + 3))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED,
                        help=f"seed for prime and point sampling (default {DEFAULT_SEED})")
    common.add_argument("--mode", choices=("auto", "exact", "modular"), default="auto",
                        help="rank certification: two primes, exact, or both when small (default auto)")
    common.add_argument("--exact-threshold", type=positive_int, default=DEFAULT_EXACT_THRESHOLD,
                        help=f"nonzero-entry limit for exact elimination (default {DEFAULT_EXACT_THRESHOLD})")
    common.add_argument("--bound", type=positive_int, default=None,
                        help="starting Cech truncation bound (default: chosen per twist)")
    common.add_argument("--cache-dir", default=None,
                        help=f"result cache directory (default ${CACHE_ENV} or ~/.cache/sl2ulrich)")
    common.add_argument("--no-cache", action="store_true", help="do not read or write the cache")
    common.add_argument("--jobs", type=positive_int, default=1, help="parallel twist jobs (default 1)")
    common.add_argument("--long", action="store_true", help="allow the long m >= 3 runs")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(
        prog="sl2ulrich",
        description="Exact cohomology of SL2-equivariant instanton bundles on P^3 and "
                    "Ulrich ranks of Veronese varieties.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("resolution", parents=[common],
                       help="reconstruct psi and kappa and write them as JSON")
    p.add_argument("--m", type=positive_int, required=True, help="instanton index m >= 1")
    p.add_argument("--out", default=".", help="output directory (default .)")

    p = sub.add_parser("cohomology", parents=[common], help="cohomology table of a sheaf")
    p.add_argument("--sheaf", choices=SHEAVES, required=True)
    p.add_argument("--m", type=positive_int, default=1, help="instanton index (default 1)")
    p.add_argument("--n", type=int, default=0, help="LineBundle degree: O(n) (default 0)")
    p.add_argument("--range", type=parse_range, default=None, dest="twists",
                   help="twists a..b (default -2m-6..2m+2)")
    p.add_argument("--format", choices=("json", "csv", "md"), default="md")
    p.add_argument("--out", default=None, help="also write the table JSON here")

    p = sub.add_parser("check", parents=[common], help="run a verification and write a certificate")
    p.add_argument("what", choices=CHECKS)
    p.add_argument("--m", type=positive_int, default=1, help="instanton index (default 1)")
    p.add_argument("--range", type=parse_range, default=None, dest="twists",
                   help="twists for 'natural' (default -2m-6..2m+2)")
    p.add_argument("--out", default=None,
                   help="certificate path (default certificate-<what>-m<m>.json)")

    p = sub.add_parser("ranks", help="Ulrich ranks of the Veronese variety X^n_d")
    p.add_argument("--n", type=positive_int, required=True)
    p.add_argument("--d", type=positive_int, required=True)
    return parser


def make_policy(args) -> RankPolicy:
    return RankPolicy(mode=args.mode, seed=args.seed, exact_threshold=args.exact_threshold)


def make_cache(args) -> ResultCache | None:
    if args.no_cache:
        return None
    root = args.cache_dir or os.environ.get(CACHE_ENV) or Path.home() / ".cache" / "sl2ulrich"
    return ResultCache(Path(root), args.bound)


# --- commands -------------------------------------------------------------------


def cmd_resolution(args) -> int:
    res = build_resolution(args.m, args.seed)
    out = Path(args.out)
    dump_json(matrix_to_dict(res.psi), out / f"psi_m{args.m}.json")
    dump_json(matrix_to_dict(res.kappa), out / f"kappa_m{args.m}.json")
    exact = verify_exactness(res, policy=make_policy(args))
    ok = "OK" if set(res.point_ranks) == {3 * args.m} else "FAILED"
    print(f"solution spaces: {res.psi_solutions}, {res.kappa_solutions}; "
          f"constant rank {3 * args.m}: {ok}")
    print(f"exactness up to degree {exact.data['degree_bound']}: "
          f"{'OK' if exact.passed else 'FAILED at ' + str(exact.witness)}")
    print(f"wrote {out / f'psi_m{args.m}.json'} and {out / f'kappa_m{args.m}.json'}")
    return EXIT_OK if exact.passed else EXIT_FALSIFIED


def cmd_cohomology(args) -> int:
    m = args.m
    ts = args.twists or default_range(m)
    if args.sheaf != "LineBundle":
        _guard(m, args.long)
    tab = sheaf_table(args.sheaf, m, ts, make_policy(args), args.bound, args.jobs,
                      make_cache(args), n=args.n)
    bad = tab.check_euler(closed_form_chi(args.sheaf, m, args.n))
    if bad:
        raise CohomologyError(f"Euler characteristic disagrees with the closed form at {bad}")
    if args.out:
        dump_json(tab.to_dict(), Path(args.out))
    if args.format == "json":
        sys.stdout.write(json.dumps(tab.to_dict(), indent=1, sort_keys=True) + "\n")
    else:
        sys.stdout.write(tab.render(args.format))
    return EXIT_OK


def _ulrich_certificate(m: int, policy, cache, args) -> dict:
    _guard(m, args.long)
    d = 2 * m + 1
    s2 = sheaf_table("S2E", m, ulrich_twists(d), policy, args.bound, args.jobs, cache)
    cert = check_ulrich(s2, d)
    out = cert.to_dict()
    out.update({"name": "ulrich", "m": m, "witness": None if cert.passed else
                f"H* nonzero at twist {cert.failed_twists[0]}"})
    return out


def _natural_certificate(m: int, policy, cache, args) -> dict:
    _guard(m, args.long)
    ts = args.twists or default_range(m)
    s2 = sheaf_table("S2E", m, ts, policy, args.bound, args.jobs, cache)
    verdict, bad = natural_cohomology(s2, ts)
    return {"name": "natural", "m": m, "sheaf": "S2E", "twists": ts, "passed": verdict,
            "violations": {str(t): list(s2[t]) for t in bad},
            "witness": None if verdict else f"twist {bad[0]}: h = {list(s2[bad[0]])}",
            "table": s2.to_dict()}


def cmd_check(args) -> int:
    m, policy, cache = args.m, make_policy(args), make_cache(args)
    if args.what == "instanton":
        _guard(m, args.long, limit=3)
        cert = instanton_axioms(m, policy)
        exact = verify_exactness(build_resolution(m, args.seed), policy=policy)
        cert.checks.extend(exact.checks)
        data = cert.to_dict()
    elif args.what in ("coh0", "lepotier", "moduli-dim"):
        fn = {"coh0": verify_coh0, "lepotier": verify_lepotier,
              "moduli-dim": moduli_dimension_check}[args.what]
        data = fn(m, args.long, policy, cache).to_dict()
    elif args.what == "ulrich":
        data = _ulrich_certificate(m, policy, cache, args)
    else:
        data = _natural_certificate(m, policy, cache, args)
    data["seed"] = args.seed
    out = Path(args.out or f"certificate-{args.what}-m{m}.json")
    dump_json(data, out)
    if data["passed"]:
        print(f"{args.what} m={m}: verified (certificate {out})")
        return EXIT_OK
    print(f"{args.what} m={m}: FALSIFIED, witness: {data['witness']} (certificate {out})")
    return EXIT_FALSIFIED


def ranks_report(n: int, d: int) -> list[str]:
    X = VeroneseParams(n, d)
    rc = rank_constraint(n, d)
    name = f"X_{d}" if n == 3 else f"X^{n}_{d}"
    lines = [f"{name} in P^{X.ambient_dim}"]
    if n == 3 and d >= 2:
        lines.append(f"Ur({name}) = {rc.describe()} (threefold classification, d mod 6 = {d % 6})")
    elif rc.complete:
        lines.append(f"Ur({name}) = {rc.describe()}")
    else:
        lines.append(f"every Ulrich rank divisible by {rc.modulus}; completeness unknown")
        lines.append(f"known: {rank_divisibility(n, d)} | r for every Ulrich rank r")
    return lines


def cmd_ranks(args) -> int:
    for line in ranks_report(args.n, args.d):
        print(line)
    return EXIT_OK


COMMANDS = {"resolution": cmd_resolution, "cohomology": cmd_cohomology,
            "check": cmd_check, "ranks": cmd_ranks}


def _join_ranges(argv: list[str]) -> list[str]:
    # let "--range -6..3" through argparse, which would read "-6..3" as an option
    out, it = [], iter(argv)
    for tok in it:
        if tok == "--range":
            nxt = next(it, None)
            out.append(tok if nxt is None else f"--range={nxt}")
        else:
            out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_join_ranges(sys.argv[1:] if argv is None else list(argv)))
    logging.basicConfig(level=logging.DEBUG if getattr(args, "verbose", False) else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except LongRunRequired as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except MatrixTooLargeError as exc:
        print(f"error: {exc}; rerun with --mode modular or auto", file=sys.stderr)
        return EXIT_ERROR
    except (CohomologyError, ResolutionError, ArithmeticError, KeyError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
