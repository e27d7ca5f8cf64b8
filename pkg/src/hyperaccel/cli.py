"""Command-line entry point: ``hyperaccel <command> [selectors] [options]``.

Exit status is 0 when every selected check passes, 1 when some check
fails, and 2 for usage errors (bad flags, unknown ids, unreadable catalog).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

from .accelerate import (
    SeriesInstance,
    accelerated_partial_sum,
    emit_chu_style,
    naive_partial_sum,
    sum_to_digits,
    terms_for_digits,
)
from .catalog import Catalog, check_display, default_catalog_path, load_catalog, reference_for, validate_entry
from .certify import match_published_recursion, verify_certificate
from .errors import HyperAccelError
from .exact import format_rational
from .refconst import FixedDecimal, digits_agree

COMMANDS = ("verify", "evaluate", "emit", "compare", "bench", "list")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    digits: int = 30
    terms: int | None = None
    entries: list = field(default_factory=list)
    families: list = field(default_factory=list)
    all: bool = False
    catalog: str | None = None
    format: str = "text"
    jobs: int = 1

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.digits < 1:
            raise UsageError("--digits must be at least 1")
        if self.terms is not None and self.terms < 1:
            raise UsageError("--terms must be at least 1")
        if self.format not in ("text", "jsonl"):
            raise UsageError("--format is text or jsonl")
        if self.jobs < 1:
            raise UsageError("--jobs must be at least 1")


def decimal(x: Fraction, digits: int) -> str:
    """x truncated toward zero to ``digits`` places."""
    neg = x < 0
    m = abs(x) * 10 ** digits
    s = str(FixedDecimal(m.numerator // m.denominator, digits))
    return "-" + s if neg else s


@lru_cache(maxsize=None)
def _catalog(path: str) -> Catalog:
    return load_catalog(Path(path))


def _catalog_path(cfg: RunConfig) -> str:
    return str(cfg.catalog) if cfg.catalog else str(default_catalog_path())


# ---------------------------------------------------------------------------
# per-item work; top-level functions so they can run in worker processes


def _verify_family(path: str, fid: str, cfg: RunConfig) -> dict:
    cat = _catalog(path)
    f = cat.families[fid]
    holds = verify_certificate(f.term, f.certificate).holds
    matches = f.stored is None or match_published_recursion(f.recursion, f.stored)
    return {
        "kind": "family",
        "id": fid,
        "passed": holds and matches,
        "certificate": holds,
        "recursion": matches,
        "rate": format_rational(f.rate),
        "r": f.certificate.r,
        "source": f.source,
    }


def _evaluate_entry(path: str, eid: str, cfg: RunConfig) -> dict:
    cat = _catalog(path)
    e = cat.entry(eid)
    rep = validate_entry(e, cfg.digits, cat, terms=cfg.terms)
    ref = reference_for(e.target, cfg.digits)
    return {
        "kind": "entry",
        "id": eid,
        "passed": rep.passed,
        "target": str(e.target),
        "digits": rep.digits,
        "required": cfg.digits,
        "terms": rep.terms,
        "value": decimal(rep.value, cfg.digits),
        "reference": decimal(ref.as_fraction(), cfg.digits),
    }


def _emit_entry(path: str, eid: str, cfg: RunConfig) -> dict:
    cat = _catalog(path)
    e = cat.entry(eid)
    if e.family is None:
        return {"kind": "entry", "id": eid, "passed": True, "emitted": None,
                "displayed": e.displayed.render() if e.displayed else None, "shift": None, "scale": None}
    s = emit_chu_style(cat.instance(e))
    al = check_display(e, cat) if e.displayed is not None else None
    shifted_ok = al is not None and (al[0] == 0 or "display-shifted" in e.flags)
    return {
        "kind": "entry",
        "id": eid,
        "passed": e.displayed is None or shifted_ok,
        "emitted": s.render(),
        "displayed": e.displayed.render() if e.displayed else None,
        "shift": al[0] if al else None,
        "scale": format_rational(al[1]) if al else None,
    }


def _compare_entry(path: str, eid: str, cfg: RunConfig) -> dict:
    cat = _catalog(path)
    e = cat.entry(eid)
    if e.family is None:
        return {"kind": "entry", "id": eid, "passed": True, "budgets": [], "note": "numeric-only"}
    inst = cat.instance(e)
    series = emit_chu_style(inst)
    exact, _ = sum_to_digits(series, cfg.digits + 10)
    ref = FixedDecimal((exact * 10 ** (cfg.digits + 10)).__floor__(), cfg.digits + 10)
    budgets = [cfg.terms] if cfg.terms else [5, 10, 20, 40]
    rows = []
    ok = True
    for J in budgets:
        acc = digits_agree(accelerated_partial_sum(inst, J), ref)
        nai = digits_agree(naive_partial_sum(inst, J), ref)
        rows.append({"terms": J, "accelerated": acc, "naive": nai})
        ok = ok and acc >= nai
    return {"kind": "entry", "id": eid, "passed": ok, "value": decimal(exact, cfg.digits), "budgets": rows}


def _bench_entry(path: str, eid: str, cfg: RunConfig) -> dict:
    cat = _catalog(path)
    e = cat.entry(eid)
    t0 = time.perf_counter()
    rep = validate_entry(e, cfg.digits, cat, terms=cfg.terms)
    dt = time.perf_counter() - t0
    rate = e.displayed.rate if e.displayed is not None else cat.families[e.family].rate
    return {
        "kind": "entry",
        "id": eid,
        "passed": rep.passed,
        "digits": rep.digits,
        "terms": rep.terms,
        "digits_per_term": round(rep.digits / rep.terms, 4),
        "rate": format_rational(rate),
        "predicted_terms": terms_for_digits(rate, cfg.digits),
        "seconds": round(dt, 4),
    }


_WORK = {
    "verify": _verify_family,
    "evaluate": _evaluate_entry,
    "emit": _emit_entry,
    "compare": _compare_entry,
    "bench": _bench_entry,
}


# ---------------------------------------------------------------------------
# text rendering


def _text(cmd: str, rec: dict) -> str:
    status = "PASS" if rec["passed"] else "FAIL"
    rid = rec["id"]
    if cmd == "verify":
        return (f"{status} family {rid}: certificate {'holds' if rec['certificate'] else 'FAILS'}, "
                f"recursion {'matches' if rec['recursion'] else 'DIFFERS'}, rate {rec['rate']}, r={rec['r']}")
    if cmd == "evaluate":
        return (f"{status} {rid} = {rec['target']}\n  value     {rec['value']}\n  reference {rec['reference']}\n"
                f"  {rec['digits']} digits agree ({rec['required']} required), {rec['terms']} terms")
    if cmd == "emit":
        out = f"{status} {rid}"
        if rec["emitted"]:
            out += f"\n  emitted   {rec['emitted']}"
        if rec["displayed"]:
            out += f"\n  displayed {rec['displayed']}"
        if rec["shift"] is not None:
            out += f"\n  displayed term j+{rec['shift']} = {rec['scale']} * emitted term j"
        return out
    if cmd == "compare":
        if not rec["budgets"]:
            return f"SKIP {rid}: numeric-only entry"
        rows = ", ".join(f"J={b['terms']}: {b['accelerated']} vs {b['naive']}" for b in rec["budgets"])
        return f"{status} {rid}: digits accelerated vs naive; {rows}"
    if cmd == "bench":
        return (f"{status} {rid}: {rec['digits']} digits in {rec['terms']} terms "
                f"({rec['digits_per_term']} digits/term, rate {rec['rate']}), {rec['seconds']:.3f}s")
    raise AssertionError(cmd)


# ---------------------------------------------------------------------------


def _select(cfg: RunConfig, cat: Catalog) -> list:
    if cfg.command == "verify":
        ids = list(cfg.families)
        for eid in cfg.entries:
            try:
                e = cat.entry(eid)
            except KeyError:
                raise UsageError(f"unknown entry {eid!r}") from None
            if e.family is None:
                raise UsageError(f"entry {eid!r} has no family to verify")
            ids.append(e.family)
        if cfg.all:
            ids = sorted(cat.families)
        for fid in ids:
            if fid not in cat.families:
                raise UsageError(f"unknown family {fid!r}")
        if not ids:
            raise UsageError("select families with --family, --entry or --all")
        return list(dict.fromkeys(ids))
    ids = list(cfg.entries)
    known = {e.id for e in cat.entries}
    for eid in ids:
        if eid not in known:
            raise UsageError(f"unknown entry {eid!r}")
    for fid in cfg.families:
        if fid not in cat.families:
            raise UsageError(f"unknown family {fid!r}")
        ids += [e.id for e in cat.entries if e.family == fid]
    if cfg.all:
        ids = sorted(known)
    if not ids:
        raise UsageError("select entries with --entry, --family or --all")
    return list(dict.fromkeys(ids))


def _list(cat: Catalog, cfg: RunConfig, out) -> None:
    for f in cat.families.values():
        rec = {"kind": "family", "id": f.id, "rate": format_rational(f.rate), "r": f.certificate.r,
               "source": f.source, "locator": f.section}
        if cfg.format == "jsonl":
            out.write(json.dumps(rec) + "\n")
        else:
            out.write(f"family {f.id:14s} rate {rec['rate']:>9s} r={f.certificate.r} {f.source:10s} {f.section}\n")
    for e in cat.entries:
        rec = {"kind": "entry", "id": e.id, "family": e.family, "target": str(e.target),
               "flags": sorted(e.flags), "locator": e.locator}
        if cfg.format == "jsonl":
            out.write(json.dumps(rec) + "\n")
        else:
            fl = f" [{', '.join(rec['flags'])}]" if e.flags else ""
            out.write(f"entry  {e.id:30s} {str(e.family or '-'):14s} {rec['target']}{fl}\n")


def run(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    path = _catalog_path(cfg)
    try:
        cat = _catalog(path)
    except (OSError, HyperAccelError) as exc:
        raise UsageError(f"cannot load catalog {path}: {exc}") from None
    if cfg.command == "list":
        _list(cat, cfg, out)
        return 0
    ids = _select(cfg, cat)
    work = _WORK[cfg.command]
    if cfg.jobs > 1 and len(ids) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            recs = list(ex.map(work, [path] * len(ids), ids, [cfg] * len(ids)))
    else:
        recs = []
        for i in ids:
            try:
                recs.append(work(path, i, cfg))
            except HyperAccelError as exc:
                recs.append({"kind": "error", "id": i, "passed": False, "error": str(exc)})
    failed = 0
    for rec in recs:
        failed += not rec["passed"]
        if cfg.format == "jsonl":
            out.write(json.dumps(rec) + "\n")
        elif rec["kind"] == "error":
            out.write(f"FAIL {rec['id']}: {rec['error']}\n")
        else:
            out.write(_text(cfg.command, rec) + "\n")
    if cfg.format == "text":
        out.write(f"{len(recs) - failed}/{len(recs)} passed\n")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hyperaccel", description="Verify and evaluate accelerated hypergeometric series.")
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {
        "verify": "check family certificates and their recursions exactly",
        "evaluate": "sum entries and compare with their closed forms",
        "emit": "print the emitted Chu-style series next to the displayed one",
        "compare": "digits reached by the accelerated and the naive series per term budget",
        "bench": "digits per term and wall time per entry",
        "list": "list families and entries",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--entry", action="append", default=[], metavar="ID")
        p.add_argument("--family", action="append", default=[], metavar="ID")
        p.add_argument("--all", action="store_true")
        p.add_argument("--digits", type=int, default=30)
        p.add_argument("--terms", type=int, default=None)
        p.add_argument("--catalog", default=None, help="catalog file (default: $HYPERACCEL_CATALOG or the built-in one)")
        p.add_argument("--format", choices=("text", "jsonl"), default="text")
        p.add_argument("--jobs", type=int, default=1)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = RunConfig(
            command=ns.command,
            digits=ns.digits,
            terms=ns.terms,
            entries=ns.entry,
            families=ns.family,
            all=ns.all,
            catalog=ns.catalog,
            format=ns.format,
            jobs=ns.jobs,
        )
        return run(cfg)
    except UsageError as exc:
        print(f"hyperaccel: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
