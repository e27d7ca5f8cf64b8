"""Families, certificates and closed-form identities as reviewable data.

The built-in catalog lives in ``data/builtin.catalog``; the format is
described in ``docs/catalog-format.md``.  Loading re-checks every family
certificate exactly and every entry's structure.  Numerical agreement with
the closed form is checked by :func:`validate_entry`.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .accelerate import (
    ChuSeries,
    ConstantSum,
    SeriesInstance,
    TransformFamily,
    align_series,
    emit_chu_style,
    evaluate_chu_series,
    parse_constant,
    sum_to_digits,
)
from .certify import Certificate, Recursion, match_published_recursion, verify_certificate
from .errors import HyperAccelError, ParseError, PoleEncountered, ValidationError, ZeroP2
from .exact import (
    Poly,
    RatFunc,
    format_poly,
    format_ratfunc,
    format_rational,
    parse_poly,
    parse_ratfunc,
    parse_rational,
)
from .hyperterm import HyperTerm, PochFactor, first_pole
from .refconst import digits_agree, reference_float, reference_value

HEADER = "hyperaccel-catalog v1"
FLAGS = frozenset({"numeric-only", "display-shifted", "corrected", "emission-differs"})
ENV_VAR = "HYPERACCEL_CATALOG"

__all__ = [
    "Catalog",
    "CatalogEntry",
    "ENV_VAR",
    "EntryReport",
    "TransformFamily",
    "builtin_catalog",
    "default_catalog_path",
    "dump_catalog",
    "load_catalog",
    "perturb_summand",
    "validate_entry",
]


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    target: ConstantSum
    displayed: ChuSeries | None = None
    family: str | None = None
    assignment: dict = field(default_factory=dict)
    start_index: int = 0
    flags: frozenset = frozenset()
    locator: str = ""

    @property
    def numeric_only(self) -> bool:
        return self.family is None


@dataclass
class Catalog:
    families: dict
    entries: list

    def entry(self, id: str) -> CatalogEntry:
        for e in self.entries:
            if e.id == id:
                return e
        raise KeyError(id)

    def family(self, id: str) -> TransformFamily:
        return self.families[id]

    def instance(self, e: CatalogEntry) -> SeriesInstance:
        if e.family is None:
            raise ValueError(f"entry {e.id} has no family")
        return SeriesInstance(self.families[e.family], e.assignment, e.start_index)

    def __eq__(self, other):
        if not isinstance(other, Catalog):
            return NotImplemented
        if self.families.keys() != other.families.keys() or self.entries != other.entries:
            return False
        for k, f in self.families.items():
            g = other.families[k]
            if (f.term, f.certificate, f.recursion, f.rate, f.section, f.source) != (
                g.term,
                g.certificate,
                g.recursion,
                g.rate,
                g.section,
                g.source,
            ):
                return False
        return True


# ---------------------------------------------------------------------------
# reading


class _Block:
    def __init__(self, kind: str, name: str, line: int):
        self.kind = kind
        self.name = name
        self.line = line
        self.fields: dict = {}


def _split_blocks(text: str) -> list:
    lines = text.splitlines()
    first = next((i for i, s in enumerate(lines) if s.strip() and not s.lstrip().startswith("#")), None)
    if first is None or lines[first].strip() != HEADER:
        raise ParseError(f"missing header {HEADER!r}", (first or 0) + 1, 1)
    blocks = []
    cur = None
    for i, raw in enumerate(lines[first + 1 :], start=first + 2):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        indent = len(raw) - len(raw.lstrip())
        head, _, rest = s.partition(" ")
        if cur is None:
            if head not in ("family", "entry") or not rest.strip():
                raise ParseError(f"expected 'family <id>' or 'entry <id>', found {s!r}", i, indent + 1)
            cur = _Block(head, rest.strip(), i)
            continue
        if s == "end":
            blocks.append(cur)
            cur = None
            continue
        if head in cur.fields:
            raise ParseError(f"duplicate key {head!r}", i, indent + 1)
        value = rest.strip()
        col = indent + len(head) + 1 + (len(rest) - len(rest.lstrip())) + 1
        cur.fields[head] = (value, i, col)
    if cur is not None:
        raise ParseError(f"{cur.kind} {cur.name!r} is missing 'end'", cur.line, 1)
    return blocks


def _need(b: _Block, key: str):
    if key not in b.fields:
        raise ParseError(f"{b.kind} {b.name!r} is missing key {key!r}", b.line, 1)
    return b.fields[key]


def _list(value: str, line: int, col: int, parse) -> list:
    if value in ("", "-"):
        return []
    out = []
    offset = 0
    for part in value.split(","):
        lead = len(part) - len(part.lstrip())
        out.append(parse(part.strip(), line, col - 1 + offset + lead))
        offset += len(part) + 1
    return out


def _rational_at(text: str, line: int, col0: int) -> Fraction:
    try:
        return parse_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {text!r}: {exc}", line, col0 + 1) from None


def _int_at(text: str, line: int, col: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"expected an integer, found {text!r}", line, col) from None


def _family_from_block(b: _Block) -> TransformFamily:
    def expr(key, parse=parse_ratfunc):
        v, line, col = _need(b, key)
        return parse(v, line, col - 1)

    ups = _list(*_need(b, "upper"), parse_poly)
    los = _list(*_need(b, "lower"), parse_poly)
    pw = b.fields.get("power", ("1", b.line, 1))
    power = _rational_at(pw[0], pw[1], pw[2] - 1)
    pre = expr("prefactor") if "prefactor" in b.fields else RatFunc(1)
    r = _int_at(*_need(b, "r"))
    R, p1, p2 = expr("R"), expr("p1", parse_poly), expr("p2", parse_poly)
    g1, g2 = expr("g1"), expr("g2")
    try:
        term = HyperTerm.build(ups, los, power, pre)
    except ValueError as exc:
        raise ValidationError(f"family {b.name}: {exc}") from None
    if p2.is_zero():
        raise ValidationError(f"family {b.name}: p2 is zero, so the recursion is undefined")
    cert = Certificate(R, p1, p2, r)
    if not verify_certificate(term, cert).holds:
        raise ValidationError(f"family {b.name}: certificate does not satisfy the telescoping identity")
    try:
        fam = TransformFamily.from_certificate(
            b.name,
            term,
            cert,
            section=b.fields.get("locator", ("",))[0],
            stored=Recursion(g1, g2, r),
            source=b.fields.get("source", ("",))[0],
        )
    except ZeroP2 as exc:
        raise ValidationError(f"family {b.name}: {exc}") from None
    if not match_published_recursion(fam.recursion, fam.stored):
        raise ValidationError(f"family {b.name}: stored g1/g2 differ from the recursion the certificate implies")
    if "rate" in b.fields:
        v, line, col = b.fields["rate"]
        if _rational_at(v, line, col - 1) != fam.rate:
            raise ValidationError(f"family {b.name}: stored rate {v} but g2 tends to {fam.rate}")
    return fam


def _entry_from_block(b: _Block, families: dict) -> CatalogEntry:
    f = b.fields
    v, line, col = _need(b, "target")
    target = parse_constant(v, line)
    flags = frozenset(x.strip() for x in f.get("flags", ("",))[0].split(",") if x.strip())
    unknown = flags - FLAGS
    if unknown:
        raise ValidationError(f"entry {b.name}: unknown flags {sorted(unknown)}")
    fam_id = f["family"][0] if "family" in f else None
    if fam_id is not None and fam_id not in families:
        raise ValidationError(f"entry {b.name}: unknown family {fam_id!r}")
    if (fam_id is None) != ("numeric-only" in flags):
        raise ValidationError(f"entry {b.name}: 'numeric-only' must be set exactly when no family is given")
    assignment = {}
    if "assign" in f:
        v, line, col = f["assign"]
        offset = 0
        for part in v.split(","):
            name, eq, val = part.partition("=")
            if not eq or name.strip() not in ("a", "b", "n"):
                raise ParseError(f"bad assignment {part.strip()!r}", line, col + offset)
            assignment[name.strip()] = _rational_at(val.strip(), line, col + offset)
            offset += len(part) + 1
    start = _int_at(*f["start"]) if "start" in f else 0
    displayed = None
    keys = ("rate", "upper", "lower", "summand")
    if any(k in f for k in keys):
        rv, rl, rc = _need(b, "rate")
        rate = _rational_at(rv, rl, rc - 1)
        ups = _list(*_need(b, "upper"), _rational_at)
        los = _list(*_need(b, "lower"), _rational_at)
        sv, sl, sc = _need(b, "summand")
        summand = parse_ratfunc(sv, sl, sc - 1)
        try:
            displayed = ChuSeries(rate, tuple(ups), tuple(los), summand, start, target)
        except ValueError as exc:
            raise ValidationError(f"entry {b.name}: {exc}") from None
    elif fam_id is None:
        raise ValidationError(f"entry {b.name}: numeric-only entries need a displayed series")
    entry = CatalogEntry(
        b.name, target, displayed, fam_id, assignment, start, flags, f.get("locator", ("",))[0]
    )
    _check_entry(entry, families)
    return entry


def _check_entry(e: CatalogEntry, families: dict) -> None:
    if e.displayed is not None:
        s = e.displayed
        if not abs(s.rate) < 1:
            raise ValidationError(f"entry {e.id}: displayed rate {s.rate} does not converge")
        for low in s.lowers:
            if low <= 0 and low.denominator == 1:
                raise ValidationError(
                    f"entry {e.id}: lower parameter {low} vanishes in (l)_j at j={int(-low)}"
                )
    if e.family is None:
        return
    fam = families[e.family]
    need = set(fam.term.symbols) - {"k"}
    missing = need - set(e.assignment)
    if missing:
        raise ValidationError(f"entry {e.id}: assignment leaves {sorted(missing)} unbound")
    try:
        pole = first_pole(fam.term, e.assignment)
    except ValueError as exc:
        raise ValidationError(f"entry {e.id}: {exc}") from None
    if pole is not None:
        k_zero = pole[0] - 1
        raise ValidationError(
            f"entry {e.id}: lower Pochhammer ({pole[1].base})_k has a zero factor at k={k_zero}, "
            f"so F is undefined from k={pole[0]} on"
        )


def parse_catalog(text: str) -> Catalog:
    families: dict = {}
    entries: list = []
    seen = set()
    for b in _split_blocks(text):
        if b.name in seen:
            raise ParseError(f"duplicate id {b.name!r}", b.line, 1)
        seen.add(b.name)
        if b.kind == "family":
            families[b.name] = _family_from_block(b)
        else:
            entries.append(_entry_from_block(b, families))
    return Catalog(families, entries)


def load_catalog(source, deep: bool = False) -> Catalog:
    """Load from a path, a text stream, or the catalog text itself.

    Certificates and entry structure are always checked.  ``deep`` also
    compares every displayed series with the emitted accelerated series,
    which takes a few seconds for the built-in catalog.
    """
    if hasattr(source, "read"):
        cat = parse_catalog(source.read())
    elif isinstance(source, Path) or (isinstance(source, str) and "\n" not in source):
        cat = parse_catalog(Path(source).read_text(encoding="utf-8"))
    else:
        cat = parse_catalog(source)
    if deep:
        problems = display_problems(cat)
        if problems:
            eid, msg = problems[0]
            raise ValidationError(f"entry {eid}: {msg}")
    return cat


def default_catalog_path():
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return resources.files("hyperaccel") / "data" / "builtin.catalog"


@lru_cache(maxsize=None)
def _cached(path: str) -> Catalog:
    return load_catalog(Path(path))


def builtin_catalog() -> Catalog:
    ref = resources.files("hyperaccel") / "data" / "builtin.catalog"
    with resources.as_file(ref) as p:
        return _cached(str(p))


# ---------------------------------------------------------------------------
# writing


def _fmt_list(xs, fmt) -> str:
    return ", ".join(fmt(x) for x in xs) if xs else "-"


def _dump_family(f: TransformFamily) -> list:
    ups, los = [], []
    for pf in f.term.poch:
        (ups if pf.exponent > 0 else los).extend([pf.base] * abs(pf.exponent))
    stored = f.stored or f.recursion
    out = [f"family {f.id}"]
    if f.section:
        out.append(f"  locator   {f.section}")
    if f.source:
        out.append(f"  source    {f.source}")
    out += [
        f"  upper     {_fmt_list(ups, format_poly)}",
        f"  lower     {_fmt_list(los, format_poly)}",
        f"  power     {format_rational(f.term.power_base)}",
        f"  prefactor {format_ratfunc(f.term.prefactor)}",
        f"  r         {f.certificate.r}",
        f"  rate      {format_rational(f.rate)}",
        f"  R         {format_ratfunc(f.certificate.R)}",
        f"  p1        {format_poly(f.certificate.p1)}",
        f"  p2        {format_poly(f.certificate.p2)}",
        f"  g1        {format_ratfunc(stored.g1)}",
        f"  g2        {format_ratfunc(stored.g2)}",
        "end",
    ]
    return out


def _dump_entry(e: CatalogEntry) -> list:
    out = [f"entry {e.id}"]
    if e.locator:
        out.append(f"  locator   {e.locator}")
    if e.family:
        out.append(f"  family    {e.family}")
        out.append("  assign    " + ", ".join(f"{k}={format_rational(v)}" for k, v in e.assignment.items()))
    if e.flags:
        out.append(f"  flags     {', '.join(sorted(e.flags))}")
    out.append(f"  target    {e.target}")
    out.append(f"  start     {e.start_index}")
    if e.displayed is not None:
        s = e.displayed
        out += [
            f"  rate      {format_rational(s.rate)}",
            f"  upper     {_fmt_list(s.uppers, format_rational)}",
            f"  lower     {_fmt_list(s.lowers, format_rational)}",
            f"  summand   {format_ratfunc(s.summand)}",
        ]
    out.append("end")
    return out


def dump_catalog(cat: Catalog) -> str:
    lines = [HEADER, ""]
    for f in cat.families.values():
        lines += _dump_family(f) + [""]
    for e in cat.entries:
        lines += _dump_entry(e) + [""]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# numerical validation


@dataclass(frozen=True)
class EntryReport:
    id: str
    passed: bool
    digits: int
    required: int
    terms: int
    value: Fraction
    method: str

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.id}: {self.digits} digits ({self.required} required), {self.terms} terms via {self.method}"


def _series_for(e: CatalogEntry, catalog: Catalog | None) -> tuple:
    if e.displayed is not None:
        return e.displayed, "displayed"
    if catalog is None:
        raise ValueError(f"entry {e.id} needs its catalog to build the accelerated series")
    return emit_chu_style(catalog.instance(e)), "accelerated"


def reference_for(target: ConstantSum, digits: int):
    """Reference with at least ``digits`` significant digits plus margin."""
    mag = abs(reference_float(target, 20))
    lead = len(str(int(mag))) if mag >= 1 else 0
    return reference_value(target, digits + 10 + lead)


def validate_entry(e: CatalogEntry, digits: int = 30, catalog: Catalog | None = None, terms: int | None = None) -> EntryReport:
    """Sum the entry's series to ``digits`` and compare with its closed form.

    The displayed series is used when present, otherwise the accelerated
    series of the entry's instance.  Agreement is counted in significant
    digits.
    """
    series, method = _series_for(e, catalog)
    if terms is None:
        value, used = sum_to_digits(series, digits)
    else:
        value, used = evaluate_chu_series(series, terms), terms
    ref = reference_for(e.target, digits)
    d = digits_agree(value, ref)
    return EntryReport(e.id, d >= digits, d, digits, used, value, method)


def perturb_summand(e: CatalogEntry, delta=1) -> CatalogEntry:
    """Copy of ``e`` whose summand numerator has its constant term shifted by delta."""
    s = e.displayed
    if s is None:
        raise ValueError(f"entry {e.id} has no displayed series to perturb")
    num = s.summand.num + Poly.const(delta)
    new = replace(s, summand=RatFunc(num, s.summand.den))
    return replace(e, displayed=new)


def display_problems(cat: Catalog, depth: int = 20) -> list:
    """Entries whose displayed series disagrees with the emitted one.

    A displayed series may differ from the emitted one by a constant factor.
    An index shift is accepted only on entries flagged ``display-shifted``.
    """
    out = []
    for e in cat.entries:
        if e.family is None or e.displayed is None or "emission-differs" in e.flags:
            continue
        try:
            al = check_display(e, cat, depth)
        except HyperAccelError as exc:
            out.append((e.id, f"emission failed: {exc}"))
            continue
        if al is None:
            out.append((e.id, "displayed series does not match the emitted series termwise"))
        elif al[0] != 0 and "display-shifted" not in e.flags:
            out.append((e.id, f"displayed series is shifted by {al[0]} but not flagged display-shifted"))
    return out


def check_display(e: CatalogEntry, catalog: Catalog, depth: int = 20):
    """Compare the displayed series with the emitted one term by term.

    Returns ``(shift, scale)`` from :func:`align_series`, ``(0, 1)`` meaning
    exact termwise agreement, or None when they do not line up.
    """
    if e.displayed is None or e.family is None:
        return None
    emitted = emit_chu_style(catalog.instance(e))
    return align_series(e.displayed, emitted, depth=depth)
