"""Two-term recursions used as series accelerations.

Unrolling ``f(n) = g1(n) + g2(n) f(n+r)`` gives

    f(n0) = sum_j (prod_{i<j} g2(n0 + r i)) g1(n0 + r j),

whose terms shrink geometrically with ratio ``lim g2``.  This module sums
both the original series and the accelerated one in exact rationals, and
rewrites the accelerated series as ``sum_j x^j [uppers; lowers]_j p(j)``.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .certify import Certificate, Recursion, derive_recursion
from .errors import DegreeMismatch, NonLinearFactor, ParseError, PoleEncountered
from .exact import (
    Poly,
    RatFunc,
    as_fraction,
    factor_linear_rational,
    format_ratfunc,
    format_rational,
    parse_ratfunc,
    substitute,
)
from .hyperterm import HyperTerm, iter_terms, shift_ratio, term_value

_J = Poly.var("j")


# ---------------------------------------------------------------------------
# closed-form constants

ATOMS = ("pi", "ln2", "zeta3", "G", "sqrt2", "sqrt3", "cbrt2")
_ATOM_ALIASES = {"catalan": "G", "log2": "ln2"}


@dataclass(frozen=True)
class ConstantExpr:
    """``coefficient * prod atom^exponent`` with atoms sorted by name."""

    coefficient: Fraction
    atoms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coefficient", as_fraction(self.coefficient))
        merged: Counter = Counter()
        for name, e in self.atoms:
            merged[name] += e
        object.__setattr__(self, "atoms", tuple(sorted((a, e) for a, e in merged.items() if e)))

    def __mul__(self, other: ConstantExpr) -> ConstantExpr:
        return ConstantExpr(self.coefficient * other.coefficient, self.atoms + other.atoms)

    def inverse(self) -> ConstantExpr:
        if self.coefficient == 0:
            raise ZeroDivisionError("inverse of a zero constant")
        return ConstantExpr(1 / self.coefficient, tuple((a, -e) for a, e in self.atoms))

    def __str__(self):
        c = self.coefficient
        up = [a if e == 1 else f"{a}^{e}" for a, e in self.atoms if e > 0]
        down = [a if e == -1 else f"{a}^{-e}" for a, e in self.atoms if e < 0]
        if abs(c.numerator) != 1 or not up:
            up.insert(0, str(abs(c.numerator)))
        if c.denominator != 1:
            down.insert(0, str(c.denominator))
        out = ("-" if c < 0 else "") + "*".join(up)
        if down:
            out += "/" + (down[0] if len(down) == 1 else "(" + "*".join(down) + ")")
        return out


@dataclass(frozen=True)
class ConstantSum:
    """A finite sum of :class:`ConstantExpr` terms, e.g. ``60*pi - 149``."""

    terms: tuple

    def __post_init__(self):
        acc: dict = {}
        for t in self.terms:
            acc[t.atoms] = acc.get(t.atoms, Fraction(0)) + t.coefficient
        object.__setattr__(
            self, "terms", tuple(ConstantExpr(c, a) for a, c in sorted(acc.items(), key=lambda t: (not t[0], t[0])) if c)
        )

    @classmethod
    def single(cls, c: ConstantExpr) -> ConstantSum:
        return cls((c,))

    def scaled(self, x) -> ConstantSum:
        x = as_fraction(x)
        return ConstantSum(tuple(ConstantExpr(t.coefficient * x, t.atoms) for t in self.terms))

    def __str__(self):
        if not self.terms:
            return "0"
        out = str(self.terms[0])
        for t in self.terms[1:]:
            s = str(t)
            out += f" - {s[1:]}" if s.startswith("-") else f" + {s}"
        return out


_CTOK = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")


def parse_constant(text: str, line=None) -> ConstantSum:
    """Parse a closed form such as ``2187*sqrt3/(4*pi)`` or ``60*pi - 149``.

    Sums are allowed at the top level and inside parentheses that are not
    divisors; divisors must be single products.
    """
    toks = []
    for m in _CTOK.finditer(text):
        num, name, other = m.groups()
        col = m.start() + 1
        if num is not None:
            toks.append(("int", int(num), col))
        elif name is not None:
            name = _ATOM_ALIASES.get(name, name)
            if name not in ATOMS:
                raise ParseError(f"unknown constant {name!r}", line, col)
            toks.append(("atom", name, col))
        elif other is not None and other.strip():
            if other not in "+-*/^()":
                raise ParseError(f"unexpected character {other!r}", line, col)
            toks.append((other, other, col))
    toks.append(("end", None, len(text) + 1))
    pos = [0]

    def peek():
        return toks[pos[0]][0]

    def take(kind=None):
        t = toks[pos[0]]
        if kind and t[0] != kind:
            raise ParseError(f"expected {kind!r}", line, t[2])
        pos[0] += 1
        return t

    def expr() -> list:
        sign = 1
        if peek() in "+-":
            sign = -1 if take()[0] == "-" else 1
        out = [ConstantExpr(sign * t.coefficient, t.atoms) for t in term()]
        while peek() in ("+", "-"):
            s = -1 if take()[0] == "-" else 1
            out += [ConstantExpr(s * t.coefficient, t.atoms) for t in term()]
        return out

    def term() -> list:
        acc = factor()
        while peek() in ("*", "/"):
            op = take()[0]
            rhs = factor()
            if op == "*":
                acc = [x * y for x in acc for y in rhs]
            else:
                if len(rhs) != 1:
                    raise ParseError("can only divide by a single product", line, toks[pos[0] - 1][2])
                inv = rhs[0].inverse()
                acc = [x * inv for x in acc]
        return acc

    def factor() -> list:
        base = atom()
        if peek() == "^":
            take()
            neg = False
            if peek() == "-":
                take()
                neg = True
            e = take("int")[1]
            if len(base) != 1:
                raise ParseError("can only raise a single product to a power", line, toks[pos[0] - 1][2])
            b = base[0]
            p = ConstantExpr(b.coefficient ** e, tuple((a, x * e) for a, x in b.atoms))
            base = [p.inverse() if neg else p]
        return base

    def atom() -> list:
        kind = peek()
        if kind == "int":
            return [ConstantExpr(take()[1])]
        if kind == "atom":
            return [ConstantExpr(1, ((take()[1], 1),))]
        if kind == "(":
            take()
            v = expr()
            take(")")
            return v
        if kind == "-":
            take()
            return [ConstantExpr(-t.coefficient, t.atoms) for t in atom()]
        raise ParseError(f"unexpected {kind!r}", line, toks[pos[0]][2])

    out = expr()
    if peek() != "end":
        raise ParseError(f"unexpected {peek()!r}", line, toks[pos[0]][2])
    return ConstantSum(tuple(out))


# ---------------------------------------------------------------------------
# families and instances


@dataclass(frozen=True)
class TransformFamily:
    """A term with a verified certificate and the recursion derived from it.

    ``stored`` is the recursion as recorded alongside the certificate (for
    example a published closed form); it is compared against ``recursion``.
    """

    id: str
    term: HyperTerm
    certificate: Certificate
    recursion: Recursion
    rate: Fraction
    section: str = ""
    stored: Recursion | None = None
    source: str = ""

    @classmethod
    def from_certificate(
        cls,
        id: str,
        term: HyperTerm,
        certificate: Certificate,
        section: str = "",
        stored: Recursion | None = None,
        source: str = "",
    ):
        rec = derive_recursion(term, certificate)
        return cls(id, term, certificate, rec, _rate_of(rec.g2), section, stored, source)

    @property
    def r(self) -> int:
        return self.certificate.r


@dataclass(frozen=True)
class SeriesInstance:
    family: TransformFamily
    assignment: Mapping[str, Fraction]
    start_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "assignment", {k: as_fraction(v) for k, v in dict(self.assignment).items()})

    @property
    def n0(self) -> Fraction:
        return self.assignment["n"]

    def params(self) -> dict:
        return {s: v for s, v in self.assignment.items() if s in ("a", "b")}


class _Univariate:
    """A rational function of n with other symbols fixed, evaluated by Horner."""

    def __init__(self, f: RatFunc, params: Mapping[str, Fraction]):
        g = substitute(f, params) if params else f
        extra = set(g.variables()) - {"n"}
        if extra:
            raise ValueError(f"assignment leaves symbols {sorted(extra)} unbound")
        self.f = g
        self.num = _dense(g.num)
        self.den = _dense(g.den)

    def __call__(self, x: Fraction, index=None) -> Fraction:
        d = _horner(self.den, x)
        if d == 0:
            raise PoleEncountered(f"pole of {format_ratfunc(self.f)} at n={x}", factor=self.f, index=index)
        return _horner(self.num, x) / d


def _dense(p: Poly) -> list:
    coeffs = p.coefficients("n")
    top = max(coeffs, default=0)
    return [coeffs[e].constant_value() if e in coeffs else Fraction(0) for e in range(top + 1)]


def _horner(cs: list, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(cs):
        acc = acc * x + c
    return acc


# ---------------------------------------------------------------------------
# partial sums


def naive_partial_sum(inst: SeriesInstance, K: int) -> Fraction:
    """Exact sum of F(n0, k) for 0 <= k < K."""
    if K <= 0:
        return Fraction(0)
    total = Fraction(0)
    for k, t in enumerate(iter_terms(inst.family.term, inst.assignment)):
        if k >= K:
            break
        total += t
    return total


def accelerated_terms(inst: SeriesInstance, J: int) -> list:
    """The first J terms ``(prod_{i<j} g2(n0 + r i)) g1(n0 + r j)``."""
    fam = inst.family
    g1 = _Univariate(fam.recursion.g1, inst.params())
    g2 = _Univariate(fam.recursion.g2, inst.params())
    r = fam.r
    out = []
    prod = Fraction(1)
    for j in range(J):
        nj = inst.n0 + r * j
        out.append(prod * g1(nj, index=j))
        prod *= g2(nj, index=j)
    return out


def accelerated_partial_sum(inst: SeriesInstance, J: int) -> Fraction:
    return sum(accelerated_terms(inst, J), Fraction(0))


def _rate_of(g2: RatFunc) -> Fraction:
    dn, dd = g2.num.degree("n"), g2.den.degree("n")
    if dn != dd:
        raise DegreeMismatch(f"g2 has numerator degree {dn} and denominator degree {dd} in n")
    ln = g2.num.coefficients("n")[dn]
    ld = g2.den.coefficients("n")[dd]
    ratio = RatFunc(ln, ld)
    if not ratio.is_constant_poly():
        raise DegreeMismatch(f"limit of g2 depends on the parameters: {ratio}")
    return ratio.num.constant_value() / ratio.den.constant_value()


def convergence_rate(family: TransformFamily) -> Fraction:
    """Exact limit of g2(n + i) as i grows."""
    return _rate_of(family.recursion.g2)


def terms_for_digits(rate, digits: int) -> int:
    """Term budget ``ceil((D + 5) / -log10|rate|) + 2``."""
    rate = abs(as_fraction(rate))
    if not 0 < rate < 1:
        raise ValueError("rate must satisfy 0 < |rate| < 1")
    per = -math.log10(rate.numerator / rate.denominator)
    return math.ceil((digits + 5) / per) + 2


# ---------------------------------------------------------------------------
# Chu-style series


@dataclass(frozen=True)
class ChuSeries:
    """``sum_{j >= start} rate^j [uppers; lowers]_j summand(j)``."""

    rate: Fraction
    uppers: tuple
    lowers: tuple
    summand: RatFunc
    start_index: int = 0
    target: ConstantSum | None = None

    def __post_init__(self):
        object.__setattr__(self, "rate", as_fraction(self.rate))
        object.__setattr__(self, "uppers", tuple(sorted(as_fraction(x) for x in self.uppers)))
        object.__setattr__(self, "lowers", tuple(sorted(as_fraction(x) for x in self.lowers)))
        if not isinstance(self.summand, RatFunc):
            s = self.summand
            object.__setattr__(self, "summand", parse_ratfunc(s) if isinstance(s, str) else RatFunc._coerce(s))
        extra = set(self.summand.variables()) - {"j"}
        if extra:
            raise ValueError(f"summand may only involve j, found {sorted(extra)}")

    def integer_pairs(self) -> list:
        """Upper/lower pairs whose difference is an integer."""
        return [(u, l) for u in self.uppers for l in self.lowers if (l - u).denominator == 1]

    def render(self) -> str:
        ups = ", ".join(format_rational(x) for x in self.uppers)
        los = ", ".join(format_rational(x) for x in self.lowers)
        lhs = f"{self.target} = " if self.target is not None else ""
        return (
            f"{lhs}sum_{{j>={self.start_index}}} ({format_rational(self.rate)})^j "
            f"[{ups}; {los}]_j ({format_ratfunc(self.summand)})"
        )


class _SummandEval:
    def __init__(self, s: RatFunc):
        self.f = s
        self.num = _dense_j(s.num)
        self.den = _dense_j(s.den)

    def __call__(self, j: int) -> Fraction:
        d = _horner(self.den, Fraction(j))
        if d == 0:
            raise PoleEncountered(f"summand {format_ratfunc(self.f)} has a pole at j={j}", factor=self.f, index=j)
        return _horner(self.num, Fraction(j)) / d


def _dense_j(p: Poly) -> list:
    coeffs = p.coefficients("j")
    top = max(coeffs, default=0)
    return [coeffs[e].constant_value() if e in coeffs else Fraction(0) for e in range(top + 1)]


def chu_terms(s: ChuSeries, J: int, start: int | None = None) -> list:
    """Exact terms for j = start .. start+J-1 using a running Pochhammer ratio."""
    start = s.start_index if start is None else start
    summand = _SummandEval(s.summand)
    for low in s.lowers:
        if low <= 0 and low.denominator == 1 and -low < start + J - 1:
            raise PoleEncountered(f"lower parameter {low} makes (l)_j vanish", factor=low, index=int(-low) + 1)
    coef = s.rate ** start
    for u in s.uppers:
        coef *= _poch(u, start)
    for low in s.lowers:
        coef /= _poch(low, start)
    out = []
    for j in range(start, start + J):
        out.append(coef * summand(j))
        step = s.rate
        for u in s.uppers:
            step *= u + j
        for low in s.lowers:
            step /= low + j
        coef *= step
    return out


def _poch(x: Fraction, m: int) -> Fraction:
    out = Fraction(1)
    for i in range(m):
        out *= x + i
    return out


def evaluate_chu_series(s: ChuSeries, J: int) -> Fraction:
    if J <= 0:
        return Fraction(0)
    return sum(chu_terms(s, J), Fraction(0))


def sum_to_digits(s: ChuSeries, digits: int, J: int | None = None, max_terms: int = 10_000):
    """Sum until the last term is below ``10^-(digits+5)`` relative to the total.

    Starts from the term-count rule (or an explicit J) and extends one term
    at a time until the stopping check passes.  Returns ``(value, terms)``.
    """
    J = terms_for_digits(s.rate, digits) if J is None else J
    terms = chu_terms(s, J)
    total = sum(terms, Fraction(0))
    tol = Fraction(1, 10 ** (digits + 5))
    while len(terms) < max_terms:
        last = abs(terms[-1]) if terms else Fraction(0)
        if last <= tol * max(abs(total), Fraction(1, 10 ** 6)):
            break
        nxt = chu_terms(s, 1, start=s.start_index + len(terms))[0]
        terms.append(nxt)
        total += nxt
    return total, len(terms)


def _shift_factors(alpha: Fraction, m: int, upper_first: bool) -> RatFunc:
    """(alpha)_j/(alpha+m)_j as a rational function of j, for integer m > 0.

    With ``upper_first`` False the reciprocal is returned.
    """
    num = Poly.const(_poch(alpha, m))
    den = Poly.const(1)
    for t in range(m):
        den = den * (_J + alpha + t)
    f = RatFunc(num, den)
    return f if upper_first else RatFunc(den, num)


def canonicalize(rate, uppers: Sequence, lowers: Sequence, summand: RatFunc, start_index: int = 0, target=None):
    """Cancel upper/lower pairs that differ by an integer into the summand."""
    ups = sorted(as_fraction(x) for x in uppers)
    los = sorted(as_fraction(x) for x in lowers)
    summand = RatFunc._coerce(summand)
    changed = True
    while changed:
        changed = False
        for u in ups:
            for low in los:
                m = low - u
                if m.denominator != 1:
                    continue
                m = int(m)
                ups.remove(u)
                los.remove(low)
                if m > 0:
                    summand = summand * _shift_factors(u, m, True)
                elif m < 0:
                    summand = summand * _shift_factors(low, -m, False)
                changed = True
                break
            if changed:
                break
    return ChuSeries(as_fraction(rate), tuple(ups), tuple(los), summand, start_index, target)


def _g_in_j(f: RatFunc, inst: SeriesInstance) -> RatFunc:
    """f(n0 + r j) with the instance's parameters substituted."""
    r = inst.family.r
    bindings = dict(inst.params())
    bindings["n"] = RatFunc(Poly.const(inst.n0) + r * _J)
    return substitute(f, bindings)


def emit_chu_style(inst: SeriesInstance) -> ChuSeries:
    """Rewrite the accelerated series of an instance in Chu-style form."""
    g2j = _g_in_j(inst.family.recursion.g2, inst)
    g1j = _g_in_j(inst.family.recursion.g1, inst)
    fn = factor_linear_rational(g2j.num, "j")
    fd = factor_linear_rational(g2j.den, "j")
    for fac, side in ((fn, "numerator"), (fd, "denominator")):
        if not fac.complete:
            raise NonLinearFactor(f"g2 {side} has a factor without rational roots: {fac.remainder}")
    rate = fn.constant / fd.constant
    uppers = [-root for root, mult in fn.roots for _ in range(mult)]
    lowers = [-root for root, mult in fd.roots for _ in range(mult)]
    for low in lowers:
        if low <= 0 and low.denominator == 1:
            raise PoleEncountered(f"g2 has a pole at shift index {-low}", factor=low, index=int(-low))
    return canonicalize(rate, uppers, lowers, g1j, inst.start_index)


def align_series(displayed: ChuSeries, emitted: ChuSeries, depth: int = 10, max_shift: int = 3):
    """Find ``(s, c)`` with displayed term ``j + s`` equal to c times emitted term j.

    Exact comparison over ``0 <= j <= depth``; returns None when no shift in
    ``0..max_shift`` works.
    """
    em = chu_terms(emitted, depth + 1)
    for s in range(max_shift + 1):
        try:
            dp = chu_terms(displayed, depth + 1, start=displayed.start_index + s)
        except PoleEncountered:
            continue
        if em[0] == 0 or dp[0] == 0:
            continue
        c = dp[0] / em[0]
        if all(d == c * e for d, e in zip(dp, em)):
            return s, c
    return None


def check_tail_vanishing(inst: SeriesInstance, M: int, K: int = 200) -> dict:
    """Probe ``|prod_{i<=m} g2(n0 + r i) * f(n0 + r(m+1))|`` for m <= M.

    f is approximated by its K-term partial sum.  The report holds the float
    magnitudes and whether they decrease over the final half of the probe.
    """
    fam = inst.family
    g2 = _Univariate(fam.recursion.g2, inst.params())
    prod = Fraction(1)
    seq = []
    for m in range(M + 1):
        prod *= g2(inst.n0 + fam.r * m, index=m)
        shifted = SeriesInstance(fam, dict(inst.assignment, n=inst.n0 + fam.r * (m + 1)))
        f = naive_partial_sum(shifted, K)
        seq.append(abs(float(prod * f)))
    half = seq[len(seq) // 2 :]
    decreasing = all(x >= y for x, y in zip(half, half[1:]))
    return {"values": seq, "decreasing": decreasing, "final": seq[-1] if seq else 0.0}


# ---------------------------------------------------------------------------
# naive-side error control


def naive_tail_estimate(inst: SeriesInstance, K: int) -> Fraction:
    """Estimated bound on ``|sum_{k >= K} F(n0, k)|``.

    For alternating terms of decreasing size this is ``|F(n0, K)|``.  For
    same-sign terms the term ratio is ``1 - s/k + O(1/k^2)`` and the bound
    is ``|F(n0, K)| (K + c) / (s - 1)`` with the exact ratio at K fixing c.
    """
    F = inst.family.term
    point = dict(inst.assignment)
    t = abs(term_value(F, point, K))
    rho = substitute(shift_ratio(F, "k"), point)
    rK = rho.value({"k": K})
    if F.power_base < 0:
        return t
    if abs(F.power_base) < 1:
        q = abs(rK)
        return t / (1 - q) if q < 1 else Fraction(10) ** 9
    # Raabe exponent s from the k-ratio's two leading coefficients
    num, den = rho.num.coefficients("k"), rho.den.coefficients("k")
    dn = max(num)
    s = den[dn - 1].constant_value() / den[dn].constant_value() - (
        num[dn - 1].constant_value() / num[dn].constant_value() if dn - 1 in num else 0
    )
    if s <= 1:
        return Fraction(10) ** 9
    return t * (K + 1) / (s - 1)


@dataclass(frozen=True)
class EquivalenceReport:
    J: int
    K: int
    accelerated: Fraction
    naive: Fraction
    tail_estimate: Fraction
    tolerance: Fraction

    @property
    def difference(self) -> Fraction:
        return abs(self.accelerated - self.naive)

    @property
    def passed(self) -> bool:
        return self.difference <= self.tolerance


def oracle_equivalence(inst: SeriesInstance, digits: int = 30, K_max: int = 2560) -> EquivalenceReport:
    """Compare the accelerated sum with the naive partial sum of the same f(n0).

    The accelerated side is summed until its last term is below
    ``10^-(digits+5)``.  The naive side starts at ``K = 10 J`` and doubles
    until its tail estimate drops below ``10^-digits`` or K reaches K_max.
    """
    tol = Fraction(1, 10 ** digits)
    fam = inst.family
    J = terms_for_digits(fam.rate, digits)
    terms = accelerated_terms(inst, J)
    while abs(terms[-1]) > tol / 10 ** 5:
        J *= 2
        terms = accelerated_terms(inst, J)
    acc = sum(terms, Fraction(0))
    K = 10 * J
    naive = Fraction(0)
    done = 0
    gen = iter_terms(fam.term, inst.assignment)
    while True:
        for _ in range(K - done):
            naive += next(gen)
        done = K
        tail = naive_tail_estimate(inst, K)
        if tail <= tol or K >= K_max:
            break
        K = min(2 * K, K_max)
    return EquivalenceReport(J, K, acc, naive, tail, tol)


def telescoped_truncation(inst: SeriesInstance, J: int, K: int):
    """Exact finite form of the unrolled recursion for K-term partial sums.

    Returns ``(lhs, rhs)`` where lhs is the naive sum of K terms at n0 and rhs
    is ``sum_{j<J} P_j (g1(n_j) + G(n_j, K)/p2(n_j)) + P_J S_K(n_J)`` with
    ``P_j = prod_{i<j} g2(n_i)`` and ``n_j = n0 + r j``.
    """
    fam = inst.family
    cert = fam.certificate
    g1 = _Univariate(fam.recursion.g1, inst.params())
    g2 = _Univariate(fam.recursion.g2, inst.params())
    R = substitute(cert.R, inst.params())
    p2 = _Univariate(RatFunc(cert.p2), inst.params())
    rhs = Fraction(0)
    prod = Fraction(1)
    for j in range(J):
        nj = inst.n0 + fam.r * j
        point = dict(inst.assignment, n=nj)
        G = R.value({"n": nj, "k": K}) * term_value(fam.term, point, K)
        rhs += prod * (g1(nj) + G / p2(nj))
        prod *= g2(nj)
    tail = naive_partial_sum(SeriesInstance(fam, dict(inst.assignment, n=inst.n0 + fam.r * J)), K)
    rhs += prod * tail
    return naive_partial_sum(inst, K), rhs


__all__ = [
    "ATOMS",
    "ChuSeries",
    "ConstantExpr",
    "ConstantSum",
    "SeriesInstance",
    "TransformFamily",
    "accelerated_partial_sum",
    "accelerated_terms",
    "align_series",
    "canonicalize",
    "check_tail_vanishing",
    "chu_terms",
    "convergence_rate",
    "emit_chu_style",
    "evaluate_chu_series",
    "naive_partial_sum",
    "naive_tail_estimate",
    "oracle_equivalence",
    "EquivalenceReport",
    "parse_constant",
    "sum_to_digits",
    "telescoped_truncation",
    "terms_for_digits",
]
