"""Bivariate hypergeometric terms built from Pochhammer symbols.

A term is ``prefactor(n, k) * x**k * prod (base_i)_k ** e_i`` where each base
is linear in n, a, b.  Shift quotients in k and in n are kept in factored
form (a Counter of linear polynomials) so that cancellation never needs a
polynomial gcd.
"""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .errors import PoleEncountered
from .exact import K, Poly, RatFunc, as_fraction, parse_poly, shift, substitute


def pochhammer(x, m: int) -> Fraction:
    """Rising factorial x (x+1) ... (x+m-1)."""
    if m < 0:
        raise ValueError("pochhammer needs a non-negative length")
    x = as_fraction(x)
    out = Fraction(1)
    for i in range(m):
        out *= x + i
    return out


@dataclass(frozen=True)
class PochFactor:
    base: Poly
    exponent: int

    def __post_init__(self):
        if isinstance(self.base, str):
            object.__setattr__(self, "base", parse_poly(self.base))
        if self.exponent == 0:
            raise ValueError("Pochhammer exponent must be nonzero")
        if self.base.degree("k") > 0 or self.base.degree("j") > 0:
            raise ValueError("Pochhammer base may not involve k or j")
        for s in ("n", "a", "b"):
            if self.base.degree(s) > 1:
                raise ValueError(f"Pochhammer base {self.base} is not linear in {s}")
        if any(e[0] + e[2] + e[3] > 1 for e in self.base.terms):
            raise ValueError(f"Pochhammer base {self.base} is not linear")

    @property
    def n_coefficient(self) -> Fraction:
        return self.base.terms.get((1, 0, 0, 0, 0), Fraction(0))


@dataclass(frozen=True)
class HyperTerm:
    poch: tuple
    power_base: Fraction = Fraction(1)
    prefactor: RatFunc = field(default_factory=lambda: RatFunc(1))

    def __post_init__(self):
        object.__setattr__(self, "poch", tuple(self.poch))
        object.__setattr__(self, "power_base", as_fraction(self.power_base))
        if not isinstance(self.prefactor, RatFunc):
            object.__setattr__(self, "prefactor", RatFunc._coerce(self.prefactor))
        if self.power_base == 0:
            raise ValueError("power base must be nonzero")

    @classmethod
    def build(cls, upper=(), lower=(), power_base=1, prefactor=1) -> HyperTerm:
        """Convenience constructor from base expressions; repeats allowed."""
        counts: Counter = Counter()
        for s in upper:
            counts[_as_poly(s)] += 1
        for s in lower:
            counts[_as_poly(s)] -= 1
        poch = tuple(PochFactor(b, e) for b, e in counts.items() if e)
        return cls(poch, as_fraction(power_base), RatFunc._coerce(prefactor))

    @property
    def symbols(self) -> tuple:
        seen = set(self.prefactor.variables())
        for f in self.poch:
            seen |= set(f.base.variables())
        return tuple(s for s in ("n", "k", "a", "b") if s in seen)


def _as_poly(x) -> Poly:
    if isinstance(x, Poly):
        return x
    if isinstance(x, str):
        return parse_poly(x)
    return Poly.const(x)


# ---------------------------------------------------------------------------
# evaluation


def _base_values(F: HyperTerm, assignment: Mapping[str, object]):
    point = {s: as_fraction(v) for s, v in assignment.items() if s in ("n", "a", "b")}
    out = []
    for f in F.poch:
        v = f.base.evaluate(point)
        if not v.is_constant():
            raise ValueError(f"assignment does not bind every symbol of {f.base}")
        out.append((f, v.constant_value()))
    return point, out


def first_pole(F: HyperTerm, assignment: Mapping[str, object]):
    """Smallest k whose term is undefined because a lower Pochhammer vanishes.

    Returns ``(k, factor)`` or None.
    """
    _, vals = _base_values(F, assignment)
    best = None
    for f, x in vals:
        if f.exponent < 0 and x <= 0 and x.denominator == 1:
            k = -x.numerator + 1
            if best is None or k < best[0]:
                best = (k, f)
    return best


def term_value(F: HyperTerm, assignment: Mapping[str, object], k: int) -> Fraction:
    """Exact F(n, k) at a rational assignment of n, a, b."""
    if k < 0:
        raise ValueError("k must be non-negative")
    point, vals = _base_values(F, assignment)
    pole = first_pole(F, assignment)
    if pole is not None and pole[0] <= k:
        raise PoleEncountered(
            f"lower Pochhammer ({pole[1].base})_k vanishes at k={pole[0]}", factor=pole[1], index=pole[0]
        )
    out = F.power_base ** k
    for f, x in vals:
        out *= pochhammer(x, k) ** f.exponent if f.exponent > 0 else 1 / pochhammer(x, k) ** -f.exponent
    point = dict(point, k=Fraction(k))
    try:
        out *= F.prefactor.value(point)
    except PoleEncountered as exc:
        raise PoleEncountered(f"prefactor pole at k={k}", factor=F.prefactor, index=k) from exc
    return out


def iter_terms(F: HyperTerm, assignment: Mapping[str, object]):
    """Yield F(n0, 0), F(n0, 1), ... with one rational update per term."""
    point, vals = _base_values(F, assignment)
    pole = first_pole(F, assignment)
    pre = substitute(F.prefactor, point)
    pre_num, pre_den = pre.num, pre.den

    def pre_at(k):
        d = pre_den.value({"k": k})
        if d == 0:
            raise PoleEncountered(f"prefactor pole at k={k}", factor=F.prefactor, index=k)
        return pre_num.value({"k": k}) / d

    poch = Fraction(1)
    k = 0
    while True:
        if pole is not None and k >= pole[0]:
            raise PoleEncountered(
                f"lower Pochhammer ({pole[1].base})_k vanishes at k={pole[0]}", factor=pole[1], index=pole[0]
            )
        yield poch * pre_at(k)
        for f, x in vals:
            poch *= (x + k) ** f.exponent
        poch *= F.power_base
        k += 1


# ---------------------------------------------------------------------------
# shift quotients


@dataclass(frozen=True)
class FactoredRatio:
    """``constant * prod num / prod den * extra`` with linear factors."""

    constant: Fraction
    num: Counter
    den: Counter
    extra: RatFunc

    def linear_denominators(self) -> list:
        return [p for p, e in self.den.items() if e > 0]

    def to_ratfunc(self) -> RatFunc:
        num = Poly.const(self.constant)
        den = Poly.const(1)
        for p, e in self.num.items():
            num = num * p ** e
        for p, e in self.den.items():
            den = den * p ** e
        # distinct primitive linear factors are coprime: no gcd needed
        core = RatFunc.from_coprime(num, den)
        if self.extra == RatFunc(1):
            return core
        return core * self.extra


def _canon_linear(p: Poly):
    """Primitive associate of a linear factor and the scalar it absorbed."""
    q = p.primitive()
    lc_p = p.leading_coefficient()
    lc_q = q.leading_coefficient()
    return q, lc_p / lc_q


def _ratio_from_factors(constant, num_list, den_list, extra) -> FactoredRatio:
    c = Fraction(constant)
    counts: Counter = Counter()
    for p in num_list:
        if p.is_constant():
            c *= p.constant_value()
            continue
        q, s = _canon_linear(p)
        counts[q] += 1
        c *= s
    for p in den_list:
        if p.is_constant():
            c /= p.constant_value()
            continue
        q, s = _canon_linear(p)
        counts[q] -= 1
        c /= s
    num = Counter({p: e for p, e in counts.items() if e > 0})
    den = Counter({p: -e for p, e in counts.items() if e < 0})
    return FactoredRatio(c, num, den, extra)


def shift_ratio_factored(F: HyperTerm, direction: str = "k", r: int = 1) -> FactoredRatio:
    num, den = [], []
    if direction == "k":
        for f in F.poch:
            t = f.base + K
            (num if f.exponent > 0 else den).extend([t] * abs(f.exponent))
        extra = shift(F.prefactor, "k", 1) / F.prefactor
        return _ratio_from_factors(F.power_base, num, den, extra)
    if direction != "n":
        raise ValueError("direction is 'k' or 'n'")
    if r < 1:
        raise ValueError("n-shift needs r >= 1")
    for f in F.poch:
        m = f.n_coefficient * r
        if m.denominator != 1:
            raise ValueError(f"shifting n by {r} moves ({f.base})_k by a non-integer")
        m = int(m)
        up, down = [], []
        if m > 0:
            for i in range(m):
                up.append(f.base + K + i)
                down.append(f.base + i)
        elif m < 0:
            for i in range(-m):
                up.append(f.base + m + i)
                down.append(f.base + m + K + i)
        if f.exponent < 0:
            up, down = down, up
        num.extend(up * abs(f.exponent))
        den.extend(down * abs(f.exponent))
    extra = shift(F.prefactor, "n", r) / F.prefactor
    return _ratio_from_factors(1, num, den, extra)


def shift_ratio(F: HyperTerm, direction: str = "k", r: int = 1) -> RatFunc:
    """F(n, k+1)/F(n, k) or F(n+r, k)/F(n, k) as a normalized RatFunc."""
    return shift_ratio_factored(F, direction, r).to_ratfunc()


def term_at_k0(F: HyperTerm) -> RatFunc:
    return substitute(F.prefactor, {"k": 0})


def admissibility_warnings(F: HyperTerm) -> list:
    """Heuristic filters on the shape of F; violations are reported, not fatal."""
    msgs = []
    lower = sum(-f.exponent for f in F.poch if f.exponent < 0 and f.n_coefficient != 0)
    upper = sum(f.exponent for f in F.poch if f.exponent > 0 and f.n_coefficient != 0)
    if lower - upper < 2:
        msgs.append(f"lower minus upper n-Pochhammer count is {lower - upper} (< 2)")
    if not any(f.exponent < 0 and f.n_coefficient != 0 for f in F.poch):
        msgs.append("no reciprocal Pochhammer with n in its base")
    return msgs


def warn_if_inadmissible(F: HyperTerm, label: str = "term") -> None:
    for msg in admissibility_warnings(F):
        warnings.warn(f"{label}: {msg}", stacklevel=2)
