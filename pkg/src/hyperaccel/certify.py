"""Creative-telescoping certificates and the two-term recursions they imply.

A certificate ``(R, p1, p2, r)`` for a term F asserts

    p1(n) F(n+r, k) + p2(n) F(n, k) = G(n, k+1) - G(n, k),   G = R F.

Dividing by F(n, k) turns this into an identity between rational
functions, which is what :func:`verify_certificate` checks.  Summing over k
gives ``f(n) = g1(n) + g2(n) f(n+r)`` with ``g2 = -p1/p2`` and
``g1 = -R(n, 0) F(n, 0) / p2``.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

from .errors import ZeroP2
from .exact import (
    Poly,
    RatFunc,
    _ip_exact_div,
    _ip_gcd_many,
    fraction_free_nullspace_vector,
    ratfunc_equal,
    shift,
    solve_linear_system,
    substitute,
)
from .hyperterm import FactoredRatio, HyperTerm, _canon_linear, shift_ratio_factored, term_at_k0

_K = Poly.var("k")


@dataclass(frozen=True)
class Certificate:
    R: RatFunc
    p1: Poly
    p2: Poly
    r: int = 1

    def __post_init__(self):
        if not isinstance(self.R, RatFunc):
            object.__setattr__(self, "R", RatFunc._coerce(self.R))
        for name in ("p1", "p2"):
            v = getattr(self, name)
            if isinstance(v, RatFunc):
                v = v.as_poly()
            object.__setattr__(self, name, Poly._coerce(v))
            if getattr(self, name).degree("k") > 0:
                raise ValueError(f"{name} may not depend on k")
        if self.r < 1:
            raise ValueError("shift r must be a positive integer")


@dataclass(frozen=True)
class Recursion:
    g1: RatFunc
    g2: RatFunc
    r: int = 1

    def __post_init__(self):
        for name in ("g1", "g2"):
            v = getattr(self, name)
            if not isinstance(v, RatFunc):
                object.__setattr__(self, name, RatFunc._coerce(v))
        if self.g2.is_zero():
            raise ValueError("g2 must be nonzero")


@dataclass(frozen=True)
class VerifyReport:
    holds: bool
    residual: RatFunc


# ---------------------------------------------------------------------------
# factored bookkeeping


@dataclass
class _Split:
    """``num / prod(den factors)`` with den kept as a Counter of polynomials."""

    num: Poly
    den: Counter


def _split_factor(p: Poly, counter: Counter, sign: int) -> Fraction:
    """Add p's linear factor (or p itself) to counter; return the scalar absorbed."""
    if p.is_constant():
        return p.constant_value() if sign > 0 else 1 / p.constant_value()
    q, s = _canon_linear(p) if p.degree() == 1 else (p, Fraction(1))
    counter[q] += sign
    return s if sign > 0 else 1 / s


def _split_ratio(fr: FactoredRatio) -> _Split:
    c = fr.constant
    cnt: Counter = Counter()
    for p, e in fr.num.items():
        cnt[p] += e
    for p, e in fr.den.items():
        cnt[p] -= e
    if fr.extra != RatFunc(1):
        c *= _split_factor(fr.extra.num, cnt, +1)
        c *= _split_factor(fr.extra.den, cnt, -1)
    num = Poly.const(c)
    den: Counter = Counter()
    for p, e in cnt.items():
        if e > 0:
            num = num * p ** e
        elif e < 0:
            den[p] = -e
    return _Split(num, den)


def _product(counter: Counter) -> Poly:
    out = Poly.const(1)
    for p, e in counter.items():
        if e > 0:
            out = out * p ** e
    return out


def _lcm(*counters: Counter) -> Counter:
    out: Counter = Counter()
    for c in counters:
        for p, e in c.items():
            out[p] = max(out[p], e)
    return out


def _quotient(big: Counter, small: Counter) -> Poly:
    return _product(Counter({p: big[p] - small.get(p, 0) for p in big}))


def _shift_counter(c: Counter, var: str, amount) -> Counter:
    return Counter({p.shift(var, amount): e for p, e in c.items()})


# ---------------------------------------------------------------------------
# verification


def _residual_numerator(F: HyperTerm, c: Certificate):
    """Numerator and denominator of ``p1 rho_n + p2 - R(k+1) rho_k + R(k)``."""
    rk = _split_ratio(shift_ratio_factored(F, "k"))
    rn = _split_ratio(shift_ratio_factored(F, "n", c.r))
    Bk, En = _product(rk.den), _product(rn.den)
    N, D = c.R.num, c.R.den
    N1, D1 = N.shift("k", 1), D.shift("k", 1)
    num = (c.p1 * rn.num * Bk + c.p2 * En * Bk) * D * D1 - N1 * rk.num * En * D + N * D1 * En * Bk
    den = En * Bk * D * D1
    return num, den


def verify_certificate(F: HyperTerm, c: Certificate) -> VerifyReport:
    """Exact check of the telescoping identity divided through by F(n, k)."""
    num, den = _residual_numerator(F, c)
    if num.is_zero():
        return VerifyReport(True, RatFunc(0))
    return VerifyReport(False, RatFunc(num, den))


def telescoped_partial_sums(F: HyperTerm, c: Certificate, assignment, m: int):
    """Both sides of the k-summed identity for k = 0..m at a rational point.

    Returns ``(lhs, rhs)`` with lhs = p1 sum F(n+r, k) + p2 sum F(n, k) and
    rhs = G(n, m+1) - G(n, 0).
    """
    from .hyperterm import term_value

    point = {s: Fraction(v) for s, v in assignment.items()}
    shifted = dict(point, n=point["n"] + c.r)
    p1 = c.p1.value(point)
    p2 = c.p2.value(point)
    s_shift = sum(term_value(F, shifted, k) for k in range(m + 1))
    s_base = sum(term_value(F, point, k) for k in range(m + 1))

    def G(k):
        return c.R.value(dict(point, k=Fraction(k))) * term_value(F, point, k)

    return p1 * s_shift + p2 * s_base, G(m + 1) - G(0)


# ---------------------------------------------------------------------------
# recursions


def derive_recursion(F: HyperTerm, c: Certificate) -> Recursion:
    """``g2 = -p1/p2`` and ``g1 = -R(n, 0) F(n, 0) / p2``."""
    if c.p2.is_zero():
        raise ZeroP2("p2 is the zero polynomial; the recursion is undefined")
    g2 = RatFunc(-c.p1, c.p2)
    g1 = -substitute(c.R, {"k": 0}) * term_at_k0(F) / RatFunc(c.p2)
    return Recursion(g1, g2, c.r)


def match_published_recursion(derived: Recursion, published: Recursion) -> bool:
    if derived.r != published.r:
        raise ValueError("recursions step by different shifts")
    return ratfunc_equal(derived.g1, published.g1) and ratfunc_equal(derived.g2, published.g2)


# ---------------------------------------------------------------------------
# discovery


def _denominator_candidates(rk: _Split, rn: _Split) -> list:
    """Ansatz denominators for R, smallest first.

    Distinct linear k-denominators of the k-ratio, then of both ratios, then
    the same two with multiplicities.
    """
    def linear(c: Counter, keep_mult: bool) -> Counter:
        return Counter({p: (e if keep_mult else 1) for p, e in c.items() if p.degree("k") == 1})

    out: list = []
    for keep in (False, True):
        for cand in (linear(rk.den, keep), _lcm(linear(rk.den, keep), linear(rn.den, keep))):
            if cand not in out:
                out.append(cand)
    return out


def _columns(rk: _Split, rn: _Split, Dc: Counter, d: int):
    """Polynomial-in-k columns of the cleared identity, one per unknown.

    Unknowns are N_0..N_d (k-coefficients of R's numerator), then p1, p2.
    """
    D1c = _shift_counter(Dc, "k", 1)
    left = D1c + rk.den  # denominator of R(k+1) rho_k
    L = _lcm(left, Dc, rn.den)
    U = rk.num * _quotient(L, left)
    V = _quotient(L, Dc)
    cols = []
    kp1 = _K + 1
    for i in range(d + 1):
        cols.append(kp1 ** i * U - _K ** i * V)
    cols.append(-(rn.num * _quotient(L, rn.den)))
    cols.append(-_product(L))
    return cols


def _matrix(cols: list) -> list:
    """Rows indexed by powers of k, entries integer polynomials in n, a, b."""
    per_col = [c.coefficients("k") for c in cols]
    top = max((max(pc) for pc in per_col if pc), default=0)
    rows = []
    for e in range(top + 1):
        row = [pc.get(e, Poly()) for pc in per_col]
        if all(x.is_zero() for x in row):
            continue
        den = 1
        for x in row:
            den = den * x._d // math.gcd(den, x._d)
        rows.append([x * den for x in row])
    return rows


def _numeric_kernel(rows: list, point: dict, rng: random.Random):
    """Solve the specialized system with p2 = 1; None if no such solution."""
    A = [[x.value(point) for x in row[:-1]] for row in rows]
    b = [-row[-1].value(point) for row in rows]
    return solve_linear_system(A, b)


def _random_point(rng: random.Random, symbols) -> dict:
    return {s: Fraction(rng.randint(-97, 97), rng.randint(1, 13)) + Fraction(1, 7919) for s in symbols}


def _select_rows(rows: list, point: dict) -> list:
    """Indices of rows that are linearly independent at a random point."""
    basis: list = []
    chosen = []
    ncols = len(rows[0])
    for idx, row in enumerate(rows):
        v = [x.value(point) for x in row]
        for piv, bv in basis:
            if v[piv]:
                f = v[piv] / bv[piv]
                v = [x - f * y for x, y in zip(v, bv)]
        piv = next((i for i in range(ncols) if v[i]), None)
        if piv is not None:
            basis.append((piv, v))
            chosen.append(idx)
    return chosen


def find_certificate(F: HyperTerm, r: int = 1, degree_bound: int = 4, seed: int = 0):
    """Undetermined-coefficient search for a certificate with shift r.

    R is posited as ``N(n, k, a, b) / D`` with D built from the linear
    k-denominators of the shift quotients, and N of k-degree ``0..degree_bound``.
    The unknowns (coefficients of N, p1 and p2) are solved over the field
    Q(n, a, b); a cheap specialization at random rational points decides
    which ansatz is solvable before the fraction-free symbolic solve.
    Returns a verified :class:`Certificate` or None.
    """
    if degree_bound < 0:
        raise ValueError("degree_bound must be non-negative")
    rk = _split_ratio(shift_ratio_factored(F, "k"))
    rn = _split_ratio(shift_ratio_factored(F, "n", r))
    rng = random.Random(seed)
    symbols = [s for s in ("n", "a", "b") if s in F.symbols]
    points = [_random_point(rng, symbols) for _ in range(2)]
    for d in range(degree_bound + 1):
        for Dc in _denominator_candidates(rk, rn):
            cols = _columns(rk, rn, Dc, d)
            rows = _matrix(cols)
            sols = [_numeric_kernel(rows, pt, rng) for pt in points]
            if any(s is None for s in sols):
                continue
            if all(s[-1] == 0 for s in sols):
                continue
            keep = _select_rows(rows, points[0])
            cert = _symbolic_solve([rows[i] for i in keep], Dc, d, r)
            if cert is not None and verify_certificate(F, cert).holds:
                return cert
    return None


def _symbolic_solve(rows: list, Dc: Counter, d: int, r: int):
    ncols = len(rows[0])
    vec = fraction_free_nullspace_vector(rows, free_preference=[ncols - 1])
    if vec is None:
        return None
    ints = []
    for v in vec:
        c, den = v.int_terms()
        ints.append(dict(c))
    nonzero = [x for x in ints if x]
    g = _ip_gcd_many(nonzero)
    if g and g != {0: 1}:
        ints = [_ip_exact_div(x, g) if x else x for x in ints]
    vec = [Poly(x) for x in ints]
    p1, p2 = vec[-2], vec[-1]
    if p2.is_zero() or p1.is_zero():
        return None
    N = Poly()
    for i in range(d + 1):
        N = N + vec[i] * _K ** i
    # make p2's leading coefficient positive for a stable normal form
    if p2.leading_coefficient() < 0:
        N, p1, p2 = -N, -p1, -p2
    R = RatFunc(N, _product(Dc))
    return Certificate(R, p1, p2, r)


def scale_certificate(c: Certificate, factor: Poly) -> Certificate:
    """Multiply R, p1, p2 by a common polynomial in n, a, b."""
    factor = Poly._coerce(factor)
    return Certificate(c.R * factor, c.p1 * factor, c.p2 * factor, c.r)


__all__ = [
    "Certificate",
    "Recursion",
    "VerifyReport",
    "derive_recursion",
    "find_certificate",
    "match_published_recursion",
    "scale_certificate",
    "shift",
    "telescoped_partial_sums",
    "verify_certificate",
]
