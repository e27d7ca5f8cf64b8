"""Exact rationals, sparse multivariate polynomials and rational functions.

Scalars are :class:`fractions.Fraction`.  Polynomials live in the fixed ring
Q[n, k, a, b, j]; ``j`` is the summation index of displayed series.  A
monomial is packed into one integer, 16 bits per exponent, most significant
symbol first, so that integer order on keys is lexicographic order
n > k > a > b > j and monomial multiplication is key addition.

A :class:`Poly` stores integer numerators over one positive common
denominator.  All gcd work happens on the integer numerators.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import DivisionByZero, ParseError, PoleEncountered

SYMBOLS = ("n", "k", "a", "b", "j")
_NV = len(SYMBOLS)
_BITS = 16
_MASK = (1 << _BITS) - 1
_SHIFT = {s: _BITS * (_NV - 1 - i) for i, s in enumerate(SYMBOLS)}
_SHIFTS = tuple(_SHIFT[s] for s in SYMBOLS)

Rational = Fraction


def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"not an exact rational: {x!r}")


def _pack(exps: Sequence[int]) -> int:
    key = 0
    for e, s in zip(exps, _SHIFTS):
        if e < 0 or e > _MASK:
            raise ValueError(f"exponent out of range: {e}")
        key |= e << s
    return key


def _unpack(key: int) -> tuple:
    return tuple((key >> s) & _MASK for s in _SHIFTS)


def _divides(m: int, key: int) -> bool:
    for s in _SHIFTS:
        if (m >> s) & _MASK > (key >> s) & _MASK:
            return False
    return True


# ---------------------------------------------------------------------------
# integer polynomial kernels: dict packed-monomial -> int


def _ip_add(p, q, sign=1):
    r = dict(p)
    for m, c in q.items():
        v = r.get(m, 0) + sign * c
        if v:
            r[m] = v
        else:
            r.pop(m, None)
    return r


def _ip_mul(p, q):
    if len(p) > len(q):
        p, q = q, p
    r = {}
    get = r.get
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = m1 + m2
            r[m] = get(m, 0) + c1 * c2
    return {m: c for m, c in r.items() if c}


def _ip_scale(p, c):
    if c == 1:
        return dict(p)
    return {m: v * c for m, v in p.items()} if c else {}


def _ip_shift_mono(p, mono, c=1):
    return {m + mono: v * c for m, v in p.items()}


def _ip_content(p) -> int:
    return math.gcd(*p.values()) if p else 0


def _ip_vars(p) -> int:
    mask = 0
    for m in p:
        for i, s in enumerate(_SHIFTS):
            if (m >> s) & _MASK:
                mask |= 1 << i
    return mask


def _ip_degree(p, s) -> int:
    return max(((m >> s) & _MASK for m in p), default=-1)


def _ip_split(p, s):
    """Coefficients of ``p`` w.r.t. the variable at bit offset ``s``."""
    out = {}
    for m, c in p.items():
        e = (m >> s) & _MASK
        out.setdefault(e, {})[m - (e << s)] = c
    return out


def _ip_lead_in(p, s):
    d = _ip_degree(p, s)
    return d, {m - (d << s): c for m, c in p.items() if (m >> s) & _MASK == d}


def _ip_exact_div(a, b):
    """Quotient ``a / b`` over Z, or None when the division is not exact."""
    if not b:
        raise DivisionByZero("polynomial division by zero")
    if not a:
        return {}
    lb = max(b)
    cb = b[lb]
    rest = [(m - lb, c) for m, c in b.items() if m != lb]
    r = dict(a)
    heap = [-m for m in r]
    heapq.heapify(heap)
    q = {}
    while r:
        m = -heapq.heappop(heap)
        c = r.get(m)
        if c is None:
            continue
        if m < lb or not _divides(lb, m):
            return None
        t, rem = divmod(c, cb)
        if rem:
            return None
        mq = m - lb
        q[mq] = t
        del r[m]
        for dm, dc in rest:
            mm = mq + dm + lb
            v = r.get(mm, 0) - t * dc
            if v:
                if mm not in r:
                    heapq.heappush(heap, -mm)
                r[mm] = v
            else:
                r.pop(mm, None)
    return q


def _ip_normal(p):
    """Primitive over Z with positive lex-leading coefficient."""
    if not p:
        return {}
    g = _ip_content(p)
    if p[max(p)] < 0:
        g = -g
    return {m: c // g for m, c in p.items()} if g != 1 else dict(p)


def _ip_prem(a, b, s):
    db, lcb = _ip_lead_in(b, s)
    r = a
    while r:
        dr, lcr = _ip_lead_in(r, s)
        if dr < db:
            break
        r = _ip_add(_ip_mul(r, lcb), _ip_mul(_ip_shift_mono(b, (dr - db) << s), lcr), -1)
    return r


_ONE = {0: 1}


def _ip_eval(p, s, xi):
    """Substitute the integer ``xi`` for the variable at bit offset ``s``."""
    out = {}
    pw = {}
    for m, c in p.items():
        e = (m >> s) & _MASK
        if e not in pw:
            pw[e] = xi ** e
        key = m - (e << s)
        v = out.get(key, 0) + c * pw[e]
        if v:
            out[key] = v
        else:
            out.pop(key, None)
    return out


def _ip_norm(p) -> int:
    return max(abs(c) for c in p.values())


def _ip_xi_adic(h, s, xi):
    """Rebuild a polynomial in the variable at offset ``s`` from its image at xi."""
    out = {}
    half = xi // 2
    e = 0
    while h:
        nxt = {}
        for m, c in h.items():
            r = c % xi
            if r > half:
                r -= xi
            if r:
                out[m + (e << s)] = r
            q = (c - r) // xi
            if q:
                nxt[m] = q
        h = nxt
        e += 1
    return out


def _ip_heugcd(a, b, depth=0):
    """Heuristic gcd of primitive integer polynomials, or None on failure."""
    va, vb = _ip_vars(a), _ip_vars(b)
    if not va and not vb:
        return {0: math.gcd(a.get(0, 0), b.get(0, 0))}
    both = va | vb
    i = both.bit_length() - 1
    s = _SHIFTS[i]
    xi = 2 * min(_ip_norm(a), _ip_norm(b)) + 29
    for _ in range(6):
        fa, fb = _ip_eval(a, s, xi), _ip_eval(b, s, xi)
        if fa and fb:
            h = _ip_heugcd(fa, fb, depth + 1)
            if h is not None:
                H = _ip_normal(_ip_xi_adic(h, s, xi))
                if H and _ip_exact_div(a, H) is not None and _ip_exact_div(b, H) is not None:
                    if depth:
                        # keep the integer content of the image gcd
                        return _ip_scale(H, math.gcd(_ip_content(a), _ip_content(b)))
                    return H
        xi = xi * 73794 * math.isqrt(math.isqrt(xi)) // 27011
    return None


def _ip_gcd(a, b):
    """Gcd over Z[vars], primitive with positive leading coefficient."""
    if not a:
        return _ip_normal(b)
    if not b:
        return _ip_normal(a)
    va, vb = _ip_vars(a), _ip_vars(b)
    if va and vb:
        h = _ip_heugcd(_ip_normal(a), _ip_normal(b))
        if h is not None:
            return _ip_normal(h)
    return _ip_gcd_prs(a, b)


def _ip_gcd_prs(a, b):
    """Primitive PRS with content recursion; slow but always terminates."""
    if not a:
        return _ip_normal(b)
    if not b:
        return _ip_normal(a)
    va, vb = _ip_vars(a), _ip_vars(b)
    if not va or not vb:
        return dict(_ONE)
    if va != vb:
        only = va & ~vb
        if only:
            return _ip_gcd_many(_ip_split(a, _SHIFTS[only.bit_length() - 1]).values(), b)
        only = vb & ~va
        return _ip_gcd_many(_ip_split(b, _SHIFTS[only.bit_length() - 1]).values(), a)
    if a == b:
        return _ip_normal(a)
    # main variable: the least significant present one keeps coefficient
    # rings small for the usual n-heavy inputs
    s = _SHIFTS[(va & -va).bit_length() - 1]
    ca = _ip_gcd_many(_ip_split(a, s).values())
    cb = _ip_gcd_many(_ip_split(b, s).values())
    gc = _ip_gcd(ca, cb)
    pa = _ip_exact_div(a, ca)
    pb = _ip_exact_div(b, cb)
    if _ip_degree(pa, s) < _ip_degree(pb, s):
        pa, pb = pb, pa
    while True:
        if _ip_degree(pb, s) == 0:
            return _ip_normal(gc)
        r = _ip_prem(pa, pb, s)
        if not r:
            break
        cr = _ip_gcd_many(_ip_split(r, s).values())
        pa, pb = pb, _ip_exact_div(r, cr)
    return _ip_normal(_ip_mul(gc, _ip_normal(pb)))


def _ip_gcd_many(polys: Iterable, start=None):
    g = start
    for p in polys:
        g = _ip_normal(p) if g is None else _ip_gcd(g, p)
        if g == _ONE:
            return g
    return g if g is not None else {}


# ---------------------------------------------------------------------------


class Poly:
    """Immutable polynomial in Q[n, k, a, b, j].

    >>> n, k = Poly.var("n"), Poly.var("k")
    >>> (n + k) ** 2
    Poly('n^2 + 2*n*k + k^2')
    """

    __slots__ = ("_c", "_d", "_hash")

    def __init__(self, coeffs: Mapping[int, int] | None = None, den: int = 1):
        c = {m: v for m, v in (coeffs or {}).items() if v}
        if den <= 0:
            if den == 0:
                raise DivisionByZero("zero denominator")
            den = -den
            c = {m: -v for m, v in c.items()}
        if c:
            g = math.gcd(den, *c.values())
            if g != 1:
                den //= g
                c = {m: v // g for m, v in c.items()}
        else:
            den = 1
        self._c = c
        self._d = den
        self._hash = None

    # construction -------------------------------------------------------
    @classmethod
    def const(cls, x) -> Poly:
        x = as_fraction(x)
        return cls({0: x.numerator}, x.denominator)

    @classmethod
    def var(cls, name: str) -> Poly:
        return cls({1 << _SHIFT[name]: 1})

    @classmethod
    def from_terms(cls, terms: Mapping[tuple, object]) -> Poly:
        """Build from ``{exponent tuple: rational}``; short tuples pad with 0."""
        fr = {}
        for e, c in terms.items():
            e = tuple(e) + (0,) * (_NV - len(e))
            key = _pack(e)
            fr[key] = fr.get(key, 0) + as_fraction(c)
        den = 1
        for c in fr.values():
            den = den * c.denominator // math.gcd(den, c.denominator)
        return cls({m: int(c * den) for m, c in fr.items()}, den)

    @classmethod
    def _coerce(cls, x) -> Poly:
        if isinstance(x, Poly):
            return x
        return cls.const(x)

    # inspection ---------------------------------------------------------
    @property
    def terms(self) -> dict:
        """``{exponent tuple (n, k, a, b, j): Fraction}``."""
        return {_unpack(m): Fraction(c, self._d) for m, c in self._c.items()}

    def int_terms(self):
        """Integer numerators keyed by packed monomial, and the denominator."""
        return self._c, self._d

    def is_zero(self) -> bool:
        return not self._c

    def __bool__(self):
        return bool(self._c)

    def is_constant(self) -> bool:
        return not self._c or (len(self._c) == 1 and 0 in self._c)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return Fraction(self._c.get(0, 0), self._d)

    def variables(self) -> tuple:
        mask = _ip_vars(self._c)
        return tuple(s for i, s in enumerate(SYMBOLS) if mask >> i & 1)

    def degree(self, var: str | None = None) -> int:
        """Degree in ``var``, or total degree; -1 for the zero polynomial."""
        if var is not None:
            return _ip_degree(self._c, _SHIFT[var])
        return max((sum(_unpack(m)) for m in self._c), default=-1)

    def leading_coefficient(self) -> Fraction:
        """Coefficient of the lex-largest monomial."""
        if not self._c:
            return Fraction(0)
        return Fraction(self._c[max(self._c)], self._d)

    def coefficients(self, var: str) -> dict:
        """``{degree: Poly}`` with ``var`` removed from the coefficients."""
        return {e: Poly(c, self._d) for e, c in _ip_split(self._c, _SHIFT[var]).items()}

    @classmethod
    def from_coefficients(cls, var: str, coeffs: Mapping[int, Poly]) -> Poly:
        s = _SHIFT[var]
        out = cls()
        for e, c in coeffs.items():
            c = cls._coerce(c)
            out = out + Poly({m + (e << s): v for m, v in c._c.items()}, c._d)
        return out

    # arithmetic ---------------------------------------------------------
    def __neg__(self):
        return Poly({m: -v for m, v in self._c.items()}, self._d)

    def __add__(self, other):
        if not isinstance(other, Poly):
            try:
                other = Poly.const(other)
            except TypeError:
                return NotImplemented
        if not other._c:
            return self
        if not self._c:
            return other
        d1, d2 = self._d, other._d
        if d1 == d2:
            return Poly(_ip_add(self._c, other._c), d1)
        g = math.gcd(d1, d2)
        return Poly(_ip_add(_ip_scale(self._c, d2 // g), _ip_scale(other._c, d1 // g)), d1 // g * d2)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Poly):
            try:
                other = Poly.const(other)
            except TypeError:
                return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Poly):
            try:
                other = Poly.const(other)
            except TypeError:
                return NotImplemented
        return Poly(_ip_mul(self._c, other._c), self._d * other._d)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise ValueError("polynomial powers need a non-negative integer exponent")
        out = Poly.const(1)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out

    def __truediv__(self, other):
        if isinstance(other, Poly):
            if other.is_constant():
                other = other.constant_value()
            else:
                return RatFunc(self, other)
        other = as_fraction(other)
        if other == 0:
            raise DivisionByZero("division by zero")
        return Poly(_ip_scale(self._c, other.denominator), self._d * other.numerator)

    def exact_div(self, other: Poly) -> Poly:
        """Quotient of an exact polynomial division; ValueError otherwise."""
        other = Poly._coerce(other)
        if not other._c:
            raise DivisionByZero("polynomial division by zero")
        g = _ip_content(other._c)
        # a primitive divisor over Q divides over Z as well (Gauss)
        q = _ip_exact_div(self._c, {m: c // g for m, c in other._c.items()})
        if q is None:
            raise ValueError("polynomial division is not exact")
        return Poly(_ip_scale(q, other._d), self._d * g)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self._d == other._d and self._c == other._c
        try:
            return self == Poly.const(other)
        except TypeError:
            return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((frozenset(self._c.items()), self._d))
        return self._hash

    # substitution -------------------------------------------------------
    def evaluate(self, point: Mapping[str, object]) -> Poly:
        """Substitute rational values for some symbols."""
        vals = {s: as_fraction(v) for s, v in point.items()}
        if not vals:
            return self
        shifts = [(_SHIFT[s], v) for s, v in vals.items()]
        acc: dict = {}
        for m, c in self._c.items():
            coef = Fraction(c)
            for s, v in shifts:
                e = (m >> s) & _MASK
                if e:
                    coef *= v ** e
                    m -= e << s
            acc[m] = acc.get(m, 0) + coef
        den = 1
        for c in acc.values():
            den = den * c.denominator // math.gcd(den, c.denominator)
        return Poly({m: int(c * den) for m, c in acc.items()}, den * self._d)

    def __call__(self, **point) -> Poly:
        return self.evaluate(point)

    def value(self, point: Mapping[str, object]) -> Fraction:
        return self.evaluate(point).constant_value()

    def subs(self, var: str, value) -> Poly:
        """Compose ``var -> value`` for a polynomial (or rational) ``value``."""
        value = Poly._coerce(value)
        coeffs = self.coefficients(var)
        if not coeffs:
            return self
        top = max(coeffs)
        out = Poly()
        for e in range(top, -1, -1):
            out = out * value
            if e in coeffs:
                out = out + coeffs[e]
        return out

    def shift(self, var: str, amount) -> Poly:
        return self.subs(var, Poly.var(var) + as_fraction(amount))

    # gcd ---------------------------------------------------------------
    def primitive(self) -> Poly:
        """Integer primitive associate with positive leading coefficient."""
        return Poly(_ip_normal(self._c))

    def gcd(self, other: Poly) -> Poly:
        return Poly(_ip_gcd(self._c, Poly._coerce(other)._c))

    # text ----------------------------------------------------------------
    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({format_poly(self)!r})"


def poly_gcd(*polys: Poly) -> Poly:
    g = _ip_gcd_many(p._c for p in polys)
    return Poly(g if g else {})


# ---------------------------------------------------------------------------


class RatFunc:
    """Normalized quotient of two polynomials.

    Numerator and denominator are coprime with integer coefficients whose
    joint content is 1, and the denominator's lex-leading coefficient is
    positive, so equal rational functions have identical fields.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=1, _normalized=False):
        num = Poly._coerce(num)
        den = Poly._coerce(den)
        if den.is_zero():
            raise DivisionByZero("rational function with zero denominator")
        if not _normalized:
            num, den = _normalize(num, den)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, *args):
        raise AttributeError("RatFunc is immutable")

    @classmethod
    def _coerce(cls, x) -> RatFunc:
        if isinstance(x, RatFunc):
            return x
        return cls(Poly._coerce(x))

    @classmethod
    def from_coprime(cls, num: Poly, den: Poly) -> RatFunc:
        """Normalize scaling only; the caller guarantees gcd(num, den) = 1."""
        if den.is_zero():
            raise DivisionByZero("rational function with zero denominator")
        return cls(*_normalize(num, den, coprime=True), _normalized=True)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_poly(self) -> Poly:
        if not self.den.is_constant():
            raise ValueError("rational function is not a polynomial")
        return self.num / self.den.constant_value()

    def variables(self) -> tuple:
        vs = set(self.num.variables()) | set(self.den.variables())
        return tuple(s for s in SYMBOLS if s in vs)

    def __neg__(self):
        return RatFunc(-self.num, self.den, _normalized=True)

    def __add__(self, other):
        o = _ratfunc_or_none(other)
        if o is None:
            return NotImplemented
        if self.den == o.den:
            return RatFunc(self.num + o.num, self.den)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __sub__(self, other):
        o = _ratfunc_or_none(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = _ratfunc_or_none(other)
        if o is None:
            return NotImplemented
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _ratfunc_or_none(other)
        if o is None:
            return NotImplemented
        if o.is_zero():
            raise DivisionByZero("division by the zero rational function")
        return RatFunc(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other):
        return RatFunc._coerce(other) / self

    def __pow__(self, e: int):
        if e >= 0:
            return RatFunc(self.num ** e, self.den ** e, _normalized=True) if e else RatFunc(1)
        if self.is_zero():
            raise DivisionByZero("negative power of zero")
        return RatFunc(self.den ** -e, self.num ** -e)

    def __eq__(self, other):
        o = _ratfunc_or_none(other)
        if o is None:
            return NotImplemented
        return self.num == o.num and self.den == o.den

    def __hash__(self):
        return hash((self.num, self.den))

    def subs(self, var: str, value) -> RatFunc:
        return substitute(self, {var: value})

    def evaluate(self, point: Mapping[str, object]) -> RatFunc:
        return substitute(self, point)

    def value(self, point: Mapping[str, object]) -> Fraction:
        """Exact value at a full point; PoleEncountered at a vanishing denominator."""
        d = self.den.evaluate(point)
        if not d.is_constant():
            raise ValueError("point does not bind every symbol")
        dv = d.constant_value()
        if dv == 0:
            raise PoleEncountered(f"denominator {self.den} vanishes at {dict(point)}", factor=str(self.den))
        return self.num.evaluate(point).constant_value() / dv

    def __str__(self):
        return format_ratfunc(self)

    def __repr__(self):
        return f"RatFunc({format_ratfunc(self)!r})"


def _ratfunc_or_none(x):
    if isinstance(x, RatFunc):
        return x
    if isinstance(x, Poly):
        return RatFunc(x, 1, _normalized=False)
    try:
        return RatFunc(Poly.const(x), 1)
    except TypeError:
        return None


def _normalize(num: Poly, den: Poly, coprime: bool = False):
    if num.is_zero():
        return Poly(), Poly.const(1)
    nc, dc = num._c, den._c
    if not coprime and not den.is_constant() and not num.is_constant():
        g = _ip_gcd(nc, dc)
        if g != _ONE:
            nc = _ip_exact_div(nc, g)
            dc = _ip_exact_div(dc, g)
    # clear denominators: num/den = (nc/nd)/(dc/dd) = nc*dd / (dc*nd)
    nc = _ip_scale(nc, den._d)
    dc = _ip_scale(dc, num._d)
    g = math.gcd(*nc.values(), *dc.values())
    if dc[max(dc)] < 0:
        g = -g
    if g != 1:
        nc = {m: c // g for m, c in nc.items()}
        dc = {m: c // g for m, c in dc.items()}
    return Poly(nc), Poly(dc)


def ratfunc_normalize(num, den) -> RatFunc:
    return RatFunc(num, den)


def ratfunc_equal(f, g) -> bool:
    """Cross-multiplication test; no gcd is computed."""
    f = RatFunc._coerce(f) if not isinstance(f, RatFunc) else f
    g = RatFunc._coerce(g) if not isinstance(g, RatFunc) else g
    return (f.num * g.den - g.num * f.den).is_zero()


def substitute(f, bindings: Mapping[str, object]) -> RatFunc:
    """Simultaneous substitution of symbols by rationals, polynomials or RatFuncs."""
    f = RatFunc._coerce(f)
    num, den = f.num, f.den
    consts = {}
    others = {}
    for s, v in bindings.items():
        if s not in _SHIFT:
            raise KeyError(f"unknown symbol {s!r}")
        if isinstance(v, (int, Fraction, str)):
            consts[s] = as_fraction(v)
        else:
            v = RatFunc._coerce(v)
            if v.is_polynomial() and v.is_constant_poly():
                consts[s] = v.num.constant_value() / v.den.constant_value()
            else:
                others[s] = v
    if others:
        introduced = set()
        for v in others.values():
            introduced |= set(v.variables())
        if introduced & set(bindings):
            raise ValueError("bound symbols overlap symbols introduced by the bindings")
        nn, nd = _subs_rat(num, others)
        dn, dd = _subs_rat(den, others)
        num, den = nn * dd, nd * dn
    if consts:
        num = num.evaluate(consts)
        den = den.evaluate(consts)
    if den.is_zero():
        raise PoleEncountered(f"substitution {dict(bindings)} makes the denominator vanish", factor=str(f.den))
    return RatFunc(num, den)


def _is_constant_poly(self) -> bool:
    return self.num.is_constant() and self.den.is_constant()


RatFunc.is_constant_poly = _is_constant_poly


def _subs_rat(p: Poly, bindings: Mapping[str, RatFunc]):
    """Substitute RatFunc values into a polynomial; returns (num, den) polys."""
    num, den = p, Poly.const(1)
    for s, v in bindings.items():
        coeffs = num.coefficients(s)
        if not coeffs:
            continue
        top = max(coeffs)
        acc = Poly()
        pnum = [Poly.const(1)]
        pden = [Poly.const(1)]
        for _ in range(top):
            pnum.append(pnum[-1] * v.num)
            pden.append(pden[-1] * v.den)
        for e, c in coeffs.items():
            acc = acc + c * pnum[e] * pden[top - e]
        num = acc
        den = den * pden[top]
    return num, den


def shift(f, var: str, amount) -> RatFunc:
    f = RatFunc._coerce(f)
    return RatFunc(f.num.shift(var, amount), f.den.shift(var, amount))


# ---------------------------------------------------------------------------
# linear algebra


def solve_linear_system(A: Sequence[Sequence], b: Sequence):
    """Exact Gauss-Jordan elimination over Q.

    Returns one solution as a list of Fractions with free variables set to
    zero, or None when the system is inconsistent.
    """
    rows = len(A)
    cols = len(A[0]) if rows else 0
    if len(b) != rows:
        raise ValueError("right-hand side length does not match the row count")
    m = [[as_fraction(x) for x in row] + [as_fraction(rhs)] for row, rhs in zip(A, b)]
    pivots = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        piv = m[r][c]
        row = [x / piv for x in m[r]]
        m[r] = row
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], row)]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    for i in range(r, rows):
        if m[i][cols] != 0:
            return None
    x = [Fraction(0)] * cols
    for i, c in enumerate(pivots):
        x[c] = m[i][cols]
    return x


def fraction_free_nullspace_vector(M: list, free_preference: Sequence[int] | None = None):
    """One kernel vector of a matrix over Z[symbols].

    Fraction-free Gauss-Jordan elimination keeps every entry a polynomial
    (each is a minor, so the divisions are exact).  After reduction all
    pivots equal the last one, ``D``, and for the first free column ``f``
    the vector ``x_f = D, x_pivot(i) = -M[i][f]`` (others 0) is in the
    kernel.  Returns None when the matrix has full column rank.
    """
    rows = len(M)
    cols = len(M[0]) if rows else 0
    m = [[_to_int_poly(Poly._coerce(x)) for x in row] for row in M]
    prev = dict(_ONE)
    pivots = []
    r = 0
    order = list(range(cols))
    for c in order:
        cand = [i for i in range(r, rows) if m[i][c]]
        if not cand:
            continue
        p = min(cand, key=lambda i: (len(m[i][c]), i))
        m[r], m[p] = m[p], m[r]
        pv = m[r][c]
        for i in range(rows):
            if i == r:
                continue
            mic = m[i][c]
            new = []
            for j in range(cols):
                t = _ip_add(_ip_mul(pv, m[i][j]), _ip_mul(mic, m[r][j]), -1) if (mic or m[i][j]) else {}
                if t and prev != _ONE:
                    t = _ip_exact_div(t, prev)
                new.append(t)
            m[i] = new
        prev = pv
        pivots.append(c)
        r += 1
        if r == rows:
            break
    free = [c for c in range(cols) if c not in pivots]
    if not free:
        return None
    if free_preference:
        f = next((c for c in free_preference if c in free), free[0])
    else:
        f = free[0]
    x = [Poly() for _ in range(cols)]
    x[f] = Poly(prev)
    for i, c in enumerate(pivots):
        x[c] = -Poly(m[i][f])
    return x


def _to_int_poly(p: Poly):
    c, d = p.int_terms()
    if d != 1:
        raise ValueError("fraction-free elimination needs integer polynomial entries")
    return dict(c)


# ---------------------------------------------------------------------------
# rational roots


@dataclass(frozen=True)
class LinearFactorization:
    """``p = constant * prod (var - root)^mult * remainder`` with monic remainder."""

    constant: Fraction
    roots: tuple
    remainder: Poly
    var: str = "j"

    def expand(self) -> Poly:
        x = Poly.var(self.var)
        out = Poly.const(self.constant) * self.remainder
        for root, mult in self.roots:
            out = out * (x - root) ** mult
        return out

    @property
    def complete(self) -> bool:
        return self.remainder.is_constant()


def _divisors(n: int) -> list:
    n = abs(n)
    small, large = [], []
    i = 1
    while i * i <= n:
        if n % i == 0:
            small.append(i)
            if i * i != n:
                large.append(n // i)
        i += 1
    return small + large[::-1]


def _dense_int(p: Poly, var: str) -> list:
    """Integer coefficient list (low to high) of a univariate primitive poly."""
    coeffs = p.primitive().coefficients(var)
    top = max(coeffs)
    out = [0] * (top + 1)
    for e, c in coeffs.items():
        out[e] = c.constant_value().numerator
    return out


def _synthetic(coeffs: list, root: Fraction):
    """Divide by (x - root); returns (quotient, remainder) with Fractions."""
    top = len(coeffs) - 1
    q = [Fraction(0)] * top
    acc = Fraction(0)
    for e in range(top, 0, -1):
        acc = acc * root + coeffs[e]
        q[e - 1] = acc
    rem = acc * root + coeffs[0]
    return q, rem


def factor_linear_rational(p: Poly, var: str = "j") -> LinearFactorization:
    """Split off every rational root of a univariate polynomial."""
    if p.is_zero():
        raise ValueError("cannot factor the zero polynomial")
    if set(p.variables()) - {var}:
        raise ValueError(f"expected a univariate polynomial in {var}")
    lead = p.coefficients(var)[p.degree(var)].constant_value() if not p.is_constant() else p.constant_value()
    if p.is_constant():
        return LinearFactorization(lead, (), Poly.const(1), var)
    coeffs = [Fraction(c) for c in _dense_int(p, var)]
    roots: dict = {}
    zeros = 0
    while coeffs[0] == 0:
        coeffs.pop(0)
        zeros += 1
    if zeros:
        roots[Fraction(0)] = zeros
    progress = True
    while progress and len(coeffs) > 1:
        progress = False
        den = math.lcm(*(c.denominator for c in coeffs))
        ints = [int(c * den) for c in coeffs]
        g = math.gcd(*ints)
        ints = [c // g for c in ints]
        for qd in _divisors(ints[-1]):
            for pn in _divisors(ints[0]):
                for cand in (Fraction(pn, qd), Fraction(-pn, qd)):
                    q, rem = _synthetic(coeffs, cand)
                    if rem == 0:
                        roots[cand] = roots.get(cand, 0) + 1
                        coeffs = q
                        # repeated roots: keep dividing by the same candidate
                        while len(coeffs) > 1:
                            q, rem = _synthetic(coeffs, cand)
                            if rem:
                                break
                            roots[cand] += 1
                            coeffs = q
                        progress = True
                        break
                if progress:
                    break
            if progress:
                break
    top = coeffs[-1]
    remainder = Poly.from_coefficients(var, {e: Poly.const(c / top) for e, c in enumerate(coeffs) if c})
    ordered = tuple(sorted(roots.items()))
    return LinearFactorization(lead, ordered, remainder, var)


# ---------------------------------------------------------------------------
# expression grammar
#
#   expr   := term (('+' | '-') term)*
#   term   := unary (('*' | '/') unary)*
#   unary  := ('-' | '+') unary | power
#   power  := atom ('^' integer)?
#   atom   := integer | symbol | '(' expr ')'
#
# '^' takes a non-negative integer exponent (negative exponents are written
# as divisions).  Whitespace is insignificant.


def _tokenize(text: str, line=None, col0=0):
    toks = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch.isdigit():
            j = i
            while j < len(text) and text[j].isdigit():
                j += 1
            toks.append(("int", int(text[i:j]), i))
            i = j
        elif ch.isalpha():
            j = i
            while j < len(text) and (text[j].isalnum() or text[j] == "_"):
                j += 1
            name = text[i:j]
            if name not in _SHIFT:
                raise ParseError(f"unknown symbol {name!r}", line, col0 + i + 1)
            toks.append(("sym", name, i))
            i = j
        elif ch in "+-*/^()":
            toks.append((ch, ch, i))
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col0 + i + 1)
    toks.append(("end", None, len(text)))
    return toks


class _Parser:
    def __init__(self, text, line=None, col0=0):
        self.toks = _tokenize(text, line, col0)
        self.i = 0
        self.line = line
        self.col0 = col0

    def peek(self):
        return self.toks[self.i][0]

    def take(self, kind=None):
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[0]!r}", self.line, self.col0 + tok[2] + 1)
        self.i += 1
        return tok

    def parse(self):
        v = self.expr()
        if self.peek() != "end":
            tok = self.toks[self.i]
            raise ParseError(f"unexpected {tok[0]!r}", self.line, self.col0 + tok[2] + 1)
        return v

    def expr(self):
        v = self.term()
        while self.peek() in "+-":
            op = self.take()[0]
            w = self.term()
            v = v + w if op == "+" else v - w
        return v

    def term(self):
        v = self.unary()
        while self.peek() in ("*", "/", "int", "sym", "("):
            # juxtaposition ("2 n (a + 1)") multiplies, as in CAS output
            op = self.take()[0] if self.peek() in ("*", "/") else "*"
            w = self.unary()
            if op == "*":
                v = v * w
            else:
                if w.is_zero():
                    raise DivisionByZero("division by zero in expression")
                v = v / w
        return v

    def unary(self):
        if self.peek() == "-":
            self.take()
            return -self.unary()
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        v = self.atom()
        if self.peek() == "^":
            self.take()
            e = self.take("int")[1]
            v = v ** e
        return v

    def atom(self):
        kind = self.peek()
        if kind == "int":
            return RatFunc(Poly.const(self.take()[1]), 1, _normalized=True)
        if kind == "sym":
            return RatFunc(Poly.var(self.take()[1]), 1, _normalized=True)
        if kind == "(":
            self.take()
            v = self.expr()
            self.take(")")
            return v
        tok = self.toks[self.i]
        raise ParseError(f"unexpected {tok[0]!r}", self.line, self.col0 + tok[2] + 1)


def parse_ratfunc(text: str, line=None, col0=0) -> RatFunc:
    return _Parser(text, line, col0).parse()


def parse_poly(text: str, line=None, col0=0) -> Poly:
    f = parse_ratfunc(text, line, col0)
    if not f.is_polynomial():
        raise ParseError(f"expected a polynomial, got {text!r}", line, col0 + 1)
    return f.as_poly()


def parse_rational(text: str) -> Fraction:
    f = parse_ratfunc(text)
    if not (f.is_polynomial() and f.num.is_constant()):
        raise ParseError(f"expected a rational number, got {text!r}")
    return f.num.constant_value() / f.den.constant_value()


def _format_int_poly(c: Mapping[int, int]) -> str:
    if not c:
        return "0"
    parts = []
    for m in sorted(c, reverse=True):
        v = c[m]
        mono = []
        for s, e in zip(SYMBOLS, _unpack(m)):
            if e == 1:
                mono.append(s)
            elif e:
                mono.append(f"{s}^{e}")
        body = "*".join(mono)
        mag = abs(v)
        if not body:
            txt = str(mag)
        elif mag == 1:
            txt = body
        else:
            txt = f"{mag}*{body}"
        if not parts:
            parts.append(txt if v > 0 else "-" + txt)
        else:
            parts.append(("+ " if v > 0 else "- ") + txt)
    return " ".join(parts)


def format_poly(p: Poly) -> str:
    c, d = p.int_terms()
    body = _format_int_poly(c)
    if d == 1:
        return body
    return f"({body})/{d}"


def format_ratfunc(f: RatFunc) -> str:
    if f.den.is_constant() and f.den.constant_value() == 1:
        return format_poly(f.num)
    num = format_poly(f.num)
    den = format_poly(f.den)
    if len(f.num.int_terms()[0]) > 1:
        num = f"({num})"
    if not (f.den.is_constant() or (len(f.den.int_terms()[0]) == 1 and f.den.int_terms()[1] == 1 and "*" not in den)):
        den = f"({den})"
    return f"{num}/{den}"


def format_rational(x) -> str:
    x = as_fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


N, K, A, B, J = (Poly.var(s) for s in SYMBOLS)
