"""Reference values of the target constants in scaled-integer arithmetic.

Each oracle returns an integer ``m`` with ``|value - m / 10^s| <= err`` units
of ``10^-s``.  The formulas here are deliberately different from every
series the library accelerates, so a reference never checks a series
against itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, isqrt

from .accelerate import ATOMS, ConstantExpr, ConstantSum
from .errors import InsufficientScale, UnknownAtom

GUARD = 10


@dataclass(frozen=True)
class FixedDecimal:
    """``mantissa / 10^scale`` with ``|true - value| <= error_bound / 10^scale``."""

    mantissa: int
    scale: int
    error_bound: int = 1

    def as_fraction(self) -> Fraction:
        return Fraction(self.mantissa, 10 ** self.scale)

    def __str__(self):
        sign = "-" if self.mantissa < 0 else ""
        s = str(abs(self.mantissa)).rjust(self.scale + 1, "0")
        if self.scale == 0:
            return sign + s
        return f"{sign}{s[:-self.scale]}.{s[-self.scale:]}"


# ---------------------------------------------------------------------------
# scaled-integer oracles; each returns (mantissa at 10^-s, error in ulps)


def _arctan_inv(x: int, one: int):
    """arctan(1/x) * one by the alternating Taylor series."""
    total = 0
    power = one // x
    x2 = x * x
    k = 0
    terms = 0
    while power:
        t = power // (2 * k + 1)
        total += -t if k % 2 else t
        power //= x2
        k += 1
        terms += 1
    # one floor per division plus the alternating tail
    return total, 2 * terms + 1


def _pi(s: int):
    one = 10 ** s
    a, ea = _arctan_inv(5, one)
    b, eb = _arctan_inv(239, one)
    return 16 * a - 4 * b, 16 * ea + 4 * eb


def _ln2(s: int):
    one = 10 ** s
    total = 0
    k = 1
    while True:
        t = one // (k << k)
        if t == 0:
            break
        total += t
        k += 1
    # k floors, and the tail after the last nonzero term is below 2 ulps
    return total, k + 2


def _sqrt(n: int, s: int):
    return isqrt(n * 10 ** (2 * s)), 1


def _cbrt2(s: int):
    target = 2 * 10 ** (3 * s)
    x = 1 << ((target.bit_length() + 2) // 3 + 1)
    while True:
        y = (2 * x + target // (x * x)) // 3
        if y >= x:
            break
        x = y
    while x ** 3 > target:
        x -= 1
    while (x + 1) ** 3 <= target:
        x += 1
    return x, 1


def _zeta3(s: int):
    # zeta(3) = 5/2 sum_{n>=1} (-1)^(n-1) / (n^3 binom(2n, n))
    one = 10 ** s
    total = 0
    n = 1
    while True:
        t = one // (n ** 3 * comb(2 * n, n))
        if t == 0:
            break
        total += -t if n % 2 == 0 else t
        n += 1
    return 5 * total // 2, 3 * n + 3


def _catalan(s: int):
    # G = 3/8 sum 1/((2n+1)^2 binom(2n,n)) + pi/8 * ln(2 + sqrt3)
    one = 10 ** s
    a = 0
    n = 0
    while True:
        t = one // ((2 * n + 1) ** 2 * comb(2 * n, n))
        if t == 0:
            break
        a += t
        n += 1
    ea = n + 2
    # ln(2 + sqrt3) = (2/sqrt3) sum_k 3^-k / (2k+1)
    b = 0
    k = 0
    while True:
        t = one // (3 ** k * (2 * k + 1))
        if t == 0:
            break
        b += t
        k += 1
    eb = k + 2
    r3, _ = _sqrt(3, s)
    ln = 2 * b * one // r3
    eln = 2 * eb + 4
    pi, epi = _pi(s)
    val = 3 * a // 8 + pi * ln // (8 * one)
    err = 3 * ea // 8 + 1 + (epi * 4 * one + eln * pi) // (8 * one) + 2
    return val, err


_ORACLES = {
    "pi": _pi,
    "ln2": _ln2,
    "zeta3": _zeta3,
    "G": _catalan,
    "sqrt2": lambda s: _sqrt(2, s),
    "sqrt3": lambda s: _sqrt(3, s),
    "cbrt2": _cbrt2,
}
assert set(_ORACLES) == set(ATOMS)


@lru_cache(maxsize=None)
def _atom_interval(name: str, s: int):
    """Exact rational interval containing the atom at working scale s."""
    if name not in _ORACLES:
        raise UnknownAtom(name)
    m, e = _ORACLES[name](s)
    d = 10 ** s
    return Fraction(m - e, d), Fraction(m + e, d)


def _mul(x, y):
    prods = [a * b for a in x for b in y]
    return min(prods), max(prods)


def _pow(iv, e: int):
    lo, hi = iv
    if e < 0:
        if lo <= 0 <= hi:
            raise ZeroDivisionError("interval contains zero")
        lo, hi = 1 / hi, 1 / lo
        e = -e
    out = (Fraction(1), Fraction(1))
    for _ in range(e):
        out = _mul(out, (lo, hi))
    return out


def _interval(c, s: int):
    if isinstance(c, ConstantSum):
        lo = hi = Fraction(0)
        for t in c.terms:
            a, b = _interval(t, s)
            lo, hi = lo + a, hi + b
        return lo, hi
    iv = (c.coefficient, c.coefficient)
    for name, e in c.atoms:
        iv = _mul(iv, _pow(_atom_interval(name, s), e))
    return iv


def _floor(x: Fraction, scale: int) -> int:
    v = x * 10 ** scale
    return v.numerator // v.denominator


@lru_cache(maxsize=4096)
def reference_value(c, digits: int) -> FixedDecimal:
    """``c`` truncated to ``digits`` decimal places.

    ``c`` is a ConstantExpr, a ConstantSum, or an atom name.  Work starts
    with ten guard digits and is repeated with more until both ends of the
    enclosing interval truncate to the same decimal.
    """
    if digits < 1:
        raise ValueError("digits must be at least 1")
    if isinstance(c, str):
        if c not in _ORACLES:
            raise UnknownAtom(c)
        c = ConstantExpr(1, ((c, 1),))
    for t in c.terms if isinstance(c, ConstantSum) else (c,):
        for name, _ in t.atoms:
            if name not in _ORACLES:
                raise UnknownAtom(name)
    guard = GUARD
    while True:
        lo, hi = _interval(c, digits + guard)
        m = _floor(lo, digits)
        if m == _floor(hi, digits) or guard > 40 * GUARD:
            return FixedDecimal(m, digits, 1)
        guard *= 2


def reference_float(c, digits: int = 20) -> float:
    return float(reference_value(c, digits).as_fraction())


def digits_agree(x, ref: FixedDecimal) -> int:
    """Number of leading significant digits on which x matches ref.

    Measured as the largest d with ``|x - ref| < |ref| 10^-d``; when the
    difference is within ref's own uncertainty every significant digit of
    ref counts.
    """
    x = Fraction(x)
    r = ref.as_fraction()
    if ref.mantissa == 0:
        raise InsufficientScale("reference rounds to zero at its scale")
    full = len(str(abs(ref.mantissa)))
    diff = abs(x - r)
    if diff <= Fraction(ref.error_bound, 10 ** ref.scale):
        return full
    d = 0
    bound = abs(r)
    while d < full and diff < bound / 10:
        bound /= 10
        d += 1
    return d


__all__ = ["FixedDecimal", "GUARD", "digits_agree", "reference_float", "reference_value"]
