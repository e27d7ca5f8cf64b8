from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperaccel.errors import ParseError, PoleEncountered
from hyperaccel.exact import (
    Poly,
    RatFunc,
    factor_linear_rational,
    format_poly,
    format_ratfunc,
    fraction_free_nullspace_vector,
    parse_poly,
    parse_ratfunc,
    ratfunc_equal,
    shift,
    solve_linear_system,
    substitute,
)

n, k, a, b, j = (Poly.var(s) for s in "nkabj")

small = st.integers(-6, 6)


@st.composite
def polys(draw, names="nab", max_terms=4, max_deg=3):
    out = Poly.const(0)
    for _ in range(draw(st.integers(0, max_terms))):
        term = Poly.const(draw(small))
        for s in names:
            term = term * Poly.var(s) ** draw(st.integers(0, max_deg))
        out = out + term
    return out


def test_ring_basics():
    p = (n + 1) * (n - 1)
    assert p == n ** 2 - 1
    assert p.degree("n") == 2
    assert (p + 1).is_constant() is False
    assert Poly.const(Fraction(3, 4)).constant_value() == Fraction(3, 4)
    assert p.value({"n": 3}) == 8


def test_exact_division_and_gcd():
    f = (n + a) ** 2 * (n - 2 * b + 1)
    g = (n + a) * (n + 3)
    assert f.gcd(g).primitive() == (n + a).primitive()
    assert (f * g).exact_div(g) == f


def test_ratfunc_normalizes():
    r = RatFunc((n + 1) * (n + 2), (n + 1) * (n - 5))
    assert r == RatFunc(n + 2, n - 5)
    assert r.den.leading_coefficient() > 0


def test_value_raises_on_pole():
    with pytest.raises(PoleEncountered):
        RatFunc(1, n - 2).value({"n": 2})


def test_shift_and_substitute():
    r = RatFunc(n, n + k)
    assert shift(r, "k", 1) == RatFunc(n, n + k + 1)
    assert substitute(r, {"n": 2, "k": 1}) == RatFunc(Fraction(2, 3))
    assert substitute(r, {"n": RatFunc(k, 2)}) == RatFunc(k, 3 * k)


def test_parse_mathematica_juxtaposition():
    assert parse_ratfunc("(1/(k + 2 n))2 n^2 (1 + 2 n)") == RatFunc(2 * n ** 2 * (1 + 2 * n), k + 2 * n)


def test_parse_error_position():
    with pytest.raises(ParseError) as err:
        parse_poly("n + $", line=7)
    assert err.value.line == 7 and err.value.column == 5


def test_parse_rejects_unknown_symbol():
    with pytest.raises(ParseError):
        parse_poly("n + x")


def test_solve_linear_system():
    A = [[2, 1], [1, 3]]
    assert solve_linear_system(A, [3, 5]) == [Fraction(4, 5), Fraction(7, 5)]
    assert solve_linear_system([[1, 1], [2, 2]], [1, 3]) is None


def test_nullspace_vector_over_polynomials():
    M = [[n, -(n + 1), Poly.const(0)], [Poly.const(0), a, -Poly.const(1)]]
    v = fraction_free_nullspace_vector(M)
    assert v is not None and any(not x.is_zero() for x in v)
    for row in M:
        assert sum((x * y for x, y in zip(row, v)), Poly.const(0)).is_zero()


def test_factor_linear_rational():
    p = 4 * (j + Fraction(1, 2)) ** 2 * (j - 3) * (j ** 2 + 1)
    f = factor_linear_rational(p)
    assert dict(f.roots) == {Fraction(-1, 2): 2, Fraction(3): 1}
    assert not f.complete
    assert f.expand() == p


@settings(max_examples=60, deadline=None)
@given(polys(), polys())
def test_format_parse_round_trip(p, q):
    assert parse_poly(format_poly(p)) == p
    if not q.is_zero():
        r = RatFunc(p, q)
        assert parse_ratfunc(format_ratfunc(r)) == r


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), polys())
def test_gcd_divides_both(p, q, c):
    if p.is_zero() or q.is_zero() or c.is_zero():
        return
    g = (p * c).gcd(q * c)
    assert (p * c).exact_div(g) * g == p * c
    assert (q * c).exact_div(g) * g == q * c
    assert g.exact_div(c.primitive()) is not None


@settings(max_examples=40, deadline=None)
@given(polys(), polys(), polys(), polys())
def test_ratfunc_field_laws(p, q, s, t):
    if q.is_zero() or t.is_zero():
        return
    x, y = RatFunc(p, q), RatFunc(s, t)
    assert ratfunc_equal(x + y, y + x)
    assert ratfunc_equal((x + y) - y, x)
    if not s.is_zero():
        assert ratfunc_equal(x * y / y, x)
