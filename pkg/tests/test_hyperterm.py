from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperaccel.errors import PoleEncountered
from hyperaccel.exact import RatFunc, parse_ratfunc, substitute
from hyperaccel.hyperterm import (
    HyperTerm,
    admissibility_warnings,
    iter_terms,
    pochhammer,
    shift_ratio,
    term_at_k0,
    term_value,
)

Q = Fraction
F_nn = HyperTerm.build(["a", "b"], ["n", "n"])
F_alt = HyperTerm.build(["a", "b"], ["a+n+1", "b+n+1"], power_base=-1)


def test_pochhammer_values():
    assert pochhammer(Q(1, 2), 3) == Q(15, 8)
    assert pochhammer(-2, 4) == 0
    assert pochhammer(5, 0) == 1


def test_shift_ratios():
    assert shift_ratio(F_nn, "k") == parse_ratfunc("(a+k)*(b+k)/(n+k)^2")
    assert shift_ratio(F_nn, "n") == parse_ratfunc("n^2/(n+k)^2")
    assert shift_ratio(F_alt, "k") == parse_ratfunc("-(a+k)*(b+k)/((a+n+k+1)*(b+n+k+1))")


def test_term_value_and_iteration():
    pt = {"a": Q(1, 2), "b": Q(1, 2), "n": 2}
    assert term_value(F_nn, pt, 1) == Q(1, 16)
    gen = iter_terms(F_nn, pt)
    assert [next(gen) for _ in range(4)] == [1, Q(1, 16), Q(1, 64), Q(25, 4096)]


def test_lower_pole_reported():
    with pytest.raises(PoleEncountered) as err:
        term_value(F_nn, {"a": 1, "b": 1, "n": 0}, 2)
    assert err.value.index == 1


def test_prefactor_at_k0():
    F = HyperTerm.build(["a", "b"], ["n", "n"], prefactor=parse_ratfunc("1/(k+n)"))
    assert term_at_k0(F) == parse_ratfunc("1/n")


def test_admissibility_is_advisory():
    assert admissibility_warnings(F_nn) == []
    bad = HyperTerm.build(["a"], ["n"])
    assert admissibility_warnings(bad)


@settings(max_examples=40, deadline=None)
@given(
    st.fractions(min_value=-3, max_value=3, max_denominator=6),
    st.fractions(min_value=-3, max_value=3, max_denominator=6),
    st.fractions(min_value=Q(1, 6), max_value=4, max_denominator=6),
    st.integers(0, 6),
)
def test_iterated_terms_follow_k_ratio(x, y, m, kk):
    pt = {"a": x, "b": y, "n": m}
    t0 = term_value(F_nn, pt, kk)
    t1 = term_value(F_nn, pt, kk + 1)
    rho = substitute(shift_ratio(F_nn, "k"), dict(pt, k=kk))
    assert t1 == t0 * rho.value({})
