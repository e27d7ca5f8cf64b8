from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperaccel.accelerate import (
    ChuSeries,
    ConstantExpr,
    SeriesInstance,
    TransformFamily,
    accelerated_partial_sum,
    accelerated_terms,
    align_series,
    canonicalize,
    check_tail_vanishing,
    chu_terms,
    convergence_rate,
    emit_chu_style,
    evaluate_chu_series,
    naive_partial_sum,
    parse_constant,
    sum_to_digits,
    telescoped_truncation,
    terms_for_digits,
)
from hyperaccel.certify import Certificate, Recursion
from hyperaccel.errors import DegreeMismatch, NonLinearFactor, ParseError, PoleEncountered
from hyperaccel.exact import parse_poly, parse_ratfunc
from hyperaccel.hyperterm import HyperTerm

Q = Fraction
F_nn = HyperTerm.build(["a", "b"], ["n", "n"])
CERT_NN = Certificate(
    parse_ratfunc("-n^2*(-2*n*(a+b-k+1)+a*b-a*k+a-b*k+b+3*n^2)"),
    parse_poly("-(a-n)^2*(b-n)^2"),
    parse_poly("n^2*(-1-a-b+2*n)*(-a-b+2*n)"),
)
FAM = TransformFamily.from_certificate("nn", F_nn, CERT_NN)
HALF = SeriesInstance(FAM, {"a": Q(1, 2), "b": Q(1, 2), "n": 2})


def test_naive_partial_sums():
    assert naive_partial_sum(HALF, 0) == 0
    assert naive_partial_sum(HALF, 1) == 1
    assert naive_partial_sum(HALF, 2) == Q(17, 16)


def test_accelerated_partial_sums():
    assert accelerated_partial_sum(HALF, 0) == 0
    assert accelerated_partial_sum(HALF, 1) == Q(7, 8)
    assert accelerated_partial_sum(HALF, 2) == Q(7, 8) + Q(27, 128) * Q(13, 16)


def test_accelerated_pole_reports_index():
    inst = SeriesInstance(FAM, {"a": Q(1, 2), "b": Q(1, 2), "n": -1})
    with pytest.raises(PoleEncountered) as err:
        accelerated_partial_sum(inst, 5)
    assert err.value.index == 1


def test_rate_of_family():
    assert convergence_rate(FAM) == Q(1, 4)


def test_rate_requires_equal_degrees():
    rec = Recursion(FAM.recursion.g1, parse_ratfunc("n^3/(n^2+1)"))
    fam = TransformFamily("lopsided", F_nn, CERT_NN, rec, Q(0))
    with pytest.raises(DegreeMismatch):
        convergence_rate(fam)


def test_terms_for_digits():
    assert terms_for_digits(Q(1, 4), 30) <= 70
    assert terms_for_digits(Q(27, 256), 30) <= 45
    with pytest.raises(ValueError):
        terms_for_digits(Q(1), 10)


def test_emission_matches_accelerated_terms():
    s = emit_chu_style(HALF)
    assert s.rate == Q(1, 4)
    assert chu_terms(s, 21) == accelerated_terms(HALF, 21)
    assert s.integer_pairs() == []


def test_emission_aligns_with_ramanujan_display():
    display = ChuSeries(Q(1, 4), [Q(1, 2)] * 3, [1, 1, 1], parse_ratfunc("6*j+1"))
    assert align_series(display, emit_chu_style(HALF)) == (1, Q(1, 4))


def test_emission_rejects_irrational_factor():
    rec = Recursion(FAM.recursion.g1, parse_ratfunc("(n^2+1)/(4*n^2+7)"))
    fam = TransformFamily("irr", F_nn, CERT_NN, rec, Q(1, 4))
    with pytest.raises(NonLinearFactor):
        emit_chu_style(SeriesInstance(fam, {"a": Q(1, 2), "b": Q(1, 2), "n": 2}))


def test_canonicalize_cancels_integer_pairs():
    s = canonicalize(Q(1, 4), [Q(1, 2), Q(1)], [Q(3, 2), Q(2)], parse_ratfunc("1"))
    assert s.uppers == () and s.lowers == ()
    raw = [Q(1, 4) ** j * Q(1, 2) * Q(1) / ((Q(1, 2) + j) * (1 + j)) for j in range(8)]
    assert chu_terms(s, 8) == raw


def test_chu_series_values():
    ram = ChuSeries(Q(1, 4), [Q(1, 2)] * 3, [1, 1, 1], parse_ratfunc("6*j+1"))
    assert evaluate_chu_series(ram, 1) == 1
    assert evaluate_chu_series(ram, 0) == 0
    v, used = sum_to_digits(ram, 20)
    assert abs(float(v) - 4 / 3.141592653589793) < 1e-15


def test_chu_series_lower_pole():
    s = ChuSeries(Q(1, 4), [Q(1, 2)], [Q(-2)], parse_ratfunc("1"))
    with pytest.raises(PoleEncountered):
        evaluate_chu_series(s, 5)


def test_start_index_is_respected():
    s = ChuSeries(Q(1, 4), [], [], parse_ratfunc("1/j"), start_index=1)
    assert evaluate_chu_series(s, 2) == Q(1, 4) + Q(1, 16) / 2


def test_tail_vanishing_probe():
    rep = check_tail_vanishing(HALF, 20, K=40)
    assert rep["decreasing"] and rep["final"] < 1e-10


def test_telescoped_truncation_is_exact():
    lhs, rhs = telescoped_truncation(HALF, 6, 25)
    assert lhs == rhs


def test_constant_parsing():
    c = parse_constant("2187*sqrt3/(4*pi)")
    assert c.terms == (ConstantExpr(Q(2187, 4), (("pi", -1), ("sqrt3", 1))),)
    assert parse_constant(str(c)) == c
    assert len(parse_constant("60*pi - 149").terms) == 2
    with pytest.raises(ParseError):
        parse_constant("3*e")


@settings(max_examples=30, deadline=None)
@given(
    st.fractions(min_value=Q(-2), max_value=Q(2), max_denominator=6),
    st.fractions(min_value=Q(-2), max_value=Q(2), max_denominator=6),
    st.fractions(min_value=Q(1, 2), max_value=Q(4), max_denominator=4),
)
def test_emission_equals_acceleration_for_random_instances(x, y, m):
    inst = SeriesInstance(FAM, {"a": x, "b": y, "n": m})
    try:
        acc = accelerated_terms(inst, 12)
        s = emit_chu_style(inst)
        emitted = chu_terms(s, 12)
    except (PoleEncountered, NonLinearFactor):
        return
    assert emitted == acc
