from fractions import Fraction

import pytest

from hyperaccel.certify import (
    Certificate,
    Recursion,
    derive_recursion,
    find_certificate,
    match_published_recursion,
    scale_certificate,
    telescoped_partial_sums,
    verify_certificate,
)
from hyperaccel.errors import ZeroP2
from hyperaccel.exact import Poly, RatFunc, parse_poly, parse_ratfunc, ratfunc_equal
from hyperaccel.hyperterm import HyperTerm

Q = Fraction
F_nn = HyperTerm.build(["a", "b"], ["n", "n"])
CERT_NN = Certificate(
    parse_ratfunc("-n^2*(-2*n*(a+b-k+1)+a*b-a*k+a-b*k+b+3*n^2)"),
    parse_poly("-(a-n)^2*(b-n)^2"),
    parse_poly("n^2*(-1-a-b+2*n)*(-a-b+2*n)"),
)


def test_known_certificate_verifies():
    rep = verify_certificate(F_nn, CERT_NN)
    assert rep.holds and rep.residual.is_zero()


def test_perturbed_certificate_fails():
    bad = Certificate(CERT_NN.R, CERT_NN.p1 + 1, CERT_NN.p2)
    rep = verify_certificate(F_nn, bad)
    assert not rep.holds and not rep.residual.is_zero()


def test_recursion_from_certificate():
    rec = derive_recursion(F_nn, CERT_NN)
    g1 = parse_ratfunc("(a+b+a*b-2*(1+a+b)*n+3*n^2)/((a+b-2*n)*(1+a+b-2*n))")
    g2 = parse_ratfunc("(a-n)^2*(b-n)^2/((a+b-2*n)*(1+a+b-2*n)*n^2)")
    assert match_published_recursion(rec, Recursion(g1, g2))
    assert rec.g2.value({"a": Q(1, 2), "b": Q(1, 2), "n": 2}) == Q(27, 128)


def test_zero_p2_rejected():
    with pytest.raises(ZeroP2):
        derive_recursion(F_nn, Certificate(CERT_NN.R, CERT_NN.p1, Poly.const(0)))


def test_certificate_rejects_k_in_p1():
    with pytest.raises(ValueError):
        Certificate(CERT_NN.R, parse_poly("n+k"), CERT_NN.p2)


def test_scaling_preserves_validity():
    c = scale_certificate(CERT_NN, parse_poly("3*n+a"))
    assert verify_certificate(F_nn, c).holds
    assert match_published_recursion(derive_recursion(F_nn, c), derive_recursion(F_nn, CERT_NN))


def test_telescoped_partial_sums_agree_exactly():
    lhs, rhs = telescoped_partial_sums(F_nn, CERT_NN, {"a": Q(1, 3), "b": Q(2, 3), "n": 2}, 12)
    assert lhs == rhs


def test_discovery_reproduces_known_recursion():
    c = find_certificate(F_nn, r=1, degree_bound=4)
    assert c is not None and verify_certificate(F_nn, c).holds
    assert ratfunc_equal(RatFunc(-c.p1, c.p2), RatFunc(-CERT_NN.p1, CERT_NN.p2))


def test_discovery_respects_degree_bound():
    assert find_certificate(F_nn, r=1, degree_bound=0) is None


def test_discovery_with_prefactor():
    F = HyperTerm.build(["a", "b"], ["n", "n"], prefactor=parse_ratfunc("1/(k+n)"))
    c = find_certificate(F, r=1, degree_bound=4)
    assert c is not None and verify_certificate(F, c).holds
