import io
from fractions import Fraction

import pytest

from hyperaccel.catalog import (
    HEADER,
    builtin_catalog,
    display_problems,
    dump_catalog,
    load_catalog,
    perturb_summand,
    validate_entry,
)
from hyperaccel.certify import match_published_recursion, verify_certificate
from hyperaccel.errors import ParseError, ValidationError

FAMILY_NN = """family nn
  upper     a, b
  lower     n, n
  power     1
  prefactor 1
  r         1
  R         -n^2*(-2*n*(a+b-k+1)+a*b-a*k+a-b*k+b+3*n^2)
  p1        -(a-n)^2*(b-n)^2
  p2        {p2}
  g1        (a+b+a*b-2*(1+a+b)*n+3*n^2)/((a+b-2*n)*(1+a+b-2*n))
  g2        (a-n)^2*(b-n)^2/((a+b-2*n)*(1+a+b-2*n)*n^2)
end
"""
P2 = "n^2*(-1-a-b+2*n)*(-a-b+2*n)"


def doc(*blocks):
    return HEADER + "\n\n" + "\n".join(blocks)


def test_builtin_shape(catalog):
    assert len(catalog.families) >= 9
    assert len(catalog.entries) >= 38
    assert sum(e.numeric_only for e in catalog.entries) == 11


def test_entry_768(catalog):
    e = catalog.entry("768-over-pi")
    assert str(e.target) == "768/pi"
    assert e.displayed.rate == Fraction(4, 27)
    assert str(e.displayed.summand) == "368*j^3 + 952*j^2 + 810*j + 225"


def test_entry_567zeta3(catalog):
    e = catalog.entry("567zeta3")
    assert str(e.target) == "567*zeta3"
    assert e.displayed.rate == Fraction(-1, 27)
    assert e.displayed.summand.num.degree("j") == 5


def test_rate_27_256_background_series(catalog):
    chu = [e for e in catalog.entries if e.id.startswith("chu-")]
    assert len(chu) == 3 and all(e.numeric_only for e in chu)
    assert catalog.entry("chu-60pi-minus-149").start_index == 1


def test_stored_recursions_match(catalog):
    for f in catalog.families.values():
        assert verify_certificate(f.term, f.certificate).holds
        assert match_published_recursion(f.recursion, f.stored)


def test_displays_line_up(catalog):
    assert display_problems(catalog) == []


def test_round_trip(catalog):
    text = dump_catalog(catalog)
    again = load_catalog(io.StringIO(text))
    assert again == catalog
    assert dump_catalog(again) == text


def test_zero_p2_rejected():
    with pytest.raises(ValidationError, match="p2"):
        load_catalog(doc(FAMILY_NN.format(p2="0")))


def test_lower_pole_names_k():
    entry = """entry bad
  family    nn
  assign    a=1/2, b=1/2, n=-3
  target    4/pi
end
"""
    with pytest.raises(ValidationError, match="k=3"):
        load_catalog(doc(FAMILY_NN.format(p2=P2), entry))


def test_parse_error_location():
    text = doc(FAMILY_NN.format(p2="n^2*(2*n + $)"))
    with pytest.raises(ParseError) as err:
        load_catalog(text)
    line = text.splitlines()[err.value.line - 1]
    assert line.lstrip().startswith("p2")
    assert line[err.value.column - 1] == "$"


def test_missing_header():
    with pytest.raises(ParseError):
        load_catalog("family x\nend\n")


def test_wrong_certificate_rejected():
    text = doc(FAMILY_NN.format(p2=P2).replace("-(a-n)^2*(b-n)^2", "-(a-n)^2*(b-n)^2+1"))
    with pytest.raises(ValidationError):
        load_catalog(text)


def test_validate_entry_passes(catalog):
    rep = validate_entry(catalog.entry("ramanujan-4-over-pi"), 30, catalog)
    assert rep.passed and rep.terms <= 65


def test_validate_rate_27_256(catalog):
    rep = validate_entry(catalog.entry("33554432sqrt2-over-105pi"), 30, catalog)
    assert rep.passed and rep.terms <= 45


def test_wrong_coefficient_detected(catalog):
    from dataclasses import replace

    from hyperaccel.accelerate import parse_constant

    e = replace(catalog.entry("768-over-pi"), target=parse_constant("769/pi"))
    rep = validate_entry(e, 30, catalog)
    assert not rep.passed and rep.digits <= 4


def test_perturbation_changes_constant_term(catalog):
    e = catalog.entry("768-over-pi")
    p = perturb_summand(e)
    assert p.displayed.summand.num.value({"j": 0}) == 226


def test_closing_series_match_binomial_forms(catalog):
    from math import comb

    def pochs(s, j):
        out = s.rate ** j
        for u in s.uppers:
            for i in range(j):
                out *= u + i
        for low in s.lowers:
            for i in range(j):
                out /= low + i
        return out * s.summand.value({"j": j})

    forms = {
        "zeta3-central-binomial": lambda j: Fraction(
            (-1) ** (j - 1) * (40885 * j**5 - 80079 * j**4 + 61626 * j**3 - 23366 * j**2 + 4374 * j - 324),
            16 * j**5 * (2 * j - 1) ** 3 * comb(3 * j, 2 * j) ** 4 * comb(2 * j, j),
        ),
        "minus8zeta3-central-binomial": lambda j: Fraction(
            (-1) ** j * (126392 * j**5 - 219252 * j**4 + 144666 * j**3 - 46039 * j**2 + 7128 * j - 432),
            j**5 * (2 * j - 1) ** 3 * comb(4 * j, 2 * j) ** 3 * comb(3 * j, j) * comb(2 * j, j),
        ),
        "sqrt2-over-2-rate-1-64": lambda j: Fraction(
            (3 + 184 * j - 336 * j**2) * comb(4 * j, 2 * j), (4 * j - 1) * (4 * j - 3) * 2 ** (10 * j)
        ),
        "pi2-over-2-rate-1-64": lambda j: Fraction(
            (14 * j - 3) * (3 * j - 1) * 16**j, j**3 * (2 * j - 1) * comb(4 * j, 2 * j) ** 2 * comb(2 * j, j)
        ),
    }
    for eid, form in forms.items():
        s = catalog.entry(eid).displayed
        for j in range(s.start_index, s.start_index + 8):
            assert pochs(s, j) == form(j), (eid, j)
