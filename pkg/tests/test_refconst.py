from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperaccel.accelerate import parse_constant
from hyperaccel.errors import InsufficientScale, UnknownAtom
from hyperaccel.refconst import FixedDecimal, digits_agree, reference_value


def test_pi_and_sqrt2_digits():
    assert str(reference_value("pi", 30)) == "3.141592653589793238462643383279"
    assert str(reference_value("sqrt2", 10)) == "1.4142135623"


def test_composite_constant():
    r = reference_value(parse_constant("768/pi"), 20)
    assert str(r).startswith("244.46199258915123574")


def test_unknown_atom():
    with pytest.raises(UnknownAtom):
        reference_value("e", 10)


@pytest.mark.parametrize(
    "name, digits",
    [
        ("ln2", "0.69314718055994530941723212145817656807"),
        ("zeta3", "1.20205690315959428539973816151144999076"),
        ("G", "0.91596559417721901505460351493238411077"),
        ("sqrt3", "1.73205080756887729352744634150587236694"),
        ("cbrt2", "1.25992104989487316476721060727822835057"),
    ],
)
def test_atoms_against_published_digits(name, digits):
    assert str(reference_value(name, 38)) == digits


def test_digits_agree_examples():
    ref = reference_value("pi", 10)
    assert digits_agree(Fraction(22, 7), ref) == 3
    assert digits_agree(0, ref) == 0
    assert digits_agree(ref.as_fraction(), ref) == 11


def test_digits_agree_needs_nonzero_reference():
    with pytest.raises(InsufficientScale):
        digits_agree(Fraction(1, 10 ** 12), FixedDecimal(0, 5))


@pytest.mark.parametrize("name", ["pi", "ln2", "zeta3", "G", "sqrt2", "sqrt3", "cbrt2"])
def test_refinement_is_stable(name):
    lo = str(reference_value(name, 40))
    hi = str(reference_value(name, 80))
    assert hi.startswith(lo)


def test_sqrt2_squared():
    D = 40
    x = reference_value("sqrt2", D).as_fraction()
    assert abs(x * x - 2) < Fraction(10) ** (1 - D)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 60))
def test_pi_prefix_property(d):
    assert str(reference_value("pi", 90)).startswith(str(reference_value("pi", d)))
