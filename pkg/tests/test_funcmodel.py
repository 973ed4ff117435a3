import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from density_lab.funcmodel import (
    SINGULAR_AT_ZERO,
    ComplexFrequency,
    DerivativeError,
    MapCheckError,
    ParseError,
    ScalarField,
    StripError,
    as_frequency,
    eval_exponential,
    make_phi,
    parse_expression,
    preset_weight,
)


def richardson_fd(func, x, order, h=1e-2):
    """Central differences of the given order, extrapolated over h, h/2, h/4."""
    from math import comb

    def d(step):
        return sum((-1) ** j * comb(order, j) * func(x + (order / 2 - j) * step) for j in range(order + 1)) / step**order

    a = [d(h), d(h / 2), d(h / 4)]
    b = [(4 * a[1] - a[0]) / 3, (4 * a[2] - a[1]) / 3]
    return (16 * b[1] - b[0]) / 15


# parsing -----------------------------------------------------------------------

def test_parse_gaussian_at_zero():
    assert parse_expression("exp(-x^2/2)")(np.array([0.0]))[0] == 1.0


def test_parse_closed_form():
    assert abs(parse_expression("x*sqrt(1+x^2)")(np.array([1.0]))[0] - math.sqrt(2)) < 1e-15


def test_exotic_is_measurable_only():
    f = parse_expression("exp(-sqrt(x^6+cos(x)+2))*floor(x^2+2)")
    assert not f.smooth


@pytest.mark.parametrize("text,smooth", [("abs(x)", False), ("floor(x)", False), ("exp(x)*sin(x)", True),
                                         ("sqrt(1+x^2)", True), ("cosh(x)-sinh(x)", True)])
def test_smoothness_flag(text, smooth):
    assert parse_expression(text).smooth is smooth


def test_power_is_right_associative():
    assert parse_expression("2^3^2")(np.array([0.0]))[0] == 512.0


def test_unary_minus_binds_looser_than_power():
    assert parse_expression("-x^2")(np.array([3.0]))[0] == -9.0


def test_double_star_alias():
    assert parse_expression("x**2")(np.array([3.0]))[0] == 9.0


def test_syntax_error_reports_position():
    with pytest.raises(ParseError) as err:
        parse_expression("exp(x")
    assert "expected" in str(err.value)


def test_unknown_identifier():
    with pytest.raises(ParseError):
        parse_expression("y+1")
    with pytest.raises(ParseError):
        parse_expression("tan(x)")


def test_two_dimensional_field():
    f = parse_expression("x1*x2^2", n=2)
    assert f(np.array([[2.0, 3.0]]))[0] == 18.0


EXPRS = ["exp(-x^2/2)", "x*sqrt(1+x^2)", "sin(3*x)*exp(-x^2/4)", "1/(1+x^2)", "cosh(x/3)-2^x",
         "-(x-1)^3/(2+cos(x))", "log(2+x^2)*abs(x)", "floor(x^2+2)*exp(-x^2)"]


@pytest.mark.parametrize("text", EXPRS)
def test_round_trip_print_reparse(text):
    f = ScalarField.parse(text)
    g = ScalarField.parse(f.text)
    x = np.random.default_rng(1).uniform(-3, 3, 100)
    assert np.max(np.abs(f(x) - g(x))) <= 1e-14 * max(1.0, np.max(np.abs(f(x))))
    assert g.smooth == f.smooth


# derivatives -------------------------------------------------------------------

def test_derivative_cubic():
    assert parse_expression("x^3").derivative((1,))(np.array([2.0]))[0] == pytest.approx(12.0, abs=1e-13)


def test_second_derivative_gaussian():
    assert parse_expression("exp(-x^2/2)").derivative((2,))(np.array([0.0]))[0] == pytest.approx(-1.0, abs=1e-14)


def test_third_derivative_sinh():
    val = parse_expression("sinh(x)").derivative((3,))(np.array([0.7]))[0]
    assert abs(val - math.cosh(0.7)) < 1e-13
    assert abs(val - 1.255169) < 1e-6


def test_derivative_of_measurable_field_raises():
    with pytest.raises(DerivativeError):
        parse_expression("abs(x)").derivative((1,))


def test_derivative_order_cap():
    with pytest.raises(DerivativeError):
        parse_expression("exp(x)").derivative((7,))


def test_mixed_partial_2d():
    f = parse_expression("x1^2*x2^3", n=2)
    val = f.derivative((1, 2))(np.array([[2.0, 1.5]]))[0]
    assert abs(val - 2 * 2.0 * 6 * 1.5) < 1e-12


ATOMS = ["sin(x)", "cos(x)", "exp(x/3)", "sqrt(2+x^2)", "log(3+x^2)", "cosh(x/2)", "sinh(x/2)", "1/(2+x^2)", "x^3"]


@settings(max_examples=50, deadline=None)
@given(i=st.integers(0, len(ATOMS) - 1), j=st.integers(0, len(ATOMS) - 1), op=st.sampled_from(["+", "*", "/"]),
       order=st.integers(1, 3), x=st.floats(-1.5, 1.5))
def test_forward_mode_matches_richardson(i, j, op, order, x):
    text = f"({ATOMS[i]}){op}(2+{ATOMS[j]})" if op == "/" else f"({ATOMS[i]}){op}({ATOMS[j]})"
    f = ScalarField.parse(text)
    exact = f.derivative((order,))(np.array([x]))[0]
    fd = richardson_fd(lambda t: f(np.array([t]))[0], x, order, h=0.05)
    assert abs(exact - fd) <= 1e-6 * max(1.0, abs(exact))


# presets -----------------------------------------------------------------------

def test_gaussian_preset():
    assert preset_weight("gaussian")(np.array([0.0]))[0] == 1.0


def test_laguerre_preset_values_and_marker():
    f = preset_weight("laguerre", {"alpha": -0.5})
    x = np.array([0.3, 2.0])
    assert np.allclose(f(x), np.exp(-x / 2) * x ** (-0.25), rtol=1e-15)
    assert SINGULAR_AT_ZERO in f.markers
    assert SINGULAR_AT_ZERO not in preset_weight("laguerre", {"alpha": 0.5}).markers


def test_laguerre_alpha_below_minus_one_rejected():
    with pytest.raises(ValueError):
        preset_weight("laguerre", {"alpha": -1.0})


def test_gaussian_nd_one_dimensional_is_translate_seed():
    x = np.linspace(-2, 2, 9)
    assert np.allclose(preset_weight("gaussian_nd")(x), np.exp(-x**2), rtol=1e-15)


def test_gaussian_nd_two_dimensional():
    f = preset_weight("gaussian_nd", {"n": 2})
    assert abs(f(np.array([[1.0, 1.0]]))[0] - math.exp(-2)) < 1e-15


def test_interval_zero_preset_vanishes_on_unit_interval():
    f = preset_weight("interval_zero")
    assert np.all(f(np.linspace(0, 1, 101)) == 0)
    assert np.all(f(np.array([-0.5, 1.5])) > 0)


def test_unknown_preset():
    with pytest.raises(ValueError):
        preset_weight("nope")


# exponentials ------------------------------------------------------------------

def test_eval_exponential_at_zero_frequency(gaussian, identity):
    x = np.linspace(-2, 2, 7)
    assert np.allclose(eval_exponential(0.0, identity, gaussian, x), gaussian(x), rtol=0, atol=0)


def test_eval_exponential_imaginary_tilt(identity):
    eps = 0.8
    val = eval_exponential(ComplexFrequency((0.5j * eps,), eps), identity, ScalarField.constant(1.0), np.array([1.0]))
    assert abs(val[0] - math.exp(eps / 2)) < 1e-15 and val[0].imag == 0


def test_eval_exponential_unit_frequency_at_origin(gaussian, identity):
    assert eval_exponential(1.0, identity, gaussian, np.array([0.0]))[0] == 1 + 0j


def test_strip_violation():
    with pytest.raises(StripError):
        ComplexFrequency((1j,), 0.5)


@settings(max_examples=50, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-0.3, 0.3), c=st.floats(-3, 3), d=st.floats(-0.3, 0.3),
       x=st.floats(-4, 4))
def test_exponential_local_group_law(a, b, c, d, x):
    phi = make_phi("x+x^3")
    one = ScalarField.constant(1.0)
    l1, l2 = as_frequency(complex(a, b), 1.0), as_frequency(complex(c, d), 1.0)
    pt = np.array([x])
    lhs = eval_exponential(l1, phi, one, pt) * eval_exponential(l2, phi, one, pt)
    rhs = eval_exponential(l1 + l2, phi, one, pt)
    assert abs(lhs[0] - rhs[0]) < 1e-12 * max(1.0, abs(rhs[0]))


# maps --------------------------------------------------------------------------

def test_identity_map():
    phi = make_phi("identity")
    assert phi.check.passed
    assert np.all(phi(np.array([-1.0, 2.0])) == np.array([-1.0, 2.0]))


def test_cubic_map_passes():
    assert make_phi("x+x^3").check.passed


def test_square_map_rejected_with_pair():
    with pytest.raises(MapCheckError) as err:
        make_phi("x^2")
    assert err.value.args


def test_affine_zero_slope_rejected():
    with pytest.raises(MapCheckError):
        make_phi({"affine": [0, 1]})


def test_affine_and_sinh_inverse():
    phi = make_phi({"affine": [2.0, -1.0]})
    x = np.linspace(-3, 3, 5)
    assert np.allclose(phi.inverse[0](phi(x)), x)
    s = make_phi("sinh")
    assert np.allclose(s.inverse[0](s(x)), x, atol=1e-14)


def test_nonsmooth_map_rejected():
    with pytest.raises(MapCheckError):
        make_phi("x+abs(x)")


def test_two_dimensional_jacobian_check():
    assert make_phi(["x1+x2^3", "x2"]).check.passed
    with pytest.raises(MapCheckError):
        make_phi(["x1^2", "x2"])
