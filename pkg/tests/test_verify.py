import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from density_lab.approx import DualFunctional
from density_lab.funcmodel import ScalarField, make_phi, preset_weight
from density_lab.funcmodel.phi import StripError
from density_lab.spaces import make_space
from density_lab.verify import (
    FourierConvention,
    HolomorphicProbe,
    check_group_law,
    check_lemma28,
    check_lemma212,
    check_prop210,
    compare_closures,
    complex_step,
    default_frequency_grid,
    gaussian_dictionary,
    h_map,
    moment_side,
    richardson,
)

C = math.sqrt(2 * math.pi / 3)


def f(text):
    return ScalarField.parse(text)


def probe(g="exp(-x^2)", eps=1.0):
    return HolomorphicProbe(DualFunctional("integrate", g=f(g), q=2.0), make_phi("identity"),
                            preset_weight("gaussian"), eps)


@pytest.fixture(scope="module")
def centred():
    return probe()


@pytest.fixture(scope="module")
def shifted():
    return probe("exp(-(x-1)^2)")


def _shifted_moment(k):
    mpmath.mp.dps = 30
    v = mpmath.quad(lambda x: x**k * mpmath.exp(-(x - 1) ** 2 - x**2 / 2), [-mpmath.inf, mpmath.inf])
    return complex((-1j) ** k * complex(v))


# Fourier convention ---------------------------------------------------------------

def test_fourier_convention_check_passes():
    rec = FourierConvention.check()
    assert rec.passed and rec.residual < 1e-10


def test_no_two_pi_prefactor():
    assert FourierConvention.gaussian_transform(0.0) == pytest.approx(math.sqrt(2 * math.pi))
    assert FourierConvention.sign == -1 and FourierConvention.prefactor == 1.0


def test_transform_of_shifted_gaussian_has_negative_phase(whole_line_rule):
    # F(exp(-(l-1)^2/2))(xi) = sqrt(2 pi) exp(-xi^2/2) exp(-i xi)
    xi = np.array([0.5, 1.0, 2.0])
    got = FourierConvention.transform(lambda t: np.exp(-0.5 * (t - 1) ** 2), xi, whole_line_rule)
    want = math.sqrt(2 * math.pi) * np.exp(-0.5 * xi**2 - 1j * xi)
    assert np.allclose(got, want, atol=1e-12)


# H map -----------------------------------------------------------------------------

@pytest.mark.parametrize("lam", [0.0, 0.7, -2.5, 0.3 + 0.4j, -1 - 0.9j])
def test_h_closed_form(centred, lam):
    assert centred(lam) == pytest.approx(C * np.exp(-lam**2 / 6), rel=1e-12)


def test_h_outside_strip_rejected(centred):
    with pytest.raises(StripError):
        centred(1j)


def test_h_map_rule_override(centred, whole_line_rule):
    assert h_map(centred, 0.5, whole_line_rule) == pytest.approx(C * math.exp(-0.25 / 6), rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(-0.9, 0.9))
def test_conjugate_symmetry(re, im):
    p = probe("exp(-(x-1)^2)")
    lam = complex(re, im)
    assert p.conjugate_symmetry(lam) < 1e-12 * max(1.0, abs(p(lam)))


def test_plain_conjugation_fails_without_parity(shifted):
    # for non-even data H(conj lambda) and conj H(lambda) differ
    lam = 0.8 + 0.3j
    assert abs(shifted(lam.conjugate()) - np.conj(shifted(lam))) > 1e-3


def test_plain_conjugation_holds_with_parity(centred):
    lam = 0.8 + 0.3j
    assert abs(centred(lam.conjugate()) - np.conj(centred(lam))) < 1e-13


# derivatives against moments ------------------------------------------------------

@pytest.mark.parametrize("k,want", [(1, 0.0), (2, -C / 3), (3, 0.0), (4, C / 3)])
def test_moment_side_closed_form(centred, k, want):
    # int x^2 exp(-3x^2/2) = C/3, int x^4 exp(-3x^2/2) = C/3 for C = sqrt(2 pi / 3)
    assert moment_side(centred, (k,)) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_moment_side_shifted(shifted, k):
    assert moment_side(shifted, (k,)) == pytest.approx(_shifted_moment(k), rel=1e-10)


@pytest.mark.parametrize("k", [1, 2, 3])
def test_prop210_richardson(shifted, k):
    rec = check_prop210(shifted, k, "richardson-fd")
    assert rec.passed, rec.to_dict()


def test_prop210_complex_step(shifted):
    rec = check_prop210(shifted, 1, "complex-step")
    assert rec.passed and rec.residual < 1e-10
    assert complex_step(shifted) == pytest.approx(_shifted_moment(1), rel=1e-12)


@pytest.mark.parametrize("k", [1, 2])
def test_richardson_improves_on_plain_difference(shifted, k):
    exact = _shifted_moment(k)
    plain = abs(richardson(shifted, (k,), levels=1) - exact)
    extrapolated = abs(richardson(shifted, (k,), levels=3) - exact)
    assert extrapolated < plain / 100


def test_prop210_method_limits(shifted):
    with pytest.raises(ValueError):
        check_prop210(shifted, 2, "complex-step")
    with pytest.raises(ValueError):
        check_prop210(shifted, 5, "richardson-fd")
    with pytest.raises(ValueError):
        check_prop210(shifted, 1, "spline")


def test_check_record_json(shifted):
    d = check_prop210(shifted, 1).to_dict()
    assert d["check_name"] == "prop210" and isinstance(d["pass"], bool)
    assert isinstance(d["lhs"], list) and len(d["lhs"]) == 2


# superposition -----------------------------------------------------------------------

def test_lemma212_gaussian_closed_form():
    rec = check_lemma212(f("exp(-x^2/2)"), "identity", preset_weight("gaussian"), 32)
    assert rec.passed and rec.parameters["rhs_source"] == "closed-form"


def test_lemma212_residual_drops_with_order():
    a = check_lemma212(f("exp(-x^2/2)"), "identity", preset_weight("gaussian"), 16)
    b = check_lemma212(f("exp(-x^2/2)"), "identity", preset_weight("gaussian"), 32)
    assert b.residual < a.residual / 10


def test_lemma212_non_gaussian_uses_quadrature_oracle():
    rec = check_lemma212(f("exp(-x^2)"), "sinh", preset_weight("gaussian"), 64, x_grid=np.linspace(-2, 2, 21))
    assert rec.parameters["rhs_source"] == "adaptive-quadrature"
    assert rec.passed, rec.residual


# growth and group law ----------------------------------------------------------------

def test_lemma28_lp_norm_is_flat(centred):
    rec = check_lemma28(centred, np.linspace(0, 20, 11), make_space("Lp", {"p": 2}))
    assert rec.passed and abs(rec.lhs) < 1e-6


def test_lemma28_first_derivative_grows_linearly(centred):
    sp = make_space("Schwartz", {"alpha_max": 1, "N_max": 0})
    rec = check_lemma28(centred, np.geomspace(10, 200, 8), sp, alpha=1)
    assert rec.passed and rec.lhs == pytest.approx(1.0, abs=0.05)


@pytest.mark.parametrize("l1,l2", [(0.3, -0.7), (1.5, 2.0), (0.2 + 0.3j, -0.4 + 0.2j)])
def test_group_law(shifted, l1, l2):
    assert check_group_law(shifted, l1, l2).passed


# closures -----------------------------------------------------------------------------

def test_frequency_grids_nested():
    coarse, fine = default_frequency_grid(5), default_frequency_grid(9)
    assert set(coarse) <= set(fine)
    assert default_frequency_grid(1) == [0.0]
    assert fine[0] == -4.0 and fine[-1] == 4.0


def test_gaussian_dictionary():
    d = gaussian_dictionary(3, 2.0)
    assert [b.name for b in d] == ["bump@-2", "bump@0", "bump@2"]
    assert d[2](np.array([2.0]))[0] == 1.0


def test_closures_agree_for_gaussian_weight():
    sp = make_space("Lp", {"p": 2})
    cmp = compare_closures(f("exp(-(x-1)^2)"), "identity", preset_weight("gaussian"), sp, [5, 9, 17, 33])
    assert cmp.consistent and cmp.mode == "both-decay"
    assert max(cmp.errors_monomial[-1], cmp.errors_exponential[-1]) < 1e-2


def test_closures_agree_for_vanishing_weight():
    sp = make_space("Lp", {"p": 2})
    cmp = compare_closures(f("exp(-(x-1)^2)"), "identity", preset_weight("interval_zero"), sp, [5, 9, 17, 33],
                           include_pullback=False)
    assert cmp.mode == "both-plateau" and cmp.consistent and cmp.ratio <= 2


def test_closure_grid_mismatch_rejected():
    sp = make_space("Lp", {"p": 2})
    with pytest.raises(ValueError):
        compare_closures(f("exp(-x^2)"), "identity", preset_weight("gaussian"), sp, [5], [[0.0, 1.0]])
