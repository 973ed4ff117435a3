import math
from math import comb

import numpy as np
import pytest
from scipy.special import eval_genlaguerre, eval_hermite, gammaln

from density_lab.families import (
    AlgebraGenerators,
    FamilyError,
    check_assumption26,
    check_thm31,
    exponential_family,
    gap_family,
    monomial_family,
    pullback_family,
    strip_frequencies,
    translate_family,
)
from density_lab.funcmodel import ScalarField, make_phi, preset_weight
from density_lab.numerics import Domain, build_quadrature, integrate
from density_lab.recurrence import hermite_recurrence, laguerre_recurrence, stieltjes
from density_lab.spaces import make_space

X = np.linspace(-3, 3, 13)


def f(text, n=None):
    return ScalarField.parse(text, n=n)


# monomial ----------------------------------------------------------------------

def test_degree_zero_is_weight(gaussian, identity):
    fam = monomial_family(identity, gaussian, 0)
    assert fam.size == 1 and np.array_equal(fam.values(X)[:, 0], gaussian(X))


def test_degree_two_hermite_type(gaussian, identity):
    fam = monomial_family(identity, gaussian, 2)
    want = np.stack([X**k * np.exp(-X**2 / 2) for k in range(3)], axis=-1)
    assert np.allclose(fam.values(X), want, rtol=1e-15, atol=0)
    assert fam.index == [(0,), (1,), (2,)]


@pytest.mark.parametrize("n,D", [(1, 0), (1, 7), (2, 0), (2, 3), (2, 6)])
def test_stars_and_bars_count(n, D):
    phi = make_phi("identity") if n == 1 else make_phi("identity2")
    fam = monomial_family(phi, preset_weight("gaussian_nd", {"n": n}), D)
    assert fam.size == comb(D + n, n)
    degrees = [sum(b) for b in fam.index]
    assert degrees == sorted(degrees)


def test_exotic_family_with_custom_map():
    phi = make_phi("x*sqrt(1+x^2)")
    fam = monomial_family(phi, preset_weight("exotic"), 3)
    y = X * np.sqrt(1 + X**2)
    assert np.allclose(fam.values(X)[:, 3], y**3 * preset_weight("exotic")(X), rtol=1e-14)


def test_negative_degree_rejected(gaussian, identity):
    with pytest.raises(FamilyError):
        monomial_family(identity, gaussian, -1)


def test_prefix_is_nested(gaussian, identity):
    fam = monomial_family(identity, gaussian, 5)
    sub = fam.prefix(3)
    assert sub.size == 3 and np.array_equal(sub.values(X), fam.values(X)[:, :3])


# exponential -------------------------------------------------------------------

def test_zero_frequency_member_is_weight(gaussian, identity):
    fam = exponential_family(identity, gaussian, [0.0])
    assert np.allclose(fam.values(X)[:, 0], gaussian(X))


def test_real_grid_matches_direct_evaluation(gaussian, identity):
    lams = [-2, -1, 0, 1, 2]
    fam = exponential_family(identity, gaussian, lams)
    want = np.stack([np.exp(1j * l * X) * np.exp(-X**2 / 2) for l in lams], axis=-1)
    assert fam.size == 5 and np.allclose(fam.values(X), want, rtol=1e-14, atol=1e-16)


def test_complex_frequency_gives_real_tilt(gaussian, identity):
    eps = 0.6
    fam = exponential_family(identity, gaussian, [0.5j * eps], eps=eps)
    # exp(i * (i eps/2) * x) = exp(-eps x / 2)
    assert np.allclose(fam.values(X)[:, 0], np.exp(-eps / 2 * X) * gaussian(X), rtol=1e-14)


def test_strip_violation_rejected(gaussian, identity):
    with pytest.raises(FamilyError):
        exponential_family(identity, gaussian, [1j], eps=0.5)


def test_conjugate_pairs(gaussian):
    phi = make_phi("x+x^3")
    fam = exponential_family(phi, gaussian, [1.3, -1.3])
    v = fam.values(X)
    assert np.max(np.abs(v[:, 0] - np.conj(v[:, 1]))) < 1e-14


# gap -----------------------------------------------------------------------------

@pytest.mark.parametrize("N,l,cap,want", [(3, 2, 9, [3, 5, 7, 9]), (0, 2, 4, [1, 3]), (4, 3, 10, [4, 5, 7, 8, 10])])
def test_gap_exponents(N, l, cap, want):
    assert gap_family(N, l, cap).index == want


def test_gap_invalid():
    with pytest.raises(FamilyError):
        gap_family(0, 1, 5)
    with pytest.raises(FamilyError):
        gap_family(5, 2, 3)


def test_gap_with_large_l_is_full_family():
    x = np.linspace(0.1, 20, 50)
    fam = gap_family(0, 100, 12)
    # 0 is divisible by every l, so only exponent 0 is excluded
    want = np.stack([x**k * np.exp(-x) for k in range(1, 13)], axis=-1)
    assert fam.index == list(range(1, 13))
    assert np.allclose(fam.values(x), want, rtol=1e-12, atol=0)


def test_gap_values_stable_far_out():
    v = gap_family(3, 2, 41).values(np.array([500.0]))
    assert np.all(np.isfinite(v))


# translate / pullback -----------------------------------------------------------

def test_translate_zero_shift_is_seed():
    seed = preset_weight("gaussian_nd")
    assert np.allclose(translate_family(seed, [0.0]).values(X)[:, 0], seed(X))


def test_translate_count_and_peak():
    seed = preset_weight("gaussian_nd")
    shifts = np.arange(-3, 3 + 1e-9, 0.5)
    fam = translate_family(seed, shifts)
    assert fam.size == 13
    for j, s in enumerate(shifts):
        assert fam.values(np.array([s]))[0, j] == 1.0


def test_translate_derivative_values():
    seed = preset_weight("gaussian_nd")
    fam = translate_family(seed, [-1.0, 2.0])
    d = fam.derivative_values(X, (1,))
    assert np.allclose(d[:, 1], -2 * (X - 2) * np.exp(-(X - 2) ** 2), rtol=1e-14, atol=1e-300)


def test_pullback_identity_and_constant(gaussian, identity):
    fam = pullback_family([f("1"), f("sin(x)")], identity, gaussian)
    v = fam.values(X)
    assert np.allclose(v[:, 0], gaussian(X)) and np.allclose(v[:, 1], np.sin(X) * gaussian(X))


def test_pullback_bump_support_inside():
    # (1-y^2)_+^4 has compact support [-1, 1] in y = sinh(x)
    bump = f("((1-x^2+abs(1-x^2))/2)^4")
    fam = pullback_family([bump], make_phi("sinh"), preset_weight("gaussian"))
    x = np.linspace(-3, 3, 601)
    v = fam.values(x)[:, 0]
    inside = np.abs(np.sinh(x)) < 1
    assert np.all(v[~inside] == 0) and np.all(v[inside] > 0)


# algebra generators ------------------------------------------------------------

def test_generators_m0_are_components():
    gens = AlgebraGenerators(make_phi("x+x^3"), 0)
    assert len(gens.generators) == 1 and gens.labels == [(0, (0,))]


def test_generators_m2_derivatives():
    gens = AlgebraGenerators(make_phi("x+x^3"), 2)
    x = np.array([0.5])
    vals = [g(x)[0] for g in gens.generators]
    assert np.allclose(vals, [0.5 + 0.125, 1 + 3 * 0.25, 6 * 0.5])
    assert len(list(gens.products(2))) == 1 + 3 + 6
    assert np.all(gens.dominant(X, 3) >= 1)


# recurrences -------------------------------------------------------------------

def test_hermite_recurrence_matches_scipy():
    rec = hermite_recurrence(12)
    basis = monomial_family(make_phi("identity"), preset_weight("gaussian"), 11).recurrence_basis()
    v = basis.evaluate(X)
    for k in range(12):
        norm = math.exp(-0.5 * (k * math.log(2) + gammaln(k + 1) + 0.5 * math.log(math.pi)))
        want = norm * eval_hermite(k, X) * np.exp(-X**2 / 2)
        assert np.allclose(v[:, k], want, rtol=1e-12, atol=1e-14)
    assert rec.label == "hermite"


def test_laguerre_recurrence_matches_scipy():
    alpha = -0.5
    f0 = preset_weight("laguerre", {"alpha": alpha})
    basis = monomial_family(make_phi("identity"), f0, 9).recurrence_basis()
    x = np.linspace(0.05, 30, 40)
    v = basis.evaluate(x)
    for k in range(10):
        norm = math.exp(0.5 * (gammaln(k + 1) - gammaln(k + alpha + 1)))
        # orthonormal basis with positive leading coefficient; scipy's L_k leads with (-1)^k
        want = (-1) ** k * norm * eval_genlaguerre(k, alpha, x) * np.exp(-x / 2) * x ** (alpha / 2)
        assert np.allclose(v[:, k], want, rtol=1e-10, atol=1e-13)
    assert laguerre_recurrence(3, alpha).size == 3


def test_stieltjes_reproduces_legendre_orthonormality():
    rule = build_quadrature(Domain.interval(-1, 1), "gauss-legendre-composite", 40)
    rec = stieltjes(rule.nodes, rule.weights, 10)
    fam = monomial_family(make_phi("identity"), f("1"), 9)
    basis = fam.recurrence_basis(rule.nodes, rule.weights)
    V = basis.evaluate(rule.nodes)
    G = V.T @ (rule.weights[:, None] * V)
    assert np.allclose(G, np.eye(10), atol=1e-13)
    assert rec.size == 10


def test_stieltjes_stops_when_support_runs_out():
    rec = stieltjes(np.array([0.0, 1.0, 2.0]), np.ones(3), 6)
    assert rec.size == 3


def test_recurrence_derivatives(gaussian, identity):
    basis = monomial_family(identity, gaussian, 6).recurrence_basis()
    d = basis.evaluate(X, (1,))
    h = 1e-6
    fd = (basis.evaluate(X + h) - basis.evaluate(X - h)) / (2 * h)
    assert np.allclose(d, fd, atol=1e-8)


# admissibility -----------------------------------------------------------------

def test_thm31_gaussian_passes_at_eps_one(gaussian, identity):
    v = check_thm31(gaussian, identity, 2.0)
    assert v.passed and v.epsilon == 1.0 and not v.failures


def test_thm31_laguerre_p2():
    f0 = preset_weight("laguerre", {"alpha": -0.5})
    half = Domain.interval(0, math.inf)
    v = check_thm31(f0, make_phi("identity"), 2.0, domain=half)
    assert v.passed and 0.25 <= v.epsilon < 0.5
    assert check_thm31(f0, make_phi("identity"), 2.0, eps_grid=(0.25,), domain=half).passed
    assert not check_thm31(f0, make_phi("identity"), 2.0, eps_grid=(0.5,), domain=half).passed


def test_thm31_laguerre_p4_origin_divergence():
    f0 = preset_weight("laguerre", {"alpha": -0.5})
    v = check_thm31(f0, make_phi("identity"), 4.0, domain=Domain.interval(0, math.inf))
    assert not v.passed
    assert "origin divergence" in {x["condition"] for x in v.failures}


@pytest.mark.parametrize("weight,p", [("gaussian", 2.0), ("laguerre", 2.0), ("sech", 2.0), ("sech", 1.0)])
def test_thm31_monotone_in_eps(weight, p):
    grid = (1.5, 1.0, 0.75, 0.5, 0.45, 0.3, 0.1)
    if weight == "laguerre":
        f0, dom = preset_weight("laguerre", {"alpha": -0.5}), Domain.interval(0, math.inf)
    elif weight == "sech":
        f0, dom = f("1/cosh(x)"), Domain.interval()
    else:
        f0, dom = preset_weight("gaussian"), Domain.interval()
    passes = [check_thm31(f0, make_phi("identity"), p, eps_grid=(e,), domain=dom).passed for e in grid]
    for i, ok in enumerate(passes):
        if ok:
            assert all(passes[i:]), (grid, passes)


def test_thm31_verdict_json_fields(gaussian, identity):
    d = check_thm31(gaussian, identity, 2.0).to_dict()
    assert {"pass", "epsilon", "failures"} <= set(d)


def test_strip_frequencies_nine_points():
    lams = strip_frequencies(0.5)
    assert len(lams) == 9 and all(l.in_strip() for l in lams)
    assert max(l.imag_norm for l in lams) == pytest.approx(0.495)


def test_assumption26_schwartz_gaussian(gaussian, identity):
    sp = make_space("Schwartz", {"N_max": 2, "alpha_max": 2})
    v = check_assumption26(sp, gaussian, identity, 1.0)
    assert v.passed and v.epsilon == 1.0


def test_assumption26_schwartz_polynomial_decay_fails(identity):
    sp = make_space("Schwartz", {"N_max": 1, "alpha_max": 1})
    v = check_assumption26(sp, f("1/(1+x^2)"), identity, 0.5)
    assert not v.passed
    assert any(x.get("factor") == "exp(eps*|Phi|)" for x in v.failures)


def test_assumption26_c1_bounded_passes(identity):
    sp = make_space("Cm", {"domain": [-1, 1], "m": 1})
    assert check_assumption26(sp, f("cos(x)/(2+x)"), identity, 0.5).passed


def test_margin_integral_positive(gaussian, identity):
    rule = build_quadrature(Domain.interval(), "gauss-hermite", 60)
    assert integrate(lambda x: np.exp(2 * np.abs(x)) * gaussian(x) ** 2, rule).value > 0
