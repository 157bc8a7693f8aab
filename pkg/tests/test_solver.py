"""Backward/forward non-local Cauchy solvers."""

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import erfcx

from nlpearson.bernstein import StableBernstein
from nlpearson.errors import DatumError, SpectrumBoundError
from nlpearson.pearson import PolynomialSystem, make_family
from nlpearson.solver import SolutionField, expand
from nlpearson.spectral import SpectralExpansion

OU = make_family("ou", theta=1.0, mu=0.0, sigma=1.0)
PHI = StableBernstein(0.5)


def test_expand_basis_datum_is_unit_vector():
    ps = PolynomialSystem(OU, max_n=6)
    exp = expand(OU, ps.polynomial(2), 6)
    want = np.zeros(6)
    want[2] = 1.0
    assert np.allclose(exp.coefficients, want, atol=1e-12)
    assert exp.l2_tail <= 1e-7


def test_expand_identity_datum():
    exp = expand(OU, np.array([0.0, 1.0]), 5)
    assert np.allclose(exp.coefficients, [0.0, 1.0, 0.0, 0.0, 0.0], atol=1e-12)


def test_expand_forward_stationary_density():
    exp = expand(OU, OU.stationary_density, 5, mode="forward")
    assert np.allclose(exp.coefficients, [1.0, 0.0, 0.0, 0.0, 0.0], atol=1e-10)


def test_expand_rejects_dirac_and_bad_data():
    with pytest.raises(DatumError):
        expand(OU, "dirac", 5)
    with pytest.raises(SpectrumBoundError):
        expand(make_family("rg", theta=1.0, alpha=1.0, beta=5.0), np.array([0.0, 1.0]), 6)
    with pytest.raises(DatumError):
        # datum outside the discrete span of a category-II family
        expand(make_family("fs", theta=1.0, alpha=4.0, beta=17.0), lambda x: np.sin(3.0 * x), 5)


def test_backward_constant_datum_is_constant():
    exp = expand(OU, np.array([1.0]), 3)
    field = SolutionField(exp, PHI)
    for t in (0.0, 0.5, 2.0):
        assert field.backward(t, 0.7) == pytest.approx(1.0, abs=1e-12)


def test_backward_basis_datum_factorizes():
    ps = PolynomialSystem(OU, max_n=4)
    exp = expand(OU, ps.polynomial(3), 5)
    field = SolutionField(exp, PHI)
    lam3 = OU.eigenvalue(3)
    for t, y in ((0.5, 0.3), (1.5, -1.1)):
        want = field.relax.eigenfunction(t, lam3) * ps.evaluate(3, y)
        assert field.backward(t, y) == pytest.approx(want, rel=1e-10)


def test_backward_example_value():
    # OU, Phi = stable(1/2), g(y) = y: u(1, 0.5) = E_{1/2}(-1) * 0.5
    exp = expand(OU, np.array([0.0, 1.0]), 4)
    field = SolutionField(exp, PHI)
    assert field.backward(1.0, 0.5) == pytest.approx(0.5 * erfcx(1.0), rel=1e-9)
    assert 0.5 * erfcx(1.0) == pytest.approx(0.213792, abs=5e-7)


def test_forward_stationary_datum_is_invariant():
    exp = expand(OU, OU.stationary_density, 5, mode="forward")
    field = SolutionField(exp, PHI)
    for t in (0.0, 1.0, 3.0):
        for x in (-0.8, 0.0, 1.2):
            assert field.forward(t, x) == pytest.approx(OU.stationary_density(x), rel=1e-9)


def test_forward_basis_action():
    ps = PolynomialSystem(OU, max_n=3)
    exp = expand(OU, lambda x: OU.stationary_density(x) * ps.evaluate(1, x), 4, mode="forward")
    field = SolutionField(exp, PHI)
    t, x = 0.7, 0.4
    want = field.relax.eigenfunction(t, OU.eigenvalue(1)) * OU.stationary_density(x) * ps.evaluate(1, x)
    assert field.forward(t, x) == pytest.approx(want, rel=1e-9)


def test_forward_mass_conservation():
    dens = lambda x: np.exp(-((x - 0.4) ** 2)) / np.sqrt(np.pi)
    exp = expand(OU, dens, 14, mode="forward")
    field = SolutionField(exp, PHI)
    val, _ = quad(lambda x: field.forward(1.0, x), -np.inf, np.inf, limit=200)
    assert val == pytest.approx(1.0, abs=1e-4)


def test_residual_of_exact_solution_small():
    exp = expand(OU, lambda y: np.exp(-0.5 * y) - 0.2 * y, 12)
    field = SolutionField(exp, PHI)
    res = field.residual(np.geomspace(0.1, 2.0, 4), np.linspace(-2.0, 2.0, 5))
    assert res <= 1e-3


def test_residual_constant_is_zero():
    exp = expand(OU, np.array([1.0]), 2)
    field = SolutionField(exp, PHI)
    assert field.residual([0.5, 1.0], [-0.5, 0.5]) <= 1e-12


def test_residual_detects_corruption():
    # scaling every coefficient of a linear-PDE solution yields another exact
    # solution, so a uniform x1.1 is invisible to the PDE residual; corrupt
    # the time decay instead (classical e^{-lam t} under the non-local clock)
    from nlpearson.relaxation import nonlocal_derivative

    exp = expand(OU, lambda y: np.exp(-0.5 * y), 12)
    ps = exp.system
    lams = np.array([ps.eigenvalue(n) for n in range(exp.n_terms)])
    y, t = 0.5, 1.0
    qs = np.array([ps.evaluate(n, y) for n in range(exp.n_terms)])

    def u_star(tau):
        tau = np.atleast_1d(np.asarray(tau, dtype=float))
        return (np.exp(-np.outer(tau, lams)) * exp.coefficients) @ qs

    tder = nonlocal_derivative(PHI, u_star, t)
    comb = np.zeros(ps.size + 1)
    for n in range(exp.n_terms):
        c = ps.polynomial(n)
        comb[: len(c)] += np.exp(-lams[n] * t) * exp.coefficients[n] * c
    space = OU.generator_apply(comb, y)
    assert abs(tder - space) > 1e-2


def test_forward_residual_small():
    exp = expand(OU, lambda x: np.exp(-((x - 0.4) ** 2)) / np.sqrt(np.pi), 12, mode="forward")
    field = SolutionField(exp, PHI)
    res = field.residual([0.5, 1.5], [-0.6, 0.9])
    assert res <= 1e-3


def test_fundamental_solution_identity():
    # backward solution equals int p_Phi(t, x; y) g(x) dx
    from scipy.integrate import simpson

    exp = expand(OU, lambda y: np.exp(-0.5 * y), 14)
    field = SolutionField(exp, PHI)
    se = SpectralExpansion(OU, PHI, tail_tol=1e-3)
    xs = np.linspace(-9.0, 9.0, 601)
    for y in (-0.4, 0.8):
        dens = se.nonlocal_transition_density(1.0, xs, y)
        val = simpson(dens * np.exp(-0.5 * xs), x=xs)
        assert field.backward(1.0, y) == pytest.approx(val, abs=1e-4)


def test_l2_continuity_at_zero():
    exp = expand(OU, lambda y: np.exp(-0.5 * y), 16)
    field = SolutionField(exp, PHI)
    x, w = OU.quadrature_rule(200)
    datum = np.exp(-0.5 * x)
    norms = []
    for t in (0.2, 0.05, 0.01, 0.002):
        diff = field.backward(t, x) - datum
        norms.append(np.sqrt(np.sum(w * diff * diff)))
    assert all(a > b for a, b in zip(norms, norms[1:]))
    assert norms[-1] < 0.05


def test_category_two_discrete_span_solver():
    fs = make_family("fs", theta=1.0, alpha=4.0, beta=17.0)
    ps = PolynomialSystem(fs)
    exp = expand(fs, ps.polynomial(2), 4)
    field = SolutionField(exp, PHI)
    val = field.backward(0.7, 1.3)
    want = field.relax.eigenfunction(0.7, fs.eigenvalue(2)) * ps.evaluate(2, 1.3)
    assert val == pytest.approx(want, rel=1e-9)


def test_stochastic_representation_mc():
    from nlpearson.solver import mc_backward_solution

    exp = expand(OU, np.array([0.0, 1.0]), 4)
    field = SolutionField(exp, PHI)
    got, se = mc_backward_solution(OU, PHI, np.array([0.0, 1.0]), 1.0, 0.5, n_paths=20000, seed=21)
    assert abs(got - field.backward(1.0, 0.5)) <= 3.0 * se + 1e-3
