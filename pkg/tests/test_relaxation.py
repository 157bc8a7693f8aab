"""Relaxation eigenfunction and non-local derivative."""

import numpy as np
import pytest
from scipy.special import erfcx

from nlpearson.bernstein import (
    GammaBernstein,
    GeometricStableBernstein,
    StableBernstein,
    TemperedStableBernstein,
)
from nlpearson.errors import ParameterError, ResolutionError
from nlpearson.relaxation import (
    RelaxationEvaluator,
    nonlocal_derivative,
    relaxation_residual,
)
from nlpearson.subordination import InverseSubordinatorDensity
from _oracles import ml_series_oracle

KINDS = [
    StableBernstein(0.5),
    TemperedStableBernstein(0.5, 1.0),
    GeometricStableBernstein(0.5),
    GammaBernstein(),
]


def test_initial_condition_all_kinds():
    for desc in KINDS:
        ev = RelaxationEvaluator(desc)
        assert ev.eigenfunction(0.0, 7.0) == 1.0
        assert ev.eigenfunction(2.0, 0.0) == 1.0


def test_stable_half_erfcx_identity():
    ev = RelaxationEvaluator(StableBernstein(0.5))
    assert ev.eigenfunction(1.0, 1.0) == pytest.approx(erfcx(1.0), abs=1e-10)
    assert ev.eigenfunction(1.0, 4.0) == pytest.approx(erfcx(4.0), abs=1e-10)
    for t in (0.25, 1.0, 2.5):
        for lam in (0.3, 1.7, 4.9):
            assert ev.eigenfunction(t, lam) == pytest.approx(erfcx(lam * np.sqrt(t)), abs=1e-10)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7])
def test_mittag_leffler_against_series_oracle(alpha):
    ev = RelaxationEvaluator(StableBernstein(alpha))
    for t in (0.2, 1.0, 3.0):
        for lam in (0.5, 2.0, 5.0):
            want = ml_series_oracle(-lam * t ** alpha, alpha)
            assert ev.eigenfunction(t, lam) == pytest.approx(want, abs=1e-10)


@pytest.mark.parametrize("desc", KINDS, ids=lambda d: d.kind)
def test_monotone_in_t_and_lambda(desc):
    ev = RelaxationEvaluator(desc)
    ts = np.linspace(0.0, 4.0, 25)
    vals = ev.eigenfunction(ts, 1.3)
    assert np.all(np.diff(vals) <= 1e-10)
    lams = np.linspace(0.0, 8.0, 25)
    vals = ev.eigenfunction(1.2, lams)
    assert np.all(np.diff(vals) <= 1e-10)
    assert np.all((vals >= 0.0) & (vals <= 1.0))


@pytest.mark.parametrize("desc", KINDS, ids=lambda d: d.kind)
def test_uniform_bound_lambda_times_e(desc):
    # Prop. after the relaxation Cauchy problem: lam * E(t;-lam) bounded in lam
    ev = RelaxationEvaluator(desc)
    lams = np.geomspace(1e-2, 1e4, 40)
    for t in (0.5, 1.0, 2.0):
        prod = lams * ev.eigenfunction(t, lams)
        assert np.all(prod <= prod.max())
        assert prod.max() < 20.0 / min(1.0, t)
        # the bound is attained in the tail: growth has saturated by lam = 1e4
        assert prod[-1] == pytest.approx(prod[-5], rel=0.2)


def test_stable_scaling_only_through_lambda_t_alpha():
    ev = RelaxationEvaluator(StableBernstein(0.7))
    for lam, t in ((2.0, 1.0), (0.5, 3.0)):
        z = lam * t ** 0.7
        t2 = (z / 1.3) ** (1 / 0.7)
        assert ev.eigenfunction(t, lam) == pytest.approx(ev.eigenfunction(t2, 1.3), abs=1e-9)


@pytest.mark.parametrize("desc", KINDS, ids=lambda d: d.kind)
def test_subordination_consistency(desc):
    ev = RelaxationEvaluator(desc)
    d = InverseSubordinatorDensity(desc)
    for lam in (0.5, 1.0, 2.0):
        sub = d.subordinate(lambda s: np.exp(-lam * s), 1.0)
        assert ev.eigenfunction(1.0, lam) == pytest.approx(sub, abs=1e-5)


def test_checked_eigenfunction_gaver_stehfest_gate():
    ev = RelaxationEvaluator(GammaBernstein())
    assert ev.eigenfunction_checked(1.0, 1.0) == pytest.approx(ev.eigenfunction(1.0, 1.0), abs=1e-6)


def test_nonlocal_derivative_of_constant_is_zero():
    for desc in KINDS:
        assert nonlocal_derivative(desc, lambda t: np.ones_like(t), 1.0) == pytest.approx(0.0, abs=1e-14)


def test_nonlocal_derivative_of_identity_is_integrated_tail():
    desc = StableBernstein(0.5)
    got = nonlocal_derivative(desc, lambda t: t, 1.0)
    assert got == pytest.approx(2.0 / np.sqrt(np.pi), rel=1e-7)
    for d2 in KINDS:
        got = nonlocal_derivative(d2, lambda t: t, 0.7)
        assert got == pytest.approx(float(d2.integrated_tail(0.7)), rel=1e-7)


def test_nonlocal_derivative_analytic_du_path():
    desc = StableBernstein(0.5)
    got = nonlocal_derivative(desc, None, 1.0, du=lambda t: np.ones(np.shape(t)) if np.ndim(t) else 1.0)
    assert got == pytest.approx(2.0 / np.sqrt(np.pi), rel=1e-8)


def test_relaxation_ode_residual_stable():
    desc = StableBernstein(0.5)
    ev = RelaxationEvaluator(desc)
    res = relaxation_residual(desc, 1.0, 1.0, evaluator=ev)
    assert res <= 1e-3
    # spec example: d_t^Phi E(.;-1)(1) ~ -lam E(1;-1) ~ -0.427584
    deriv = nonlocal_derivative(desc, lambda tau: ev.eigenfunction(tau, 1.0), 1.0)
    assert deriv == pytest.approx(-erfcx(1.0), abs=1e-3)


@pytest.mark.parametrize("desc", KINDS, ids=lambda d: d.kind)
def test_relaxation_ode_residual_sampled_kinds(desc):
    for lam in (0.5, 2.0):
        for t in (0.1, 1.0, 3.0):
            assert relaxation_residual(desc, lam, t) <= 1e-3


def test_corrupted_solution_has_visible_residual():
    desc = StableBernstein(0.5)
    ev = RelaxationEvaluator(desc)

    def bad(tau):
        return 1.1 * ev.eigenfunction(tau, 1.0) - 0.1

    deriv = nonlocal_derivative(desc, bad, 1.0)
    assert abs(deriv + 1.0 * bad(np.array([1.0]))[0]) > 1e-2


def test_sampled_input_validation():
    desc = StableBernstein(0.5)
    grid = np.linspace(0.0, 1.0, 2000)
    vals = grid.copy()
    got = nonlocal_derivative(desc, (grid, vals), 0.9)
    assert got == pytest.approx(float(desc.integrated_tail(0.9)), rel=1e-7)
    with pytest.raises(ResolutionError):
        nonlocal_derivative(desc, (grid, vals), 1.5)
    with pytest.raises(ResolutionError):
        nonlocal_derivative(desc, (grid[:20], vals[:20]), 0.005)
    with pytest.raises(ParameterError):
        nonlocal_derivative(desc, (grid, vals), 0.0)
