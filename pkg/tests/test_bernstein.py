"""Bernstein descriptors: closed forms, Levy-tail consistency, classification."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import exp1

from nlpearson import bernstein
from nlpearson.bernstein import (
    CustomBernstein,
    GammaBernstein,
    GeometricStableBernstein,
    StableBernstein,
    TemperedStableBernstein,
)
from nlpearson.errors import ParameterError

ALL_KINDS = [
    StableBernstein(0.5),
    TemperedStableBernstein(0.5, 1.0),
    GeometricStableBernstein(0.5),
    GammaBernstein(),
]


def test_catalogue_phi_values():
    assert StableBernstein(0.5).phi(4.0) == pytest.approx(2.0, abs=1e-14)
    assert TemperedStableBernstein(0.5, 1.0).phi(0.0) == pytest.approx(0.0, abs=1e-14)
    assert GammaBernstein().phi(np.e - 1.0) == pytest.approx(1.0, abs=1e-14)
    assert GeometricStableBernstein(0.5).phi(4.0) == pytest.approx(np.log(3.0), abs=1e-14)


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.3, 1.7])
def test_alpha_domain_rejected(bad):
    with pytest.raises(ParameterError):
        StableBernstein(bad)
    with pytest.raises(ParameterError):
        GeometricStableBernstein(bad)


def test_tempered_theta_rejected():
    with pytest.raises(ParameterError):
        TemperedStableBernstein(0.5, 0.0)
    with pytest.raises(ParameterError):
        TemperedStableBernstein(0.5, -2.0)


@pytest.mark.parametrize("desc", ALL_KINDS, ids=lambda d: d.kind)
def test_levy_khintchine_consistency(desc):
    """Numeric LK integral of the kind's density reproduces phi to 1e-6 relative."""
    for lam in np.geomspace(1e-3, 1e3, 13):
        val, _ = quad(
            lambda t: -np.expm1(-lam * t) * desc.levy_density(t),
            0.0,
            np.inf,
            epsrel=1e-10,
            epsabs=0.0,
            limit=500,
        )
        assert val == pytest.approx(float(desc.phi(lam)), rel=1e-6)


def test_levy_tail_values():
    # stable: t^-a / Gamma(1-a); oracle fixed by the LK check above
    assert StableBernstein(0.5).levy_tail(1.0) == pytest.approx(1.0 / np.sqrt(np.pi), rel=1e-12)
    # gamma: exponential integral; quadrature oracle of t^-1 e^-t
    oracle, _ = quad(lambda s: np.exp(-s) / s, 1.0, np.inf, epsrel=1e-12)
    assert GammaBernstein().levy_tail(1.0) == pytest.approx(oracle, rel=1e-10)
    assert oracle == pytest.approx(0.21938393439552026, rel=1e-12)


@pytest.mark.parametrize("desc", ALL_KINDS, ids=lambda d: d.kind)
def test_levy_tail_matches_density_quadrature(desc):
    for t in (0.3, 1.0, 2.5):
        oracle, _ = quad(desc.levy_density, t, np.inf, epsrel=1e-10, limit=400)
        assert float(desc.levy_tail(t)) == pytest.approx(oracle, rel=1e-6)


@pytest.mark.parametrize("desc", ALL_KINDS, ids=lambda d: d.kind)
def test_tail_monotone_and_divergent_at_zero(desc):
    ts = np.geomspace(1e-6, 10.0, 40)
    tails = np.asarray(desc.levy_tail(ts))
    assert np.all(np.diff(tails) < 0)
    # nubar(0+) = inf (only logarithmically for the geometric kind)
    assert float(desc.levy_tail(1e-200)) > 100.0
    assert float(desc.levy_tail(0.5)) > float(desc.levy_tail(1.0))


def test_integrated_tail_stable_closed_form():
    desc = StableBernstein(0.5)
    assert float(desc.integrated_tail(1.0)) == pytest.approx(2.0 / np.sqrt(np.pi), rel=1e-12)
    oracle, _ = quad(lambda s: float(desc.levy_tail(s)), 0.0, 1.0, epsrel=1e-11)
    assert float(desc.integrated_tail(1.0)) == pytest.approx(oracle, rel=1e-9)


@pytest.mark.parametrize("desc", ALL_KINDS, ids=lambda d: d.kind)
def test_integrated_tail_from_quadrature(desc):
    assert float(desc.integrated_tail(0.0)) == 0.0
    for t in (0.2, 1.0, 3.0):
        oracle, _ = quad(lambda s: float(desc.levy_tail(np.array(s))), 0.0, t, epsrel=1e-9, limit=400)
        assert float(desc.integrated_tail(t)) == pytest.approx(oracle, rel=2e-6)


@pytest.mark.parametrize("desc", ALL_KINDS, ids=lambda d: d.kind)
def test_integrated_tail_nondecreasing_concave(desc):
    ts = np.linspace(0.01, 5.0, 60)
    vals = np.asarray(desc.integrated_tail(ts))
    assert np.all(np.diff(vals) > 0)
    assert np.all(np.diff(vals, 2) < 1e-10)


def test_phi_nondecreasing_concave_sampled():
    lams = np.geomspace(1e-3, 1e3, 200)
    for desc in ALL_KINDS:
        vals = np.asarray(desc.phi(lams), dtype=float)
        assert np.all(vals >= 0)
        assert np.all(np.diff(vals) > 0)
        # concavity on the sampled grid (uneven spacing: compare secant slopes)
        slopes = np.diff(vals) / np.diff(lams)
        assert np.all(np.diff(slopes) < 1e-12)


def test_regular_variation_catalogue():
    rv = StableBernstein(0.3).regular_variation()
    assert (rv.kind, rv.value) == ("index", pytest.approx(0.3))
    rv = GammaBernstein().regular_variation()
    assert (rv.kind, rv.value) == ("linear", pytest.approx(1.0))
    rv = TemperedStableBernstein(0.5, 1.0).regular_variation()
    assert (rv.kind, rv.value) == ("linear", pytest.approx(0.5))
    rv = TemperedStableBernstein(0.5, 2.0).regular_variation()
    assert rv.value == pytest.approx(0.5 * 2.0 ** -0.5)
    assert GeometricStableBernstein(0.25).regular_variation().kind == "index"


def test_tempered_linear_limit_matches_numeric_slope():
    desc = TemperedStableBernstein(0.5, 2.0)
    lam = 1e-9
    assert float(desc.phi(lam)) / lam == pytest.approx(desc.regular_variation().value, rel=1e-4)


def test_classification_labels():
    assert StableBernstein(0.7).classify_dependence() == "long-range"
    assert GeometricStableBernstein(0.5).classify_dependence() == "long-range"
    assert TemperedStableBernstein(0.5, 1.0).classify_dependence() == "short-range"
    assert GammaBernstein().classify_dependence() == "short-range"
    assert CustomBernstein(lambda t: np.exp(-t) / t).classify_dependence() == "unknown"


@given(
    alpha=st.floats(0.05, 0.95),
    theta=st.floats(0.01, 100.0),
)
@settings(max_examples=60, deadline=None)
def test_classification_invariant_under_time_scaling(alpha, theta):
    # rescaling time units moves theta but never the lambda -> 0+ regime
    assert TemperedStableBernstein(alpha, theta).classify_dependence() == "short-range"
    assert StableBernstein(alpha).classify_dependence() == "long-range"
    assert GeometricStableBernstein(alpha).classify_dependence() == "long-range"


def test_custom_kind_phi_and_tails():
    # custom copy of the Gamma subordinator
    desc = CustomBernstein(lambda t: np.exp(-t) / t)
    assert desc.phi(1.0) == pytest.approx(np.log(2.0), rel=1e-8)
    assert float(desc.levy_tail(1.0)) == pytest.approx(exp1(1.0), rel=1e-8)
    assert float(desc.integrated_tail(1.0)) == pytest.approx(
        float(GammaBernstein().integrated_tail(1.0)), rel=1e-6
    )


def test_json_round_trip():
    for desc in ALL_KINDS:
        clone = bernstein.from_json(desc.to_json())
        assert type(clone) is type(desc)
        assert float(clone.phi(1.7)) == pytest.approx(float(desc.phi(1.7)), rel=1e-14)
    with pytest.raises(ParameterError):
        bernstein.from_descriptor({"kind": "stable", "alpha": 0.5, "junk": 1})
    with pytest.raises(ParameterError):
        bernstein.from_descriptor({"kind": "nope"})
    with pytest.raises(ParameterError):
        bernstein.from_descriptor({"kind": "tempered_stable", "alpha": 0.5})
