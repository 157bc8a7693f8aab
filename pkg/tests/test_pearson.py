"""Pearson families: densities, eigenpolynomials, operators, spectral metadata."""

import math

import numpy as np
import numpy.polynomial.polynomial as P
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.special import eval_genlaguerre, eval_jacobi

from nlpearson.errors import DomainError, ParameterError, SpectrumBoundError
from nlpearson.pearson import PolynomialSystem, from_json, make_family, raw_rodrigues

OU = make_family("ou", theta=1.0, mu=0.0, sigma=1.0)
CIR = make_family("cir", theta=1.0, a=1.0, b=1.0)
JAC = make_family("jacobi", theta=1.0, a=0.0, b=0.0)
FS = make_family("fs", theta=1.0, alpha=4.0, beta=17.0)
RG = make_family("rg", theta=1.0, alpha=1.0, beta=9.0)
STUDENT = make_family("student", theta=1.0, delta=1.0, nu=6.0)

ACCEPTANCE_SET = [
    OU,
    make_family("cir", theta=1.0, a=1.0, b=0.5),
    make_family("cir", theta=1.0, a=1.0, b=2.0),
    make_family("jacobi", theta=1.0, a=0.0, b=0.0),
    make_family("jacobi", theta=1.0, a=0.0, b=1.5),
    make_family("jacobi", theta=1.0, a=1.5, b=0.0),
    make_family("jacobi", theta=1.0, a=1.5, b=1.5),
    FS,
    RG,
    STUDENT,
]


def test_make_family_validation():
    assert OU.category == "I" and OU.interval == (None, None)
    with pytest.raises(ParameterError):
        make_family("fs", theta=1.0, alpha=2.0, beta=6.0)  # alpha <= 2
    with pytest.raises(ParameterError):
        make_family("student", theta=1.0, delta=1.0, nu=3.0)  # nu = 2k - 1
    with pytest.raises(ParameterError):
        make_family("student", theta=1.0, delta=1.0, nu=5.0)
    with pytest.raises(ParameterError):
        make_family("cir", theta=0.0, a=1.0, b=1.0)
    with pytest.raises(ParameterError):
        make_family("jacobi", theta=1.0, a=-1.0, b=0.0)
    with pytest.raises(ParameterError):
        make_family("rg", theta=1.0, alpha=1.0, beta=1.0)
    with pytest.raises(ParameterError):
        make_family("nope")
    with pytest.raises(ParameterError):
        make_family("ou", theta=1.0, junk=2.0)


def test_stationary_density_examples():
    assert OU.stationary_density(0.0) == pytest.approx(1.0 / np.sqrt(2.0 * np.pi), rel=1e-14)
    assert CIR.stationary_density(1.0) == pytest.approx(np.exp(-1.0), rel=1e-14)
    assert JAC.stationary_density(0.3) == pytest.approx(0.5, rel=1e-14)
    with pytest.raises(DomainError):
        CIR.stationary_density(-0.5)
    with pytest.raises(DomainError):
        JAC.stationary_density(1.5)


@pytest.mark.parametrize("fam", ACCEPTANCE_SET, ids=lambda f: repr(f.descriptor()))
def test_stationary_density_normalizes(fam):
    lo, hi = fam.interval
    lo = -np.inf if lo is None else lo
    hi = np.inf if hi is None else hi
    val, _ = quad(fam.stationary_density, lo, hi, limit=400)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_skew_student_density_normalizes():
    skew = make_family("student", theta=1.0, delta=1.3, nu=6.5, mu=0.2, mu_prime=-0.4)
    val, _ = quad(skew.stationary_density, -np.inf, np.inf, limit=500)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_skew_student_constant_matches_truncated_product():
    # the implementation resums the infinite product with the |Gamma(x+iy)|^2
    # identity; cross-check against direct truncation with an integral tail
    skew = make_family("student", theta=1.0, delta=1.0, nu=6.0, mu=0.5, mu_prime=-0.5)
    gam = (skew.mu - skew.mu_prime) * (skew.nu - 1.0) / skew.delta
    terms = np.arange(200000)
    log_prod = -np.sum(np.log1p((gam / (skew.nu + 1.0 + 2.0 * terms)) ** 2))
    log_prod -= gam ** 2 / (2.0 * (skew.nu + 1.0 + 2.0 * 200000))  # integral tail
    from scipy.special import gammaln, loggamma

    ident = 2.0 * (np.real(loggamma(0.5 * (skew.nu + 1.0) + 0.5j * gam)) - gammaln(0.5 * (skew.nu + 1.0)))
    assert log_prod == pytest.approx(ident, abs=1e-9)


def test_pearson_equation_on_grids():
    # m'/m = ((a0-d1) + (a1-2 d2) x) / D on interior grids
    for fam in ACCEPTANCE_SET:
        lo, hi = fam.interval
        xs = np.linspace(lo if lo is not None else -2.0, hi if hi is not None else 2.5, 41)[1:-1]
        xs = xs[np.abs(xs) > 1e-3]
        h = 1e-6
        lhs = (np.log(fam.stationary_density(xs + h)) - np.log(fam.stationary_density(xs - h))) / (2 * h)
        a0, a1 = fam.drift_coeffs
        d0, d1, d2 = fam.diffusion_coeffs
        rhs = ((a0 - d1) + (a1 - 2.0 * d2) * xs) / fam.diffusion(xs)
        assert np.allclose(lhs, rhs, rtol=1e-6, atol=1e-6)


def test_polynomial_examples():
    ps = PolynomialSystem(OU, max_n=10)
    assert np.allclose(ps.polynomial(0), [1.0])
    assert np.allclose(ps.polynomial(1), [0.0, 1.0], atol=1e-15)
    psj = PolynomialSystem(JAC, max_n=5)
    assert np.allclose(psj.polynomial(1), [0.0, np.sqrt(3.0)], atol=1e-14)


def test_eigenvalue_formulas():
    assert make_family("ou", theta=2.0).eigenvalue(3) == pytest.approx(6.0)
    assert make_family("fs", theta=1.0, alpha=3.0, beta=6.0).eigenvalue(1) == pytest.approx(1.0)
    assert JAC.eigenvalue(2) == pytest.approx(2.0 * 1.0 * (2 + 0 + 0 + 1) / 2.0)
    assert RG.eigenvalue(3) == pytest.approx(3.0 * (9.0 - 3.0) / 8.0)
    assert STUDENT.eigenvalue(2) == pytest.approx(2.0 * (6.0 - 2.0) / 5.0)
    rg5 = make_family("rg", theta=1.0, alpha=1.0, beta=5.0)
    assert rg5.discrete_spectrum_size() == 2
    with pytest.raises(SpectrumBoundError):
        rg5.eigenvalue(3)


def test_spectrum_meta_examples():
    cat, n, lam = FS.spectrum_meta()
    assert (cat, n) == ("II", 4)
    assert lam == pytest.approx(289.0 / 120.0)
    cat, n, lam = STUDENT.spectrum_meta()
    assert (cat, n) == ("III", 3)
    assert lam == pytest.approx(1.8)
    assert OU.spectrum_meta() == ("I", None, None)


def test_student_boundary_index_norm_diverges():
    # nu = 6: Q_3 is inside the printed index range but E X^6 = inf
    ps = PolynomialSystem(STUDENT)
    assert ps.size == 3
    with pytest.raises(SpectrumBoundError):
        ps.polynomial(3)
    with pytest.raises(SpectrumBoundError):
        ps.polynomial(4)


@pytest.mark.parametrize("fam", ACCEPTANCE_SET, ids=lambda f: repr(f.descriptor()))
def test_orthonormality_by_gaussian_quadrature(fam):
    ps = PolynomialSystem(fam, max_n=10)
    x, w = fam.quadrature_rule(200)
    Q = ps.evaluate_all(x)
    gram = (Q * w) @ Q.T
    assert np.abs(gram - np.eye(ps.size)).max() <= 1e-8


@pytest.mark.parametrize("fam", ACCEPTANCE_SET, ids=lambda f: repr(f.descriptor()))
def test_coefficient_level_eigen_identity(fam):
    ps = PolynomialSystem(fam, max_n=10)
    a0, a1 = fam.drift_coeffs
    dif = list(fam.diffusion_coeffs)
    for n in range(ps.size):
        c = ps.polynomial(n)
        resid = P.polyadd(
            P.polyadd(P.polymul([a0, a1], P.polyder(c)), P.polymul(dif, P.polyder(c, 2))),
            ps.eigenvalue(n) * c,
        )
        assert np.abs(resid).max() <= 1e-10 * max(1.0, np.abs(c).max())


def test_raw_rodrigues_exact_eigen_identity():
    # with rational parameters the raw identity mu P' + D P'' + lam P = 0 is exact
    from fractions import Fraction

    fam = make_family("cir", theta=1.0, a=1.0, b=2.0)
    for n in (0, 1, 3, 6):
        raw = raw_rodrigues(fam, n)
        a0, a1 = (Fraction(c) for c in fam.drift_coeffs)
        d0, d1, d2 = (Fraction(c) for c in fam.diffusion_coeffs)
        lam = Fraction(-n) * (a1 + (n - 1) * d2)
        dP = [k * c for k, c in enumerate(raw)][1:] or [Fraction(0)]
        ddP = [k * c for k, c in enumerate(dP)][1:] or [Fraction(0)]
        out = [Fraction(0)] * (len(raw) + 2)
        for i, c in enumerate(dP):
            out[i] += a0 * c
            out[i + 1] += a1 * c
        for i, c in enumerate(ddP):
            out[i] += d0 * c
            out[i + 1] += d1 * c
            out[i + 2] += d2 * c
        for i, c in enumerate(raw):
            out[i] += lam * c
        assert all(c == 0 for c in out)


def test_rodrigues_matches_classical_recurrence_polynomials():
    """Hermite / Laguerre / Jacobi classical forms, renormalized, within 1e-10."""
    xs = np.linspace(-2.0, 2.0, 9)
    ps = PolynomialSystem(OU, max_n=8)
    for n in range(9):
        # probabilists' Hermite He_n(x)/sqrt(n!)
        he = np.zeros(n + 1)
        he[n] = 1.0
        want = np.polynomial.hermite_e.hermeval(xs, he) / np.sqrt(math.factorial(n))
        assert np.allclose(ps.evaluate(n, xs), want, atol=1e-10)
    cir = make_family("cir", theta=1.0, a=2.0, b=1.5)
    ps = PolynomialSystem(cir, max_n=8)
    xs = np.linspace(0.1, 4.0, 9)
    for n in range(9):
        lag = eval_genlaguerre(n, cir.b - 1.0, cir.a * xs)
        norm = np.sqrt(math.gamma(cir.b) * math.factorial(n) / math.gamma(cir.b + n))
        want = lag * norm * (-1.0) ** n  # positive-leading-coefficient convention
        assert np.allclose(ps.evaluate(n, xs), want, atol=1e-10)
    jac = make_family("jacobi", theta=1.0, a=1.5, b=0.5)
    ps = PolynomialSystem(jac, max_n=8)
    xs = np.linspace(-0.9, 0.9, 9)
    for n in range(9):
        pj = eval_jacobi(n, jac.a, jac.b, xs)
        nrm2, _ = quad(
            lambda x: eval_jacobi(n, jac.a, jac.b, x) ** 2 * jac.stationary_density(x), -1, 1
        )
        want = pj / np.sqrt(nrm2)
        assert np.allclose(ps.evaluate(n, xs), want, atol=1e-9)


def test_rodrigues_matches_orthonormal_recurrence():
    for fam in (OU, make_family("cir", theta=1.0, a=1.0, b=2.0), make_family("jacobi", theta=1.0, a=1.5, b=0.0)):
        ps = PolynomialSystem(fam, max_n=10)
        alpha, beta = fam.recurrence_coefficients(11)
        lo = fam.interval[0] + 0.05 if fam.interval[0] is not None else -2.0
        hi = fam.interval[1] - 0.05 if fam.interval[1] is not None else 2.0
        xs = np.linspace(lo, hi, 7)
        qm, qc = np.zeros_like(xs), np.ones_like(xs)
        for n in range(10):
            assert np.allclose(qc, ps.evaluate(n, xs), atol=1e-10), (fam.kind, n)
            qm, qc = qc, ((xs - alpha[n]) * qc - beta[n] * qm) / beta[n + 1]
        assert np.allclose(qc, ps.evaluate(10, xs), atol=1e-9)


def test_generator_examples():
    assert OU.generator_apply(lambda x: np.full_like(np.asarray(x, float), 3.0), 0.7) == pytest.approx(0.0, abs=1e-8)
    # OU with g(x) = x: G g = -theta x
    assert OU.generator_apply([0.0, 1.0], 0.5) == pytest.approx(-0.5)
    # CIR with g = x^2: -2 theta (x - b/a) x + 2 theta x / a
    th, a, b = 1.3, 1.7, 0.9
    cir = make_family("cir", theta=th, a=a, b=b)
    x = 1.1
    want = -2.0 * th * (x - b / a) * x + 2.0 * th * x / a
    assert cir.generator_apply([0.0, 0.0, 1.0], x) == pytest.approx(want, rel=1e-12)


def test_fokker_planck_examples():
    # F m = 0 pointwise (stationarity)
    for fam in (OU, CIR, JAC):
        for x in (0.4, 0.9):
            val = fam.fokker_planck_apply(fam.stationary_density, x)
            assert abs(val) <= 1e-5
    # F(m Q_n) = -lambda_n m Q_n
    ps = PolynomialSystem(OU, max_n=6)
    for n in (1, 3):
        for x in (-0.7, 0.8):
            g = lambda y, n=n: OU.stationary_density(y) * ps.evaluate(n, y)
            want = -ps.eigenvalue(n) * g(x)
            assert OU.fokker_planck_apply(g, x) == pytest.approx(want, rel=1e-5, abs=1e-8)


def test_fokker_planck_matches_finite_difference_oracle():
    fam = CIR

    def bump(x):
        x = np.asarray(x, dtype=float)
        return np.exp(-((x - 1.2) ** 2) / 0.1)

    for x in (0.9, 1.2, 1.6):
        got = fam.fokker_planck_apply(bump, x)
        h = 1e-4
        a0, a1 = fam.drift_coeffs

        def flux(y):
            return -(a0 + a1 * y) * bump(y)

        d1 = (flux(x + h) - flux(x - h)) / (2 * h)
        dd = (
            fam.diffusion(x + h) * bump(x + h)
            - 2 * fam.diffusion(x) * bump(x)
            + fam.diffusion(x - h) * bump(x - h)
        ) / h**2
        assert got == pytest.approx(d1 + dd, abs=1e-4)


def test_generator_domain_error():
    with pytest.raises(DomainError):
        CIR.generator_apply([0.0, 1.0], -1.0)


@given(
    theta=st.floats(0.1, 5.0),
    a=st.floats(0.2, 4.0),
    b=st.floats(0.2, 4.0),
)
@settings(max_examples=25, deadline=None)
def test_cir_moments_match_density(theta, a, b):
    fam = make_family("cir", theta=theta, a=a, b=b)
    m1 = float(fam.moments(1)[1])
    val, _ = quad(lambda x: x * fam.stationary_density(x), 0, np.inf, limit=200)
    assert val == pytest.approx(m1, rel=1e-7)


def test_family_json_round_trip():
    for fam in ACCEPTANCE_SET:
        clone = from_json(fam.to_json())
        assert clone.descriptor() == fam.descriptor()
