"""The six Pearson diffusions: coefficients, state space, stationary law,
spectral metadata, and the generator / Fokker-Planck operators.

Each family fixes a mean-reverting drift mu(x) = a0 + a1 x (a1 = -theta < 0)
and a diffusion polynomial D(x) = sigma^2(x)/2 = d0 + d1 x + d2 x^2 positive
on the state interval E.  Spectral category follows the classification:

  I   (OU, CIR, Jacobi)  purely discrete spectrum,
  II  (Fisher-Snedecor, reciprocal Gamma)  finitely many eigenvalues plus a
      simple absolutely continuous part above a cutoff,
  III (Student)  finitely many eigenvalues plus a multiplicity-two
      continuous part above a cutoff.

For heavy-tailed families the discrete index range reported by the floor
formulas can include a boundary index whose eigenpolynomial has infinite
L^2(m) norm (even integer beta / nu); ``max_valid_poly_index`` is the honest
bound actually used for polynomial construction.
"""

import json
import math
from fractions import Fraction

import numpy as np
from scipy.special import betaln, gammaln, loggamma, roots_genlaguerre, roots_jacobi
from numpy.polynomial.hermite_e import hermegauss

from ..errors import DomainError, ParameterError, SpectrumBoundError

CATEGORY_I = "I"
CATEGORY_II = "II"
CATEGORY_III = "III"


def _positive(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
        raise ParameterError(f"{name} must be a positive real, got {value!r}")
    return float(value)


def _real(name, value):
    if not (isinstance(value, (int, float)) and math.isfinite(value)):
        raise ParameterError(f"{name} must be a finite real, got {value!r}")
    return float(value)


class PearsonFamily:
    """Base class.  Subclasses set drift/diffusion coefficients and the law."""

    kind = "abstract"
    category = None

    # filled by subclasses: (a0, a1), (d0, d1, d2), interval (lo, hi)
    drift_coeffs = None
    diffusion_coeffs = None
    interval = (None, None)

    # ---- state space ----
    def contains(self, x):
        lo, hi = self.interval
        x = np.asarray(x, dtype=float)
        ok = np.ones(x.shape, dtype=bool)
        if lo is not None:
            ok &= x > lo
        if hi is not None:
            ok &= x < hi
        return ok if ok.ndim else bool(ok)

    def _check_in_state_space(self, x):
        if not np.all(self.contains(x)):
            raise DomainError(f"point outside the state interval of {self.kind}")

    # ---- coefficient polynomials ----
    def drift(self, x):
        a0, a1 = self.drift_coeffs
        return a0 + a1 * np.asarray(x, dtype=float)

    def diffusion(self, x):
        d0, d1, d2 = self.diffusion_coeffs
        x = np.asarray(x, dtype=float)
        return d0 + d1 * x + d2 * x * x

    @property
    def theta(self):
        return -self.drift_coeffs[1]

    # ---- spectrum ----
    def eigenvalue(self, n):
        """lambda_n = -n (a1 + (n-1) d2) = n theta (...), exact per family."""
        if n < 0 or n != int(n):
            raise ParameterError(f"eigenvalue index must be a nonnegative integer, got {n!r}")
        n = int(n)
        bound = self.discrete_spectrum_size()
        if bound is not None and n > bound:
            raise SpectrumBoundError(
                f"{self.kind} has discrete eigenvalues only for n <= {bound}, got {n}"
            )
        a1 = self.drift_coeffs[1]
        d2 = self.diffusion_coeffs[2]
        return -n * (a1 + (n - 1) * d2)

    def discrete_spectrum_size(self):
        """N_j for categories II/III; None (unbounded) for category I."""
        return None

    def spectrum_cutoff(self):
        """Lambda_j for categories II/III; None for category I."""
        return None

    def max_valid_poly_index(self, cap=None):
        """Largest n whose eigenpolynomial has finite L^2(m) norm."""
        bound = self.discrete_spectrum_size()
        out = bound if bound is not None else (cap if cap is not None else 10 ** 9)
        if cap is not None:
            out = min(out, cap)
        return out

    def spectrum_meta(self):
        return self.category, self.discrete_spectrum_size(), self.spectrum_cutoff()

    # ---- stationary law ----
    def stationary_density(self, x):
        x_arr = np.asarray(x, dtype=float)
        self._check_in_state_space(x_arr)
        out = np.exp(self._log_density(x_arr))
        return out if np.ndim(x) else float(out)

    def _log_density(self, x):
        raise NotImplementedError

    def moments(self, kmax):
        """[E X^0, ..., E X^kmax] as Fractions where exact; math.inf marks
        divergent moments of the heavy-tailed families."""
        raise NotImplementedError

    # ---- operators ----
    def generator_apply(self, g, x, h=None):
        """(G g)(x) = mu g' + D g''; ``g`` is a callable or a low-to-high
        monomial coefficient array (then derivatives are analytic)."""
        x_arr = np.asarray(x, dtype=float)
        self._check_in_state_space(x_arr)
        g1, g2 = _two_derivatives(g, x_arr, h)
        return self.drift(x_arr) * g1 + self.diffusion(x_arr) * g2

    def fokker_planck_apply(self, g, x, h=None):
        """(F g)(x) = -(mu g)' + (D g)''."""
        x_arr = np.asarray(x, dtype=float)
        self._check_in_state_space(x_arr)
        g0 = _evaluate(g, x_arr)
        g1, g2 = _two_derivatives(g, x_arr, h)
        a0, a1 = self.drift_coeffs
        d0, d1, d2 = self.diffusion_coeffs
        dprime = d1 + 2.0 * d2 * x_arr
        return (2.0 * d2 - a1) * g0 + (2.0 * dprime - self.drift(x_arr)) * g1 + self.diffusion(x_arr) * g2

    # ---- quadrature against m ----
    def quadrature_rule(self, n=200):
        """Nodes/weights with sum_i w_i f(x_i) ~ int f m dx (w_i sum to 1)."""
        raise NotImplementedError

    # ---- serialization ----
    def descriptor(self):
        raise NotImplementedError

    def to_json(self):
        return json.dumps(self.descriptor())

    def __repr__(self):
        return f"{type(self).__name__}({self.descriptor()})"


def _evaluate(g, x):
    if callable(g):
        return np.asarray(g(x), dtype=float)
    return np.polynomial.polynomial.polyval(x, np.asarray(g, dtype=float))


def _two_derivatives(g, x, h):
    if callable(g):
        step = h if h is not None else 1e-5 * np.maximum(1.0, np.abs(x))
        up, dn = _evaluate(g, x + step), _evaluate(g, x - step)
        mid = _evaluate(g, x)
        return (up - dn) / (2.0 * step), (up - 2.0 * mid + dn) / (step * step)
    c = np.asarray(g, dtype=float)
    c1 = np.polynomial.polynomial.polyder(c) if c.size > 1 else np.zeros(1)
    c2 = np.polynomial.polynomial.polyder(c1) if c1.size > 1 else np.zeros(1)
    return (
        np.polynomial.polynomial.polyval(x, c1),
        np.polynomial.polynomial.polyval(x, c2),
    )


class OrnsteinUhlenbeck(PearsonFamily):
    kind = "ou"
    category = CATEGORY_I

    def __init__(self, theta, mu=0.0, sigma=1.0):
        th = _positive("theta", theta)
        self.mu = _real("mu", mu)
        self.sigma = _positive("sigma", sigma)
        self.drift_coeffs = (th * self.mu, -th)
        self.diffusion_coeffs = (th * self.sigma ** 2, 0.0, 0.0)
        self.interval = (None, None)

    def _log_density(self, x):
        z = (x - self.mu) / self.sigma
        return -0.5 * z * z - 0.5 * np.log(2.0 * np.pi * self.sigma ** 2)

    def moments(self, kmax):
        mu, s2 = Fraction(self.mu), Fraction(self.sigma) ** 2
        out = [Fraction(1)]
        if kmax >= 1:
            out.append(mu)
        for k in range(2, kmax + 1):
            out.append(mu * out[k - 1] + (k - 1) * s2 * out[k - 2])
        return out[: kmax + 1]

    def quadrature_rule(self, n=200):
        z, w = hermegauss(n)
        return self.mu + self.sigma * z, w / np.sqrt(2.0 * np.pi)

    def recurrence_coefficients(self, n):
        ns = np.arange(n + 1, dtype=float)
        return np.full(n + 1, self.mu), self.sigma * np.sqrt(ns)

    def descriptor(self):
        return {"kind": "ou", "theta": self.theta, "mu": self.mu, "sigma": self.sigma}


class CoxIngersollRoss(PearsonFamily):
    kind = "cir"
    category = CATEGORY_I

    def __init__(self, theta, a, b):
        th = _positive("theta", theta)
        self.a = _positive("a", a)
        self.b = _positive("b", b)
        self.drift_coeffs = (th * self.b / self.a, -th)
        self.diffusion_coeffs = (0.0, th / self.a, 0.0)
        self.interval = (0.0, None)

    def _log_density(self, x):
        return self.b * np.log(self.a) + (self.b - 1.0) * np.log(x) - self.a * x - gammaln(self.b)

    def moments(self, kmax):
        a, b = Fraction(self.a), Fraction(self.b)
        out = [Fraction(1)]
        for k in range(1, kmax + 1):
            out.append(out[-1] * (b + k - 1) / a)
        return out

    def quadrature_rule(self, n=200):
        y, w = roots_genlaguerre(n, self.b - 1.0)
        w = w / math.gamma(self.b)
        return y / self.a, w

    def recurrence_coefficients(self, n):
        ns = np.arange(n + 1, dtype=float)
        return (2.0 * ns + self.b) / self.a, np.sqrt(ns * (ns + self.b - 1.0)) / self.a

    def descriptor(self):
        return {"kind": "cir", "theta": self.theta, "a": self.a, "b": self.b}


class JacobiDiffusion(PearsonFamily):
    kind = "jacobi"
    category = CATEGORY_I

    def __init__(self, theta, a, b):
        th = _positive("theta", theta)
        if not (isinstance(a, (int, float)) and a > -1.0):
            raise ParameterError(f"jacobi exponent a must exceed -1, got {a!r}")
        if not (isinstance(b, (int, float)) and b > -1.0):
            raise ParameterError(f"jacobi exponent b must exceed -1, got {b!r}")
        self.a, self.b = float(a), float(b)
        s = self.a + self.b + 2.0
        self.drift_coeffs = (th * (self.b - self.a) / s, -th)
        self.diffusion_coeffs = (th / s, 0.0, -th / s)
        self.interval = (-1.0, 1.0)

    def _log_density(self, x):
        a, b = self.a, self.b
        const = -betaln(a + 1.0, b + 1.0) - (a + b + 1.0) * np.log(2.0)
        return a * np.log(1.0 - x) + b * np.log(1.0 + x) + const

    def moments(self, kmax):
        a, b = Fraction(self.a), Fraction(self.b)
        shifted = [Fraction(1)]  # E[(1+X)^k] = 2^k prod (b+1+j)/(a+b+2+j)
        for k in range(1, kmax + 1):
            shifted.append(shifted[-1] * 2 * (b + k) / (a + b + k + 1))
        out = []
        for k in range(kmax + 1):
            acc = Fraction(0)
            for i in range(k + 1):
                acc += Fraction(math.comb(k, i)) * shifted[i] * (-1) ** (k - i)
            out.append(acc)
        return out

    def quadrature_rule(self, n=200):
        x, w = roots_jacobi(n, self.a, self.b)
        logc = gammaln(self.a + self.b + 2.0) - gammaln(self.a + 1.0) - gammaln(self.b + 1.0) \
            - (self.a + self.b + 1.0) * np.log(2.0)
        return x, w * np.exp(logc)

    def recurrence_coefficients(self, n):
        a, b = self.a, self.b
        ns = np.arange(n + 1, dtype=float)
        denom = (2.0 * ns + a + b) * (2.0 * ns + a + b + 2.0)
        alpha = np.where(denom != 0.0, (b * b - a * a) / np.where(denom == 0, 1, denom), 0.0)
        alpha[0] = (b - a) / (a + b + 2.0)
        beta = np.empty(n + 1)
        beta[0] = 0.0
        if n >= 1:
            beta[1] = 4.0 * (a + 1.0) * (b + 1.0) / ((a + b + 2.0) ** 2 * (a + b + 3.0))
        k = ns[2:]
        beta[2:] = (
            4.0 * k * (k + a) * (k + b) * (k + a + b)
            / ((2.0 * k + a + b) ** 2 * (2.0 * k + a + b + 1.0) * (2.0 * k + a + b - 1.0))
        )
        return alpha, np.sqrt(beta)

    def descriptor(self):
        return {"kind": "jacobi", "theta": self.theta, "a": self.a, "b": self.b}


class FisherSnedecor(PearsonFamily):
    """Spectral category II, continuous part indexed j = 1."""

    kind = "fs"
    category = CATEGORY_II
    continuous_index = 1

    def __init__(self, theta, alpha, beta):
        th = _positive("theta", theta)
        self.alpha = _positive("alpha", alpha)
        self.beta = _positive("beta", beta)
        if self.beta <= 2.0:
            raise ParameterError(f"fs requires beta > 2 for mean reversion, got {beta!r}")
        if self.alpha <= 2.0:
            raise ParameterError(f"fs requires alpha > 2, got {alpha!r}")
        self.drift_coeffs = (th * self.beta / (self.beta - 2.0), -th)
        c = 2.0 * th / (self.alpha * (self.beta - 2.0))
        self.diffusion_coeffs = (0.0, c * self.beta, c * self.alpha)
        self.interval = (0.0, None)

    def _log_density(self, x):
        al, be = self.alpha, self.beta
        return (
            0.5 * al * (np.log(al) + np.log(x))
            + 0.5 * be * np.log(be)
            - 0.5 * (al + be) * np.log(al * x + be)
            - np.log(x)
            - betaln(0.5 * al, 0.5 * be)
        )

    def discrete_spectrum_size(self):
        return int(math.floor(self.beta / 4.0))

    def spectrum_cutoff(self):
        return self.theta * self.beta ** 2 / (8.0 * (self.beta - 2.0))

    def max_valid_poly_index(self, cap=None):
        # Q_n in L^2(m) needs E X^{2n} < inf, i.e. 4n < beta
        out = self.discrete_spectrum_size()
        while out > 0 and 4 * out >= self.beta:
            out -= 1
        if cap is not None:
            out = min(out, cap)
        return out

    def moments(self, kmax):
        al, be = Fraction(self.alpha), Fraction(self.beta)
        out = [Fraction(1)]
        for k in range(1, kmax + 1):
            if 2 * k >= be:
                out.append(math.inf)
                continue
            prev = out[k - 1]
            out.append(math.inf if prev is math.inf else prev * (be / al) * (al / 2 + k - 1) / (be / 2 - k))
        return out

    def quadrature_rule(self, n=200):
        # z = cos(2 phi) with x = (beta/alpha) tan^2(phi) maps int f m dx to a
        # Gauss-Jacobi integral with exponents (alpha/2 - 1, beta/2 - 1); the
        # (1+z)^K shift makes the rule exact for polynomials up to the moment
        # bound (x^k grows like (1+z)^-k at the z = -1 endpoint)
        K = 2 * self.max_valid_poly_index()
        z, w = roots_jacobi(n, 0.5 * self.alpha - 1.0, 0.5 * self.beta - 1.0 - K)
        x = (self.beta / self.alpha) * (1.0 - z) / (1.0 + z)
        w = w * (1.0 + z) ** K
        w = w / w.sum()
        return x[::-1], w[::-1]

    def descriptor(self):
        return {"kind": "fs", "theta": self.theta, "alpha": self.alpha, "beta": self.beta}


class ReciprocalGamma(PearsonFamily):
    """Spectral category II, continuous part indexed j = 2."""

    kind = "rg"
    category = CATEGORY_II
    continuous_index = 2

    def __init__(self, theta, alpha, beta):
        th = _positive("theta", theta)
        self.alpha = _positive("alpha", alpha)
        self.beta = _positive("beta", beta)
        if self.beta <= 1.0:
            raise ParameterError(f"rg requires beta > 1, got {beta!r}")
        self.drift_coeffs = (th * self.alpha / (self.beta - 1.0), -th)
        self.diffusion_coeffs = (0.0, 0.0, th / (self.beta - 1.0))
        self.interval = (0.0, None)

    def _log_density(self, x):
        al, be = self.alpha, self.beta
        return be * np.log(al) - gammaln(be) - (be + 1.0) * np.log(x) - al / x

    def discrete_spectrum_size(self):
        return int(math.floor(self.beta / 2.0))

    def spectrum_cutoff(self):
        return self.theta * self.beta ** 2 / (4.0 * (self.beta - 1.0))

    def max_valid_poly_index(self, cap=None):
        out = self.discrete_spectrum_size()
        while out > 0 and 2 * out >= self.beta:
            out -= 1
        if cap is not None:
            out = min(out, cap)
        return out

    def moments(self, kmax):
        al, be = Fraction(self.alpha), Fraction(self.beta)
        out = [Fraction(1)]
        for k in range(1, kmax + 1):
            if k >= be:
                out.append(math.inf)
                continue
            prev = out[k - 1]
            out.append(math.inf if prev is math.inf else prev * al / (be - k))
        return out

    def quadrature_rule(self, n=200):
        # y = alpha/x turns int f m dx into a generalized-Laguerre integral;
        # shifting the parameter by K keeps x^k = (alpha/y)^k polynomial in y
        # (times the rule weight) up to the moment bound
        K = 2 * self.max_valid_poly_index()
        y, w = roots_genlaguerre(n, self.beta - 1.0 - K)
        w = w * y ** K
        w = w / w.sum()
        return self.alpha / y[::-1], w[::-1]

    def descriptor(self):
        return {"kind": "rg", "theta": self.theta, "alpha": self.alpha, "beta": self.beta}


class StudentDiffusion(PearsonFamily):
    """Spectral category III (multiplicity-two continuous part, served by the
    Monte Carlo remainder rather than closed-form eigenfunctions)."""

    kind = "student"
    category = CATEGORY_III

    def __init__(self, theta, delta, nu, mu=0.0, mu_prime=0.0):
        th = _positive("theta", theta)
        self.delta = _positive("delta", delta)
        self.nu = _positive("nu", nu)
        if self.nu <= 1.0:
            raise ParameterError(f"student requires nu > 1, got {nu!r}")
        if abs(self.nu - 2.0 * round((self.nu + 1.0) / 2.0) + 1.0) < 1e-12:
            raise ParameterError(
                f"student is not ergodic for odd integer nu = 2k - 1, got {nu!r}"
            )
        self.mu = _real("mu", mu)
        self.mu_prime = _real("mu_prime", mu_prime)
        self.drift_coeffs = (th * self.mu, -th)
        c = th / (self.nu - 1.0)
        self.diffusion_coeffs = (
            c * (self.delta ** 2 + self.mu_prime ** 2),
            -2.0 * c * self.mu_prime,
            c,
        )
        self.interval = (None, None)
        self._skew = (self.mu - self.mu_prime) * (self.nu - 1.0) / self.delta
        self._log_norm = self._log_normalizing_constant()

    def _log_normalizing_constant(self):
        nu, gam = self.nu, self._skew
        x0 = 0.5 * (nu + 1.0)
        # paper's infinite product equals |Gamma(x0 + i gam/2)|^2 / Gamma(x0)^2
        log_prod = 2.0 * (np.real(loggamma(x0 + 0.5j * gam)) - gammaln(x0))
        return (
            gammaln(0.5 * (nu + 1.0))
            - np.log(self.delta)
            - 0.5 * np.log(np.pi)
            - gammaln(0.5 * nu)
            + log_prod
        )

    def _log_density(self, x):
        z = (x - self.mu_prime) / self.delta
        return self._log_norm + self._skew * np.arctan(z) - 0.5 * (self.nu + 1.0) * np.log1p(z * z)

    def discrete_spectrum_size(self):
        return int(math.floor(self.nu / 2.0))

    def spectrum_cutoff(self):
        return self.theta * self.nu ** 2 / (4.0 * (self.nu - 1.0))

    def max_valid_poly_index(self, cap=None):
        out = self.discrete_spectrum_size()
        while out > 0 and 2 * out >= self.nu:
            out -= 1
        if cap is not None:
            out = min(out, cap)
        return out

    def moments(self, kmax):
        # no rational closed form in the skew case: integrate in the angular
        # variable u = arctan((x - mu')/delta) where the weight is cos^{nu-1}
        from scipy.integrate import quad

        out = []
        for k in range(kmax + 1):
            if k >= self.nu:
                out.append(math.inf)
                continue
            val, _ = quad(
                lambda u, k=k: (self.mu_prime + self.delta * np.tan(u)) ** k
                * np.exp(self._log_norm + self._skew * u)
                * np.cos(u) ** (self.nu - 1.0)
                * self.delta,
                -np.pi / 2.0,
                np.pi / 2.0,
                epsabs=1e-13,
                epsrel=1e-12,
                limit=400,
            )
            out.append(val)
        return out

    def quadrature_rule(self, n=200):
        # z = sin(u): weight becomes (1 - z^2)^{(nu-2)/2} (Gauss-Jacobi); the
        # K-shift absorbs tan^k growth up to the moment bound, and the skew
        # factor e^{gam u} rides along with the integrand
        K = 2 * self.max_valid_poly_index()
        e = 0.5 * (self.nu - 2.0 - K)
        z, w = roots_jacobi(n, e, e)
        u = np.arcsin(z)
        x = self.mu_prime + self.delta * np.tan(u)
        w = w * np.exp(self._skew * u) * (1.0 - z * z) ** (0.5 * K)
        w = w / w.sum()
        return x, w

    def descriptor(self):
        return {
            "kind": "student",
            "theta": self.theta,
            "delta": self.delta,
            "nu": self.nu,
            "mu": self.mu,
            "mu_prime": self.mu_prime,
        }


_FAMILIES = {
    "ou": (OrnsteinUhlenbeck, ("theta", "mu", "sigma")),
    "cir": (CoxIngersollRoss, ("theta", "a", "b")),
    "jacobi": (JacobiDiffusion, ("theta", "a", "b")),
    "fs": (FisherSnedecor, ("theta", "alpha", "beta")),
    "rg": (ReciprocalGamma, ("theta", "alpha", "beta")),
    "student": (StudentDiffusion, ("theta", "delta", "nu", "mu", "mu_prime")),
}


def make_family(kind, **params) -> PearsonFamily:
    if kind not in _FAMILIES:
        raise ParameterError(f"unknown Pearson family {kind!r}")
    cls, fields = _FAMILIES[kind]
    extra = set(params) - set(fields)
    if extra:
        raise ParameterError(f"unexpected parameters {sorted(extra)} for family {kind!r}")
    return cls(**params)


def from_descriptor(desc: dict) -> PearsonFamily:
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ParameterError(f"bad family descriptor: {desc!r}")
    d = dict(desc)
    return make_family(d.pop("kind"), **d)


def from_json(text: str) -> PearsonFamily:
    return from_descriptor(json.loads(text))
