"""Inverse-subordinator densities, the renewal function, and subordination integrals.

The density f(s; t) of the inverse subordinator L(t) has Laplace transform
(in t) Phi(lam)/lam * exp(-s Phi(lam)).  For the stable kind it reduces to
the one-sided stable density through

    f(s; t) = (t/alpha) s^(-1-1/alpha) g_alpha(t s^(-1/alpha)),

with g_alpha the density of the standard positive alpha-stable law
(E exp(-lam S) = exp(-lam^alpha)), evaluated by Kanter's single-integral
representation.  Every other kind goes through numerical Laplace inversion:
fixed Talbot as the primary rule, Gaver-Stehfest as the cross-check, and a
NumericError with diagnostics when the two disagree.
"""

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator
from math import factorial

from scipy.special import gamma

from . import _laplace
from .bernstein import BernsteinFunction, StableBernstein
from .errors import NumericError, ParameterError

TAIL_MASS_EPS = 1e-8
SUBORDINATE_REL_TOL = 1e-9


def kanter_integrand_scale(u, alpha):
    """A(u) in Kanter's representation, u in (0, pi)."""
    return (
        np.sin(alpha * u) ** (alpha / (1.0 - alpha))
        * np.sin((1.0 - alpha) * u)
        / np.sin(u) ** (1.0 / (1.0 - alpha))
    )


def stable_density(x, alpha):
    """Density of the standard positive alpha-stable law at x > 0."""
    x = float(x)
    if x <= 0.0:
        return 0.0
    a = alpha
    xe = x ** (-a / (1.0 - a))
    val, _ = quad(
        lambda u: kanter_integrand_scale(u, a) * np.exp(-kanter_integrand_scale(u, a) * xe),
        0.0,
        np.pi,
        limit=200,
    )
    return a / (1.0 - a) * x ** (-1.0 / (1.0 - a)) * val / np.pi


def chernoff_tail_bound(desc: BernsteinFunction, s, t):
    """Upper bound on P(L(t) > s) = P(sigma(s) < t) from the Laplace transform:
    inf_u exp(u t - s Phi(u))."""
    u = np.geomspace(1e-6, 1e8, 200)
    expo = u * t - s * np.asarray(desc.phi(u), dtype=float)
    return float(np.exp(np.min(expo)))


def tail_cutoff(desc: BernsteinFunction, t, eps=TAIL_MASS_EPS):
    """Smallest grid s* with the Chernoff bound on the L(t)-tail mass <= eps."""
    s = max(1.0, t)
    for _ in range(200):
        if chernoff_tail_bound(desc, s, t) <= eps:
            break
        s *= 1.5
    return s


class InverseSubordinatorDensity:
    """Evaluator for f(s; t) with a closed-form route for the stable kind.

    ``method``: "auto" (closed form when available), "closed_form", "laplace".
    """

    def __init__(self, desc: BernsteinFunction, method="auto", crosscheck_tol=_laplace.CROSSCHECK_TOL):
        if method not in ("auto", "closed_form", "laplace"):
            raise ParameterError(f"unknown inversion method {method!r}")
        if method == "closed_form" and not isinstance(desc, StableBernstein):
            raise ParameterError("closed_form is only available for the stable kind")
        if method == "laplace" and not desc.supports_complex():
            # Gaver-Stehfest alone still works (real nodes), handled below
            pass
        self.desc = desc
        self.method = method
        self.crosscheck_tol = crosscheck_tol

    def _use_closed_form(self):
        return self.method != "laplace" and isinstance(self.desc, StableBernstein)

    def density(self, s, t):
        """f(s; t) for s >= 0, t > 0."""
        if t <= 0:
            raise ParameterError("density requires t > 0")
        if s < 0:
            raise ParameterError("density requires s >= 0")
        if s == 0.0:
            # f(0+; t) = nubar(t)
            return float(self.desc.levy_tail(t))
        if self._use_closed_form():
            a = self.desc.alpha
            arg = t * s ** (-1.0 / a)
            if arg > 1e4:
                # small-s series f(s;t) = sum_k (-s)^k t^{-(k+1)a} / (k! Gamma(1-(k+1)a));
                # the plain formula would push the stable density into its
                # extreme tail for nothing (ratio s t^-a = arg^-a <= 0.07)
                total = 0.0
                for k in range(9):
                    g = gamma(1.0 - (k + 1) * a)
                    if np.isfinite(g) and g != 0.0:
                        total += (-s) ** k * t ** (-(k + 1) * a) / (factorial(k) * g)
                return total
            return (t / a) * s ** (-1.0 - 1.0 / a) * stable_density(arg, a)
        return self._density_laplace(s, t)

    # Below this Chernoff bound on the mass past 0.9 s the density is under
    # every tolerance used here, and the e^{-s Phi} factor drives both
    # inversion rules into pure noise (Talbot overflows the fixed contour);
    # report an exact zero instead of inverting noise.
    _NEGLIGIBLE_TAIL = 1e-8

    def _density_laplace(self, s, t):
        phi = self.desc.phi
        if chernoff_tail_bound(self.desc, 0.9 * s, t) < self._NEGLIGIBLE_TAIL:
            return 0.0

        def transform(z):
            pz = phi(z)
            return pz / z * np.exp(-s * pz)

        if not self.desc.supports_complex():
            return _laplace.gaver_stehfest(transform, t)
        main = _laplace.talbot(transform, t)
        # contour trouble shows up as disagreement between Talbot node counts;
        # Gaver-Stehfest (14 terms) carries ~1e-3 noise on steep densities, so
        # it can only vote on order-of-magnitude blowups
        self_check = _laplace.talbot(transform, t, M=24)
        gs_check = _laplace.gaver_stehfest(transform, t)
        bad_self = abs(main - self_check) > max(1e-7, 1e-6 * abs(main))
        bad_gs = abs(main - gs_check) > max(0.05, 0.2 * abs(main))
        if not np.isfinite(main) or bad_self or bad_gs:
            raise NumericError(
                f"inverse-density inversion inconsistent at s={s}, t={t}",
                diagnostics={
                    "talbot": main,
                    "talbot_24": self_check,
                    "gaver_stehfest": gs_check,
                    "s": s,
                    "t": t,
                },
            )
        return max(main, 0.0)

    def subordinate(self, kernel, t, tail_eps=TAIL_MASS_EPS):
        """int_0^inf kernel(s) f(s; t) ds by adaptive quadrature.

        The upper limit is truncated at s* where the Chernoff bound on the
        remaining L(t)-mass drops below ``tail_eps``; a kernel still growing
        against that bound is rejected as non-integrable.
        """
        if t <= 0:
            raise ParameterError("subordinate requires t > 0")
        cut = tail_cutoff(self.desc, t, tail_eps)
        probe = np.array([cut, 2 * cut, 4 * cut, 8 * cut])
        growth = [abs(kernel(float(sv))) * chernoff_tail_bound(self.desc, sv, t) for sv in probe]
        if np.any(~np.isfinite(growth)) or (growth[-1] > max(growth[0], 10.0 * tail_eps)):
            raise ParameterError("kernel grows against the L(t) tail bound; integral rejected")
        val, _ = quad(
            lambda s: kernel(s) * self.density(s, t),
            0.0,
            cut,
            epsabs=1e-10,
            epsrel=SUBORDINATE_REL_TOL,
            limit=400,
            points=[min(0.05 * cut, 0.1), 0.5 * cut],
        )
        return val


class RenewalFunction:
    """U(t) = E[L(t)], Laplace transform 1/(lam Phi(lam)).

    The numeric kinds are cached eagerly on a monotone grid at construction;
    reads need no synchronization.  The stable kind is exact.
    """

    GRID_POINTS = 512

    def __init__(self, desc: BernsteinFunction, horizon=10.0):
        if horizon <= 0:
            raise ParameterError("horizon must be > 0")
        self.desc = desc
        self.horizon = float(horizon)
        self._stable_alpha = desc.alpha if isinstance(desc, StableBernstein) else None
        if self._stable_alpha is None:
            self._build_cache()

    def _build_cache(self):
        phi = self.desc.phi
        grid = np.geomspace(self.horizon * 1e-8, self.horizon, self.GRID_POINTS)

        def transform(z):
            return 1.0 / (z * phi(z))

        if self.desc.supports_complex():
            vals = _laplace.talbot(transform, grid)
            check = _laplace.gaver_stehfest(transform, float(grid[-1]))
            if abs(vals[-1] - check) > _laplace.CROSSCHECK_TOL * max(1.0, abs(check)):
                raise NumericError(
                    "renewal-function inversion inconsistent",
                    diagnostics={"talbot": vals[-1], "gaver_stehfest": check},
                )
        else:
            vals = np.array([_laplace.gaver_stehfest(transform, tv) for tv in grid])
        grid = np.concatenate(([0.0], grid))
        vals = np.concatenate(([0.0], np.maximum.accumulate(np.maximum(vals, 0.0))))
        self._interp = PchipInterpolator(grid, vals, extrapolate=False)

    def __call__(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t_arr < 0):
            raise ParameterError("renewal requires t >= 0")
        if self._stable_alpha is not None:
            a = self._stable_alpha
            out = t_arr ** a / gamma(1.0 + a)
        else:
            if np.any(t_arr > self.horizon):
                raise ParameterError(
                    f"t beyond cached horizon {self.horizon}; rebuild with a larger horizon"
                )
            out = self._interp(t_arr)
        return out if np.ndim(t) else float(out[0])

    def stieltjes(self, g, s, n=4000):
        """int_0^s g(tau) dU(tau) by midpoint sums on a fine graded grid."""
        if s < 0:
            raise ParameterError("stieltjes requires s >= 0")
        if s == 0:
            return 0.0
        # grade toward 0 where U is steepest
        tau = s * np.linspace(0.0, 1.0, n + 1) ** 2.0
        du = np.diff(self(tau))
        mid = 0.5 * (tau[:-1] + tau[1:])
        return float(np.sum(g(mid) * du))
