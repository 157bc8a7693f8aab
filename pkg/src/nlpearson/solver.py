"""Strong solutions of the non-local backward and forward Cauchy problems.

Backward:  d_t^Phi u = G u,  u(0, y) = g(y),   u(t, y) = sum_n E(t; -lam_n) g_n Q_n(y)
Forward:   d_t^Phi v = F v,  v(0, x) = f(x),   v(t, x) = m(x) sum_n E(t; -lam_n) f_n Q_n(x)

with g_n = int g Q_n m dx and f_n = int (f/m) Q_n m dx.  Polynomial data are
expanded exactly through the moment table; callables go through the
family-matched Gaussian rule.  Dirac initial data are rejected here: their
coefficients diverge, and the fundamental solution is served directly by
spectral.SpectralExpansion.

The residual checker recomputes d_t^Phi via the product-integration rule and
the space operator via direct differentiation of the assembled polynomial
(no eigen-identity shortcut), so the three numeric pipelines cross-validate.
"""

import math
from dataclasses import dataclass, field


import numpy as np
import numpy.polynomial.polynomial as npoly

from .bernstein import BernsteinFunction
from .errors import DatumError, ParameterError, SpectrumBoundError
from .pearson import PolynomialSystem
from .pearson.families import CATEGORY_I, PearsonFamily
from .relaxation import RelaxationEvaluator, nonlocal_derivative

PARSEVAL_SLACK = 1e-8
DISCRETE_SPAN_TOL = 1e-8
QUAD_NODES = 200


@dataclass
class CoefficientExpansion:
    family: PearsonFamily
    mode: str  # "backward" | "forward"
    coefficients: np.ndarray
    l2_tail: float
    system: PolynomialSystem = field(repr=False)

    @property
    def n_terms(self):
        return len(self.coefficients)


def _as_callable(family, datum, mode):
    if isinstance(datum, str):
        raise DatumError(
            "Dirac-type data cannot be expanded (coefficients diverge); evaluate "
            "spectral.SpectralExpansion.nonlocal_transition_density instead"
            if datum == "dirac"
            else f"unknown datum shorthand {datum!r}"
        )
    return datum


def expand(family: PearsonFamily, datum, n_terms, mode="backward", system=None):
    """Coefficients of ``datum`` (backward) or ``datum``/m (forward) in Q_n.

    ``datum`` is a callable on E or a low-to-high monomial coefficient array.
    """
    if mode not in ("backward", "forward"):
        raise ParameterError(f"mode must be backward or forward, got {mode!r}")
    datum = _as_callable(family, datum, mode)
    bound = family.discrete_spectrum_size()
    if bound is not None and n_terms - 1 > bound:
        raise SpectrumBoundError(
            f"{family.kind} has {bound + 1} discrete eigenfunctions; requested {n_terms}"
        )
    max_valid = family.max_valid_poly_index(n_terms - 1)
    if max_valid < n_terms - 1:
        raise SpectrumBoundError(
            f"{family.kind}: polynomial norms diverge beyond n={max_valid}"
        )
    system = system or PolynomialSystem(family, max_n=n_terms - 1)

    if not callable(datum) and mode == "backward":
        coeffs, norm2 = _expand_polynomial(family, system, np.asarray(datum, dtype=float), n_terms)
    else:
        coeffs, norm2 = _expand_by_quadrature(family, system, datum, n_terms, mode)
    if not np.isfinite(norm2) or not np.all(np.isfinite(coeffs)):
        raise DatumError("datum is not square-integrable against the stationary weight")
    parseval_gap = norm2 - float(np.sum(coeffs**2))
    if parseval_gap < -PARSEVAL_SLACK * max(1.0, norm2):
        raise DatumError("Parseval violated: quadrature cannot resolve this datum")
    l2_tail = math.sqrt(max(parseval_gap, 0.0))
    if family.category != CATEGORY_I and l2_tail > DISCRETE_SPAN_TOL * max(1.0, math.sqrt(norm2)):
        raise DatumError(
            f"{family.kind}: datum leaves the discrete span (L2 tail {l2_tail:.3g}); "
            "the continuous component has no computable expansion here - use the "
            "Monte Carlo stochastic representation (solver.mc_backward_solution)"
        )
    return CoefficientExpansion(family, mode, coeffs, l2_tail, system)


def _expand_polynomial(family, system, poly, n_terms):
    moments = family.moments(2 * max(len(poly) - 1, system.size - 1) + 1)
    if any(m is math.inf for m in moments):
        raise DatumError("polynomial datum has infinite norm under this family")
    mom = np.array([float(m) for m in moments])

    def inner(c1, c2):
        prod = npoly.polymul(c1, c2)
        return float(np.sum(prod * mom[: len(prod)]))

    coeffs = np.array([inner(poly, system.polynomial(n)) for n in range(n_terms)])
    return coeffs, inner(poly, poly)


def _expand_by_quadrature(family, system, datum, n_terms, mode):
    x, w = family.quadrature_rule(QUAD_NODES)
    vals = (
        np.asarray(datum(x), dtype=float)
        if callable(datum)
        else npoly.polyval(x, np.asarray(datum, dtype=float))
    )
    if mode == "forward":
        vals = vals / family.stationary_density(x)
    Q = system.evaluate_all(x)[:n_terms]
    coeffs = Q @ (w * vals)
    return coeffs, float(np.sum(w * vals * vals))


class SolutionField:
    """Evaluator for one Cauchy problem; pure once constructed."""

    def __init__(self, expansion: CoefficientExpansion, phi: BernsteinFunction):
        self.expansion = expansion
        self.phi = phi
        self.relax = RelaxationEvaluator(phi)
        self.family = expansion.family
        self.system = expansion.system
        self._lams = np.array([self.system.eigenvalue(n) for n in range(expansion.n_terms)])

    def _weights(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        w = np.empty((t_arr.size, self._lams.size))
        for j, lam in enumerate(self._lams):
            w[:, j] = self.relax.eigenfunction(t_arr, lam)
        return w

    def _combined_coeffs(self, t):
        """Monomial coefficients of sum_n w_n(t) c_n Q_n for scalar t."""
        w = self._weights(t)[0] * self.expansion.coefficients
        out = np.zeros(self.system.size + 1)
        for n, wn in enumerate(w):
            c = self.system.polynomial(n)
            out[: len(c)] += wn * c
        return np.trim_zeros(out, "b") if np.any(out) else np.zeros(1)

    def backward(self, t, y):
        """u(t, y) = sum E(t; -lam_n) g_n Q_n(y); broadcasts over t or y."""
        if np.any(np.asarray(t) < 0):
            raise ParameterError("backward solution requires t >= 0")
        self.family._check_in_state_space(y)
        y_arr = np.atleast_1d(np.asarray(y, dtype=float))
        Q = self.system.evaluate_all(y_arr)[: self.expansion.n_terms]
        w = self._weights(t) * self.expansion.coefficients
        out = w @ Q  # (nt, ny)
        if np.ndim(y) == 0:
            out = out[:, 0]
        if np.ndim(t) == 0:
            out = out[0]
        return float(out) if out.ndim == 0 else out

    def forward(self, t, x):
        """v(t, x) = m(x) sum E(t; -lam_n) f_n Q_n(x)."""
        base = self.backward(t, x)
        return base * self.family.stationary_density(x)

    def residual(self, t_grid, x_grid):
        """max over the grid of |d_t^Phi u - (G or F) u|, all-numeric routes."""
        mode = self.expansion.mode
        worst = 0.0
        for t in np.asarray(t_grid, dtype=float):
            if t <= 0:
                raise ParameterError("residual grid must have t > 0")
            comb = self._combined_coeffs(t)
            for xv in np.asarray(x_grid, dtype=float):
                if mode == "backward":
                    space = self.family.generator_apply(comb, xv)
                    tder = nonlocal_derivative(
                        self.phi, lambda tau, xv=xv: self.backward(tau, xv), t
                    )
                else:
                    space = self.family.fokker_planck_apply(
                        lambda y, t=t: self.forward(t, y), xv
                    )
                    tder = nonlocal_derivative(
                        self.phi, lambda tau, xv=xv: self.forward(tau, xv), t
                    )
                worst = max(worst, abs(tder - space))
        return worst


def mc_backward_solution(family, phi, datum, t, y, n_paths=20000, seed=0, dt=1e-3):
    """Monte Carlo E_y[g(X_Phi(t))], the stochastic-representation route.

    Accuracy disclaimer: this is the only available route for category II/III
    data outside the discrete span; the error is statistical (reported s.e.).
    """
    from . import montecarlo

    g = datum if callable(datum) else (lambda x: npoly.polyval(x, np.asarray(datum, float)))
    ts = montecarlo.simulate_nonlocal(family, phi, x0=y, horizon=t, dt=dt, n_paths=n_paths, seed=seed)
    samples = g(ts.paths[:, -1])
    return float(np.mean(samples)), float(np.std(samples) / np.sqrt(n_paths))
