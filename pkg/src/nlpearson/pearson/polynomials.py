"""Orthonormal eigenpolynomial systems built from the Rodrigues formula.

The raw degree-n eigenpolynomial of a Pearson generator is

    R_n(x) = (1/m(x)) d^n/dx^n [ m(x) D(x)^n ],

which the Pearson equation m'/m = p/D (p the forward-drift numerator)
collapses into an exact polynomial recursion

    P_0 = 1,   P_{j+1} = (n - j) D' P_j + D P_j' + p P_j,   R_n = P_n,

carried out here in rational arithmetic on the monomial coefficients.  The
binding normalization rescales R_n to unit L^2(m dx) norm with a positive
leading coefficient; the printed per-family normalizing constants are never
used (two of them are ambiguous in the source material, and every consumer
only needs orthonormality).
"""

import math
from fractions import Fraction

import mpmath as mp
import numpy as np

from ..errors import ParameterError, SpectrumBoundError
from .families import CATEGORY_I, PearsonFamily, StudentDiffusion

DEFAULT_CAT_I_MAX_N = 24


def _poly_add(p, q):
    n = max(len(p), len(q))
    return [
        (p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0)
        for i in range(n)
    ]


def _poly_mul(p, q):
    out = [Fraction(0)] * (len(p) + len(q) - 1)
    for i, pi in enumerate(p):
        if pi:
            for j, qj in enumerate(q):
                out[i + j] += pi * qj
    return out


def _poly_scale(p, c):
    return [c * pi for pi in p]


def _poly_diff(p):
    return [i * pi for i, pi in enumerate(p)][1:] or [Fraction(0)]


def _trim(p):
    while len(p) > 1 and p[-1] == 0:
        p = p[:-1]
    return p


def raw_rodrigues(family: PearsonFamily, n: int):
    """Exact monomial coefficients (low to high) of R_n as Fractions."""
    a0, a1 = (Fraction(c) for c in family.drift_coeffs)
    d0, d1, d2 = (Fraction(c) for c in family.diffusion_coeffs)
    D = _trim([d0, d1, d2])
    Dp = _trim(_poly_diff([d0, d1, d2]))
    p = _trim([a0 - d1, a1 - 2 * d2])
    P = [Fraction(1)]
    for j in range(n):
        P = _poly_add(
            _poly_add(_poly_scale(_poly_mul(Dp, P), n - j), _poly_mul(D, _poly_diff(P))),
            _poly_mul(p, P),
        )
        P = _trim(P)
    return P


class PolynomialSystem:
    """Orthonormal Q_0..Q_max_n with their eigenvalues.

    Construction is the only expensive step; afterwards all reads are pure.
    """

    def __init__(self, family: PearsonFamily, max_n=None):
        if max_n is not None and (max_n < 0 or max_n != int(max_n)):
            raise ParameterError(f"max_n must be a nonnegative integer, got {max_n!r}")
        self.family = family
        if family.category == CATEGORY_I:
            self.max_n = int(max_n) if max_n is not None else DEFAULT_CAT_I_MAX_N
        else:
            bound = family.discrete_spectrum_size()
            self.max_n = min(int(max_n), bound) if max_n is not None else bound
        self._valid_n = family.max_valid_poly_index(self.max_n)
        self._coeffs = self._build()
        self.eigenvalues = np.array([family.eigenvalue(n) for n in range(self._valid_n + 1)])

    def _build(self):
        fam = self.family
        raws = [raw_rodrigues(fam, n) for n in range(self._valid_n + 1)]
        if isinstance(fam, StudentDiffusion):
            norms2 = _student_norms(fam, raws)
        else:
            moments = fam.moments(2 * self._valid_n)
            if any(m is math.inf for m in moments):
                raise SpectrumBoundError(
                    f"{fam.kind}: a required moment diverges below n={self._valid_n}"
                )
            norms2 = []
            for raw in raws:
                acc = Fraction(0)
                for i, ci in enumerate(raw):
                    for j, cj in enumerate(raw):
                        acc += ci * cj * moments[i + j]
                norms2.append(acc)
        coeffs = []
        with mp.workdps(50):
            for raw, nrm2 in zip(raws, norms2):
                if nrm2 <= 0:
                    raise SpectrumBoundError(f"{fam.kind}: nonpositive norm, polynomial degenerates")
                if isinstance(nrm2, Fraction):
                    nrm2_mp = mp.mpf(nrm2.numerator) / nrm2.denominator
                else:
                    nrm2_mp = nrm2
                scale = 1 / mp.sqrt(nrm2_mp)
                if raw[-1] < 0:
                    scale = -scale
                coeffs.append(
                    np.array([float(mp.mpf(c.numerator) / c.denominator * scale) for c in raw])
                )
        return coeffs

    def _check_index(self, n):
        if n < 0 or n != int(n):
            raise ParameterError(f"index must be a nonnegative integer, got {n!r}")
        n = int(n)
        bound = self.family.discrete_spectrum_size()
        if bound is not None and n > bound:
            raise SpectrumBoundError(
                f"{self.family.kind} discrete spectrum ends at n={bound}, got {n}"
            )
        if n > self._valid_n:
            if bound is not None and n <= bound:
                raise SpectrumBoundError(
                    f"{self.family.kind}: Q_{n} is printed in the index range but its "
                    f"L^2(m) norm diverges (moment bound); last valid index is {self._valid_n}"
                )
            raise ParameterError(
                f"n={n} beyond constructed range {self._valid_n}; rebuild with larger max_n"
            )
        return n

    def polynomial(self, n):
        """Monomial coefficients (low to high) of Q_n."""
        return self._coeffs[self._check_index(n)].copy()

    def eigenvalue(self, n):
        return float(self.eigenvalues[self._check_index(n)])

    @property
    def size(self):
        """Number of available polynomials (valid indices are 0..size-1)."""
        return self._valid_n + 1

    def evaluate(self, n, x):
        c = self._coeffs[self._check_index(n)]
        return np.polynomial.polynomial.polyval(np.asarray(x, dtype=float), c)

    def evaluate_all(self, x):
        """Matrix Q_n(x_i), shape (size, len(x))."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.vstack([np.polynomial.polynomial.polyval(x, c) for c in self._coeffs])


def _student_norms(fam: StudentDiffusion, raws):
    """L^2(m) norms of the raw Student polynomials by angular quadrature."""
    norms = []
    gam = (fam.mu - fam.mu_prime) * (fam.nu - 1.0) / fam.delta
    with mp.workdps(40):
        nu = mp.mpf(fam.nu)
        de = mp.mpf(fam.delta)
        mpr = mp.mpf(fam.mu_prime)
        g = mp.mpf(gam)
        const = mp.e ** (mp.mpf(fam._log_norm)) * de

        for raw in raws:
            cs = [mp.mpf(c.numerator) / c.denominator for c in raw]

            def integrand(u, cs=cs):
                x = mpr + de * mp.tan(u)
                q = mp.mpf(0)
                for c in reversed(cs):
                    q = q * x + c
                return q * q * mp.e ** (g * u) * mp.cos(u) ** (nu - 1)

            val = mp.quad(integrand, [-mp.pi / 2, 0, mp.pi / 2]) * const
            norms.append(mp.mpf(val))
    return norms
