"""Continuous-spectrum data for the category-II families.

Above the cutoff the discriminant Delta_j(lam) is purely imaginary and the
eigenfunctions have complex-conjugate parameter pairs, so all reported
quantities are real:

  Fisher-Snedecor (j = 1):
      f_1(x; -lam) = 2F1(-beta/4 + Delta_1, -beta/4 - Delta_1; alpha/2; -alpha x / beta)
      Delta_1(lam) = sqrt(beta^2/16 - lam (beta - 2) / (2 theta))
  reciprocal Gamma (j = 2):
      f_2(x; -lam) = alpha^{(beta+1)/2} 2F0(-beta/2 + Delta_2, -beta/2 - Delta_2; ; -x/alpha)
      Delta_2(lam) = sqrt(beta^2 - 4 lam (beta - 1) / theta) / 2,

with the 2F0 symbol resummed through the Tricomi function,
2F0(a, b;; z) = (-1/z)^a U(a, 1 + a - b, -1/z).  The spectral weights a_j
combine gamma factors of conjugate arguments; they are evaluated with the
complex log-gamma and the imaginary residue is checked before being dropped.
"""

import mpmath as mp
import numpy as np
from scipy.special import betaln, gammaln, loggamma

from ..errors import DomainError, NumericError, ParameterError
from .families import FisherSnedecor, PearsonFamily, ReciprocalGamma

IMAG_RESIDUE_TOL = 1e-10
_SERIES_MAX_TERMS = 700


def _hyp2f1_conjugate(a_re, a_im, c, z):
    """2F1(a, conj a; c; z) for real z <= 0; real by conjugate symmetry.

    Plain series below moderate |z|; Pfaff transformation w = z/(z-1)
    otherwise (the transformed series converges for all z < 0).
    """
    if z == 0.0:
        return 1.0
    if z > -0.5:
        term, total = 1.0, 1.0
        for k in range(_SERIES_MAX_TERMS):
            term *= ((a_re + k) ** 2 + a_im * a_im) * z / ((c + k) * (k + 1.0))
            total += term
            if abs(term) <= 1e-17 * abs(total):
                return total
        raise NumericError("2F1 series stalled", {"z": z})
    w = z / (z - 1.0)
    a = complex(a_re, a_im)
    b2 = c - np.conj(a)
    term, total = 1.0 + 0.0j, 1.0 + 0.0j
    for k in range(_SERIES_MAX_TERMS):
        term *= (a + k) * (b2 + k) * w / ((c + k) * (k + 1.0))
        total += term
        if abs(term) <= 1e-17 * abs(total):
            value = (1.0 - z) ** (-a) * total
            return _real_part_checked(value, context="2F1 Pfaff")
    raise NumericError("2F1 Pfaff series stalled", {"z": z})


class ContinuousSpectrumData:
    """Cutoff, discriminant, eigenfunction and weight for one category-II family."""

    def __init__(self, family: PearsonFamily):
        if not isinstance(family, (FisherSnedecor, ReciprocalGamma)):
            raise ParameterError(
                "continuous-spectrum data exist only for the category-II families "
                "(the Student continuous part is served by the Monte Carlo remainder)"
            )
        self.family = family
        self.cutoff = family.spectrum_cutoff()
        self.index = family.continuous_index

    def _check_lambda(self, lam):
        if lam <= self.cutoff:
            raise DomainError(
                f"continuous spectrum starts above the cutoff {self.cutoff:.6g}, got {lam}"
            )

    def delta(self, lam):
        """Discriminant Delta_j(lam) as a complex number (imaginary above the cutoff)."""
        fam = self.family
        if isinstance(fam, FisherSnedecor):
            val = fam.beta ** 2 / 16.0 - lam * (fam.beta - 2.0) / (2.0 * fam.theta)
        else:
            val = 0.25 * (fam.beta ** 2 - 4.0 * lam * (fam.beta - 1.0) / fam.theta)
        return complex(np.sqrt(val)) if val >= 0 else 1j * np.sqrt(-val)

    def eigenfunction(self, x, lam):
        """f_j(x; -lam) for x in E, lam above the cutoff (vectorized in x)."""
        self._check_lambda(lam)
        fam = self.family
        x_arr = np.atleast_1d(np.asarray(x, dtype=float))
        fam._check_in_state_space(x_arr)
        d = self.delta(lam)
        if isinstance(fam, FisherSnedecor):
            a_re, a_im = -fam.beta / 4.0, d.imag
            c = fam.alpha / 2.0
            out = np.empty_like(x_arr)
            for i, xv in enumerate(x_arr):
                z = -fam.alpha * xv / fam.beta
                try:
                    val = _hyp2f1_conjugate(a_re, a_im, c, z)
                except NumericError:
                    ref = mp.hyp2f1(mp.mpc(a_re, a_im), mp.mpc(a_re, -a_im), c, z)
                    val = _real_part_checked(complex(ref), context="2F1")
                out[i] = val
        else:
            a = complex(-fam.beta / 2.0, d.imag)
            b_u = 1.0 + 2j * d.imag
            pref = fam.alpha ** (0.5 * (fam.beta + 1.0))
            out = np.empty_like(x_arr)
            for i, xv in enumerate(x_arr):
                w = fam.alpha / xv
                val = complex(mp.mpf(w) ** mp.mpc(a) * mp.hyperu(mp.mpc(a), mp.mpc(b_u), mp.mpf(w)))
                out[i] = pref * _real_part_checked(val, context="2F0/U")
        return out if np.ndim(x) else float(out[0])

    def weight(self, lam):
        """Spectral weight a_j(lam) >= 0 for lam above the cutoff.

        The gamma-product modulus is multiplied by the Jacobian
        |d(Delta_j^2)/dlam| ((beta-2)/(2 theta) for j=1, (beta-1)/theta for
        j=2): the printed dlam-integrals omit it, which a Stieltjes inversion
        of the resolvent, a Parseval completeness test, and direct Monte
        Carlo all reject by exactly this constant factor.
        """
        self._check_lambda(lam)
        fam = self.family
        d = self.delta(lam)
        pref = (-1j * d).real  # real and positive above the cutoff
        if isinstance(fam, FisherSnedecor):
            pref *= (fam.beta - 2.0) / (2.0 * fam.theta)
            log_mod = (
                0.5 * betaln(0.5 * fam.alpha, 0.5 * fam.beta)
                + loggamma(complex(-fam.beta / 4.0) + d)
                + loggamma(complex(0.5 * fam.alpha + fam.beta / 4.0) + d)
                - loggamma(complex(0.5 * fam.alpha))
                - loggamma(1.0 + 2.0 * d)
            )
        else:
            pref *= (fam.beta - 1.0) / fam.theta
            log_mod = (
                0.5 * gammaln(fam.beta)
                + loggamma(complex(-fam.beta / 2.0) + d)
                - 0.5 * (fam.beta + 1.0) * np.log(fam.alpha)
                - loggamma(1.0 + 2.0 * d)
            )
        return pref * float(np.exp(2.0 * log_mod.real))


def _real_part_checked(value, context=""):
    if abs(value.imag) > IMAG_RESIDUE_TOL * max(1.0, abs(value.real)):
        raise NumericError(
            f"nonreal {context} value where conjugate symmetry promises a real result",
            {"value": value},
        )
    return value.real
