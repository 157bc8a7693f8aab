"""Driftless Bernstein functions and their Levy data.

Every descriptor fixes a function Phi with representation

    Phi(lam) = int_0^inf (1 - exp(-lam t)) nu(dt),

i.e. killing and drift are both zero and nu has infinite total mass, so the
associated subordinator is a strictly increasing pure-jump process.  The
catalogue kinds carry closed forms for Phi, the Levy density nu(t), the tail
nubar(t) = nu(t, inf) and the integrated tail I(t) = int_0^t nubar(s) ds;
the geometric-stable tail has no elementary form and is served from a
monotone cache built once per descriptor.

All evaluators are pure; descriptors are immutable after construction and
safe for unrestricted concurrent use.
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson, quad
from scipy.special import exp1, gamma, gammainc, gammaincc, gammaln

from ._mittag import ml_neg
from .errors import ParameterError

QUAD_REL_TOL = 1e-8

LONG_RANGE = "long-range"
SHORT_RANGE = "short-range"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class RegularVariation:
    """Small-lambda behaviour of Phi: a regular-variation index in (0,1),
    a finite linear limit Phi(lam)/lam -> l, or unknown (custom kinds)."""

    kind: str  # "index" | "linear" | "unknown"
    value: float | None = None


class BernsteinFunction:
    """Base class; concrete kinds fill in closed forms where they exist."""

    kind = "abstract"

    def phi(self, lam):
        """Phi(lam); accepts nonnegative reals or complex arrays off (-inf,0]."""
        raise NotImplementedError

    def levy_density(self, t):
        raise NotImplementedError

    def levy_tail(self, t):
        """nubar(t) = nu(t, inf), t > 0."""
        t = np.asarray(t, dtype=float)
        if np.any(t <= 0):
            raise ParameterError("levy_tail requires t > 0")
        return self._levy_tail(t)

    def integrated_tail(self, t):
        """I(t) = int_0^t nubar(s) ds, t >= 0."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ParameterError("integrated_tail requires t >= 0")
        return self._integrated_tail(t)

    def regular_variation(self) -> RegularVariation:
        return RegularVariation(UNKNOWN)

    def classify_dependence(self) -> str:
        rv = self.regular_variation()
        if rv.kind == "index":
            return LONG_RANGE
        if rv.kind == "linear":
            return SHORT_RANGE
        return UNKNOWN

    def supports_complex(self) -> bool:
        return True

    def to_json(self) -> str:
        return json.dumps(self._descriptor())

    def _descriptor(self) -> dict:
        return {"kind": self.kind}

    def __repr__(self):
        return f"{type(self).__name__}({self._descriptor()})"


def _check_alpha(alpha):
    if not (isinstance(alpha, (int, float)) and 0.0 < alpha < 1.0):
        raise ParameterError(f"alpha must lie in (0,1), got {alpha!r}")
    return float(alpha)


class StableBernstein(BernsteinFunction):
    """Phi(lam) = lam^alpha (alpha-stable subordinator)."""

    kind = "stable"

    def __init__(self, alpha):
        self.alpha = _check_alpha(alpha)

    def phi(self, lam):
        return np.asarray(lam) ** self.alpha

    def levy_density(self, t):
        a = self.alpha
        return a * np.asarray(t, float) ** (-1.0 - a) / gamma(1.0 - a)

    def _levy_tail(self, t):
        a = self.alpha
        return t ** (-a) / gamma(1.0 - a)

    def _integrated_tail(self, t):
        a = self.alpha
        return t ** (1.0 - a) / gamma(2.0 - a)

    def regular_variation(self):
        return RegularVariation("index", self.alpha)

    def _descriptor(self):
        return {"kind": self.kind, "alpha": self.alpha}


class TemperedStableBernstein(BernsteinFunction):
    """Phi(lam) = (lam + theta)^alpha - theta^alpha."""

    kind = "tempered_stable"

    def __init__(self, alpha, theta):
        self.alpha = _check_alpha(alpha)
        if not (isinstance(theta, (int, float)) and theta > 0):
            raise ParameterError(f"theta must be > 0, got {theta!r}")
        self.theta = float(theta)

    def phi(self, lam):
        return (np.asarray(lam) + self.theta) ** self.alpha - self.theta ** self.alpha

    def levy_density(self, t):
        a = self.alpha
        t = np.asarray(t, float)
        return a * t ** (-1.0 - a) * np.exp(-self.theta * t) / gamma(1.0 - a)

    def _levy_tail(self, t):
        # int_t^inf a s^(-1-a) e^(-th s) ds / Gamma(1-a), via upper incomplete gamma
        a, th = self.alpha, self.theta
        u = th * t
        return (t ** (-a) * np.exp(-u) - th ** a * gamma(1.0 - a) * gammaincc(1.0 - a, u)) / gamma(1.0 - a)

    def _integrated_tail(self, t):
        # I(t) = int_0^t s nu(s) ds + t nubar(t); the first term is a lower
        # incomplete gamma in th*t
        a, th = self.alpha, self.theta
        t = np.asarray(t, float)
        out = np.zeros_like(t)
        pos = t > 0
        tp = t[pos]
        head = a * th ** (a - 1.0) * gammainc(1.0 - a, th * tp)
        out[pos] = head + tp * self._levy_tail(tp)
        return out

    def regular_variation(self):
        return RegularVariation("linear", self.alpha * self.theta ** (self.alpha - 1.0))

    def _descriptor(self):
        return {"kind": self.kind, "alpha": self.alpha, "theta": self.theta}


class GammaBernstein(BernsteinFunction):
    """Phi(lam) = log(1 + lam) (Gamma subordinator)."""

    kind = "gamma"

    def phi(self, lam):
        return np.log(1.0 + np.asarray(lam))

    def levy_density(self, t):
        t = np.asarray(t, float)
        return np.exp(-t) / t

    def _levy_tail(self, t):
        return exp1(t)

    def _integrated_tail(self, t):
        t = np.asarray(t, float)
        out = np.zeros_like(t)
        pos = t > 0
        tp = t[pos]
        out[pos] = tp * exp1(tp) + 1.0 - np.exp(-tp)
        return out

    def regular_variation(self):
        return RegularVariation("linear", 1.0)


class GeometricStableBernstein(BernsteinFunction):
    """Phi(lam) = log(1 + lam^alpha) (geometric alpha-stable subordinator).

    nu(t) = alpha t^(-1) E_alpha(-t^alpha); the tail and integrated tail are
    non-elementary and are cached on a log grid with monotone interpolation,
    because they sit inside time-stepping loops.
    """

    kind = "geometric_stable"

    _GRID_LO, _GRID_HI, _GRID_N = 1e-12, 1e5, 4096

    def __init__(self, alpha):
        self.alpha = _check_alpha(alpha)
        self._cache = None

    def phi(self, lam):
        return np.log(1.0 + np.asarray(lam) ** self.alpha)

    def levy_density(self, t):
        t = np.asarray(t, float)
        return self.alpha * ml_neg(t ** self.alpha, self.alpha) / t

    def _build_cache(self):
        from scipy.interpolate import PchipInterpolator

        a = self.alpha
        s = np.geomspace(self._GRID_LO, self._GRID_HI, self._GRID_N)
        logs = np.log(s)
        e_vals = ml_neg(s ** a, a)
        # nubar(t) = int_{t}^{inf} a E_a(-s^a) dlog s ; analytic remainder past
        # the grid from E_a(-u) ~ u^(-1)/Gamma(1-a) - u^(-2)/Gamma(1-2a)
        cum = cumulative_simpson(a * e_vals, x=logs, initial=0.0)
        hi = self._GRID_HI ** a
        rem = hi ** (-1.0) / gamma(1.0 - a)
        if abs(1.0 - 2.0 * a) > 1e-12:
            rem -= hi ** (-2.0) / (2.0 * gamma(1.0 - 2.0 * a))
        nubar = (cum[-1] - cum) + rem
        icum = cumulative_simpson(nubar * s, x=logs, initial=0.0)
        # below the grid nubar(s) ~ -a log s + C
        c0 = nubar[0] + a * logs[0]
        left = s[0] * (c0 + a - a * logs[0])
        itail = icum + left
        self._cache = (
            PchipInterpolator(logs, nubar, extrapolate=False),
            PchipInterpolator(logs, itail, extrapolate=False),
            c0,
        )

    def _levy_tail(self, t):
        if self._cache is None:
            self._build_cache()
        interp, _, c0 = self._cache
        t = np.atleast_1d(np.asarray(t, float))
        out = np.empty_like(t)
        inside = (t >= self._GRID_LO) & (t <= self._GRID_HI)
        out[inside] = interp(np.log(t[inside]))
        small = t < self._GRID_LO
        out[small] = c0 - self.alpha * np.log(t[small])
        big = t > self._GRID_HI
        if np.any(big):
            out[big] = t[big] ** (-self.alpha) / gamma(1.0 - self.alpha)
        return out if out.size > 1 else out.reshape(())

    def _integrated_tail(self, t):
        if self._cache is None:
            self._build_cache()
        _, interp, c0 = self._cache
        t = np.atleast_1d(np.asarray(t, float))
        out = np.zeros_like(t)
        inside = (t >= self._GRID_LO) & (t <= self._GRID_HI)
        out[inside] = interp(np.log(t[inside]))
        small = (t > 0) & (t < self._GRID_LO)
        ts = t[small]
        out[small] = ts * (c0 + self.alpha - self.alpha * np.log(ts))
        big = t > self._GRID_HI
        if np.any(big):
            ref = interp(np.log(self._GRID_HI))
            for i in np.nonzero(big)[0]:
                out[i] = ref + quad(lambda s: float(self._levy_tail(np.array(s))), self._GRID_HI, t[i])[0]
        return out if out.size > 1 else out.reshape(())

    def regular_variation(self):
        return RegularVariation("index", self.alpha)

    def _descriptor(self):
        return {"kind": self.kind, "alpha": self.alpha}


class CustomBernstein(BernsteinFunction):
    """User-supplied positive Levy density on (0, inf).

    Phi is evaluated through the Levy-Khintchine integral (real lam only);
    the tail and integrated tail use adaptive quadrature at relative
    tolerance 1e-8 unless the caller supplies them.
    """

    kind = "custom"

    def __init__(self, levy_density, levy_tail=None, integrated_tail=None):
        if not callable(levy_density):
            raise ParameterError("levy_density must be callable")
        self._density = levy_density
        self._tail = levy_tail
        self._itail = integrated_tail

    def supports_complex(self):
        return False

    def levy_density(self, t):
        return self._density(t)

    def phi(self, lam):
        lam_arr = np.atleast_1d(np.asarray(lam, dtype=float))
        out = np.empty_like(lam_arr)
        for i, lv in enumerate(lam_arr):
            if lv == 0.0:
                out[i] = 0.0
                continue
            val, _ = quad(
                lambda t: -np.expm1(-lv * t) * self._density(t),
                0.0,
                np.inf,
                epsrel=QUAD_REL_TOL,
                limit=400,
            )
            out[i] = val
        return out if np.ndim(lam) else float(out[0])

    def _levy_tail(self, t):
        if self._tail is not None:
            return np.asarray(self._tail(t), dtype=float)
        t_arr = np.atleast_1d(np.asarray(t, float))
        out = np.empty_like(t_arr)
        for i, tv in enumerate(t_arr):
            out[i] = quad(self._density, tv, np.inf, epsrel=QUAD_REL_TOL, limit=400)[0]
        return out if np.ndim(t) else out.reshape(())

    def _integrated_tail(self, t):
        if self._itail is not None:
            return np.asarray(self._itail(t), dtype=float)
        t_arr = np.atleast_1d(np.asarray(t, float))
        out = np.empty_like(t_arr)
        for i, tv in enumerate(t_arr):
            if tv == 0.0:
                out[i] = 0.0
            else:
                out[i] = quad(
                    lambda s: float(self._levy_tail(np.array(s))),
                    0.0,
                    tv,
                    epsrel=QUAD_REL_TOL,
                    limit=400,
                )[0]
        return out if np.ndim(t) else out.reshape(())


_KINDS = {
    "stable": (StableBernstein, ("alpha",)),
    "tempered_stable": (TemperedStableBernstein, ("alpha", "theta")),
    "geometric_stable": (GeometricStableBernstein, ("alpha",)),
    "gamma": (GammaBernstein, ()),
}


def from_descriptor(desc: dict) -> BernsteinFunction:
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ParameterError(f"bad Bernstein descriptor: {desc!r}")
    kind = desc["kind"]
    if kind not in _KINDS:
        raise ParameterError(f"unknown Bernstein kind {kind!r}")
    cls, fields = _KINDS[kind]
    extra = set(desc) - {"kind", *fields}
    if extra:
        raise ParameterError(f"unexpected keys {sorted(extra)} for kind {kind!r}")
    missing = [f for f in fields if f not in desc]
    if missing:
        raise ParameterError(f"missing keys {missing} for kind {kind!r}")
    return cls(**{f: desc[f] for f in fields})


def from_json(text: str) -> BernsteinFunction:
    return from_descriptor(json.loads(text))
