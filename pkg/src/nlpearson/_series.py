"""Numba kernel for category-I spectral series.

Sums m-weighted series sum_n w_n Q_n(x) Q_n(x0) where Q_n follows the
orthonormal three-term recurrence of the family (coefficients generated
in-loop, so tens of millions of terms never materialize arrays) and

    w_n = head[n]                            n < len(head)
    w_n = c1 / lam_n + c2 / lam_n^2          otherwise,

the tail surrogate being the Watson expansion of the relaxation function,
E(t; -lam) = nubar(t)/lam - w2(t)/lam^2 + O(lam^-3).  The kernel also
tracks max_n max_i n^p |w_n Q_n(x_i) Q_n(x0)| over the trailing half of the
index range, which calibrates the Lemma-type tail bound C n^{-p}.
"""

import numpy as np
from numba import njit

FAMILY_OU = 0
FAMILY_CIR = 1
FAMILY_JACOBI = 2


@njit(cache=True)
def series_sum(fam, p1, p2, xs, m_x, x0, head, c1, c2, lam1, lam2, n_total, p_decay):
    """Returns (sums, env); env is the empirical tail-bound constant in
    density units (terms weighted by m(x_i))."""
    nx = xs.shape[0]
    out = np.zeros(nx)
    qm = np.zeros(nx)
    qc = np.ones(nx)
    q0m = 0.0
    q0c = 1.0
    env = 0.0
    n_head = head.shape[0]
    win = n_total // 2
    for n in range(n_total + 1):
        if n < n_head:
            w = head[n]
        else:
            lam = lam1 * n + lam2 * n * n
            w = c1 / lam + c2 / (lam * lam)
        big = 0.0
        for i in range(nx):
            term = w * qc[i] * q0c
            out[i] += term
            a = abs(term) * m_x[i]
            if a > big:
                big = a
        if n >= win and n > 0:
            e = big * n ** p_decay
            if e > env:
                env = e
        # advance the orthonormal recurrence
        if fam == 0:
            a_n = p1
            b_n = p2 * np.sqrt(n)
            b_np = p2 * np.sqrt(n + 1.0)
        elif fam == 1:
            a_n = (2.0 * n + p2) / p1
            b_n = np.sqrt(n * (n + p2 - 1.0)) / p1
            b_np = np.sqrt((n + 1.0) * (n + p2)) / p1
        else:
            s = p1 + p2
            if n == 0:
                a_n = (p2 - p1) / (s + 2.0)
            else:
                a_n = (p2 * p2 - p1 * p1) / ((2.0 * n + s) * (2.0 * n + s + 2.0))
            if n == 0:
                b_n = 0.0
            elif n == 1:
                b_n = np.sqrt(4.0 * (p1 + 1.0) * (p2 + 1.0) / ((s + 2.0) ** 2 * (s + 3.0)))
            else:
                b_n = np.sqrt(
                    4.0 * n * (n + p1) * (n + p2) * (n + s)
                    / ((2.0 * n + s) ** 2 * (2.0 * n + s + 1.0) * (2.0 * n + s - 1.0))
                )
            npp = n + 1.0
            b_np = np.sqrt(
                4.0 * npp * (npp + p1) * (npp + p2) * (npp + s)
                / ((2.0 * npp + s) ** 2 * (2.0 * npp + s + 1.0) * (2.0 * npp + s - 1.0))
            )
        for i in range(nx):
            t = ((xs[i] - a_n) * qc[i] - b_n * qm[i]) / b_np
            qm[i] = qc[i]
            qc[i] = t
        t0 = ((x0 - a_n) * q0c - b_n * q0m) / b_np
        q0m = q0c
        q0c = t0
    return out, env
