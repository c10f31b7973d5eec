"""Hot numeric kernels: odd theta-series derivative sums and truncated
trivariate polynomial products.

Both kernels exist as numba ``@njit`` scalar loops and as pure-numpy
vectorized fallbacks with identical signatures; :mod:`spincm.backend`
selects which set is exported.
"""

from __future__ import annotations

import numpy as np

from .backend import USING_NUMBA

# Terms are added until |term| < _SERIES_EPS * |partial sum|; the
# coefficient arrays are already truncated the same way at lattice build.
_SERIES_EPS = 1e-17


def _theta_derivs_numpy(u: complex, coef: np.ndarray) -> np.ndarray:
    """Odd theta function and first three u-derivatives at u.

    ``coef[n] = 2*(-1)^n * q**((n+1/2)**2)``; the series is
    sum_n coef[n]*sin((2n+1)u) with derivatives termwise.
    """
    n = np.arange(coef.size)
    k = 2 * n + 1
    ep = np.exp(1j * k * u)
    em = np.exp(-1j * k * u)
    s = (ep - em) / 2j
    c = (ep + em) / 2.0
    out = np.empty(4, dtype=np.complex128)
    out[0] = np.sum(coef * s)
    out[1] = np.sum(coef * k * c)
    out[2] = -np.sum(coef * k * k * s)
    out[3] = -np.sum(coef * k * k * k * c)
    return out


def _jet_mul_numpy(a, b, ia, ib, io, nout):
    out = np.zeros(nout, dtype=np.complex128)
    np.add.at(out, io, a[ia] * b[ib])
    return out


if USING_NUMBA:
    from numba import njit

    @njit(cache=True)
    def _theta_derivs_numba(u, coef):  # pragma: no cover - numba path
        out = np.zeros(4, dtype=np.complex128)
        p = np.exp(1j * u)
        pinv = np.exp(-1j * u)
        p2 = p * p
        m2 = pinv * pinv
        pk = p
        mk = pinv
        for n in range(coef.size):
            k = 2 * n + 1
            s = (pk - mk) / 2j
            c = (pk + mk) / 2.0
            a = coef[n]
            out[0] += a * s
            out[1] += a * k * c
            out[2] -= a * k * k * s
            out[3] -= a * k * k * k * c
            mag = abs(a) * (abs(pk) + abs(mk)) * k * k * k
            if n > 2 and mag < _SERIES_EPS * (abs(out[0]) + abs(out[3])):
                break
            pk *= p2
            mk *= m2
        return out

    @njit(cache=True)
    def _jet_mul_numba(a, b, ia, ib, io, nout):  # pragma: no cover - numba path
        out = np.zeros(nout, dtype=np.complex128)
        for t in range(ia.size):
            out[io[t]] += a[ia[t]] * b[ib[t]]
        return out

    theta_derivs = _theta_derivs_numba
    jet_mul_arrays = _jet_mul_numba
else:
    theta_derivs = _theta_derivs_numpy
    jet_mul_arrays = _jet_mul_numpy
