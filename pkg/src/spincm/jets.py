"""Truncated trivariate Taylor arithmetic (jets) in the three coordinates.

A jet stores the coefficients c_a = d^a f / a! for all multi-indices a
with |a| <= degree, about a fixed base point, in graded-lex order.  Sums
and products close at the minimum operand degree; differentiation lowers
the degree by the order taken.  Dense storage: degree 6 has C(9,3) = 84
coefficients, so index tables beat anything sparse.

The product inner loop runs through :func:`spincm.kernels.jet_mul_arrays`
(numba or numpy per the backend flag).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import elliptic as el
from .kernels import jet_mul_arrays


class JetError(ValueError):
    pass


def _multi_indices(degree: int) -> list[tuple[int, int, int]]:
    out = []
    for total in range(degree + 1):
        for a1 in range(total, -1, -1):
            for a2 in range(total - a1, -1, -1):
                out.append((a1, a2, total - a1 - a2))
    return out


@dataclass(frozen=True)
class _Tables:
    midx: np.ndarray           # (N, 3) int
    pos: dict                  # multi-index tuple -> flat position
    mul_ia: np.ndarray
    mul_ib: np.ndarray
    mul_io: np.ndarray
    dsrc: tuple[np.ndarray, ...]   # per direction: source positions in degree D
    dfac: tuple[np.ndarray, ...]   # per direction: multiplicity (a_i + 1)
    multinom: np.ndarray       # |a|! / (a1! a2! a3!)
    degsum: np.ndarray         # |a| per position


_CACHE: dict[int, _Tables] = {}
_PERM_CACHE: dict[tuple, np.ndarray] = {}


def _tables(degree: int) -> _Tables:
    if degree < 0:
        raise JetError(f"negative jet degree {degree}")
    tab = _CACHE.get(degree)
    if tab is not None:
        return tab
    midx = _multi_indices(degree)
    pos = {a: i for i, a in enumerate(midx)}
    trips = []
    for ia, a in enumerate(midx):
        for ib, b in enumerate(midx):
            s = (a[0] + b[0], a[1] + b[1], a[2] + b[2])
            if s[0] + s[1] + s[2] <= degree:
                trips.append((ia, ib, pos[s]))
    trips = np.array(trips, dtype=np.int64).reshape(-1, 3)
    dsrc, dfac = [], []
    if degree > 0:
        lower = _multi_indices(degree - 1)
        for i in range(3):
            src = np.empty(len(lower), dtype=np.int64)
            fac = np.empty(len(lower), dtype=np.float64)
            for j, b in enumerate(lower):
                bp = list(b)
                bp[i] += 1
                src[j] = pos[tuple(bp)]
                fac[j] = b[i] + 1
            dsrc.append(src)
            dfac.append(fac)
    else:
        dsrc = [np.empty(0, dtype=np.int64)] * 3
        dfac = [np.empty(0, dtype=np.float64)] * 3
    multinom = np.array(
        [math.factorial(sum(a)) // (math.factorial(a[0]) * math.factorial(a[1]) * math.factorial(a[2]))
         for a in midx],
        dtype=np.float64,
    )
    degsum = np.array([sum(a) for a in midx], dtype=np.int64)
    tab = _Tables(
        midx=np.array(midx, dtype=np.int64), pos=pos,
        mul_ia=np.ascontiguousarray(trips[:, 0]),
        mul_ib=np.ascontiguousarray(trips[:, 1]),
        mul_io=np.ascontiguousarray(trips[:, 2]),
        dsrc=tuple(dsrc), dfac=tuple(dfac),
        multinom=multinom, degsum=degsum,
    )
    _CACHE[degree] = tab
    return tab


def _perm_table(degree: int, perm: tuple[int, int, int]) -> np.ndarray:
    key = (degree, perm)
    cached = _PERM_CACHE.get(key)
    if cached is not None:
        return cached
    tab = _tables(degree)
    idx = np.empty(len(tab.midx), dtype=np.int64)
    for j, b in enumerate(tab.midx):
        # coefficient of the relabeled field at b is read off at b composed
        # with the permutation (chain rule through the coordinate relabel)
        gamma = tuple(b[perm[i] - 1] for i in range(3))
        idx[j] = tab.pos[gamma]
    _PERM_CACHE[key] = idx
    return idx


class Jet:
    """Truncated Taylor expansion of a scalar field about a 3-point."""

    __slots__ = ("base", "degree", "coeffs")

    def __init__(self, base, degree: int, coeffs: np.ndarray | None = None):
        self.base = tuple(complex(b) for b in base)
        self.degree = int(degree)
        n = len(_tables(self.degree).midx)
        if coeffs is None:
            self.coeffs = np.zeros(n, dtype=np.complex128)
        else:
            if len(coeffs) != n:
                raise JetError(f"coefficient count {len(coeffs)} != {n} for degree {degree}")
            self.coeffs = np.asarray(coeffs, dtype=np.complex128)

    @property
    def value(self) -> complex:
        return complex(self.coeffs[0])

    def copy(self) -> "Jet":
        return Jet(self.base, self.degree, self.coeffs.copy())

    def truncate(self, degree: int) -> "Jet":
        if degree == self.degree:
            return self
        if degree > self.degree:
            raise JetError(f"cannot extend degree {self.degree} jet to {degree}")
        n = len(_tables(degree).midx)
        return Jet(self.base, degree, self.coeffs[:n].copy())

    def _coerce(self, other: "Jet") -> tuple["Jet", "Jet"]:
        if self.base != other.base:
            raise JetError(f"base point mismatch: {self.base} vs {other.base}")
        d = min(self.degree, other.degree)
        return self.truncate(d), other.truncate(d)

    def __add__(self, other):
        if isinstance(other, Jet):
            a, b = self._coerce(other)
            return Jet(a.base, a.degree, a.coeffs + b.coeffs)
        out = self.copy()
        out.coeffs[0] += complex(other)
        return out

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Jet):
            a, b = self._coerce(other)
            return Jet(a.base, a.degree, a.coeffs - b.coeffs)
        out = self.copy()
        out.coeffs[0] -= complex(other)
        return out

    def __rsub__(self, other):
        return (-self) + other

    def __neg__(self):
        return Jet(self.base, self.degree, -self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b = self._coerce(other)
            tab = _tables(a.degree)
            out = jet_mul_arrays(a.coeffs, b.coeffs, tab.mul_ia, tab.mul_ib, tab.mul_io,
                                 len(tab.midx))
            return Jet(a.base, a.degree, out)
        return Jet(self.base, self.degree, self.coeffs * complex(other))

    __rmul__ = __mul__

    def partial(self, direction: int, times: int = 1) -> "Jet":
        """Exact derivative d^times/dx_direction of the truncated polynomial."""
        if not 0 <= direction <= 2:
            raise JetError(f"direction {direction} not in 0..2")
        if times < 0 or times > self.degree:
            raise JetError(f"cannot take {times} derivatives of a degree-{self.degree} jet")
        cur = self
        for _ in range(times):
            tab = _tables(cur.degree)
            out = cur.coeffs[tab.dsrc[direction]] * tab.dfac[direction]
            cur = Jet(cur.base, cur.degree - 1, out)
        return cur

    def permute_coords(self, perm: tuple[int, int, int]) -> "Jet":
        """The jet of g(x) = f(x_perm[1], x_perm[2], x_perm[3]) (1-based).

        g expanded about y0 reads f at y0 composed with perm, so the new
        base is the inverse relabeling of the old one.
        """
        idx = _perm_table(self.degree, perm)
        inv = [0, 0, 0]
        for j in range(3):
            inv[perm[j] - 1] = j
        new_base = tuple(self.base[inv[i]] for i in range(3))
        return Jet(new_base, self.degree, self.coeffs[idx].copy())

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0

    def __repr__(self):
        return f"Jet(degree={self.degree}, value={self.value:.6g}, base={self.base})"


# Function-style aliases for the method operations.

def jet_add(a: Jet, b) -> Jet:
    return a + b


def jet_mul(a: Jet, b) -> Jet:
    return a * b


def jet_scale(a: Jet, s: complex) -> Jet:
    return a * s


def jet_partial(a: Jet, direction: int, times: int = 1) -> Jet:
    return a.partial(direction, times)


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def jet_constant(value: complex, base, degree: int) -> Jet:
    out = Jet(base, degree)
    out.coeffs[0] = complex(value)
    return out


def jet_coordinate(direction: int, base, degree: int) -> Jet:
    """The coordinate function x_direction (0-based) as a jet."""
    out = Jet(base, degree)
    out.coeffs[0] = complex(base[direction])
    if degree >= 1:
        e = [0, 0, 0]
        e[direction] = 1
        out.coeffs[_tables(degree).pos[tuple(e)]] = 1.0
    return out


_PAIR_SIGNS = {
    (1, 2): (1, -1, 0), (2, 1): (-1, 1, 0),
    (2, 3): (0, 1, -1), (3, 2): (0, -1, 1),
    (3, 1): (-1, 0, 1), (1, 3): (1, 0, -1),
}


def lift_univariate(taylor, pair: tuple[int, int], base, degree: int) -> Jet:
    """Jet of g(x_j - x_k) from the univariate Taylor coefficients of g.

    The chain rule through the linear map u = x_j - x_k turns coefficient
    c_m into c_m * multinomial(a) * (+1)^(a_j) * (-1)^(a_k) on each
    multi-index a supported on the pair.
    """
    signs = _PAIR_SIGNS[pair]
    tab = _tables(degree)
    out = Jet(base, degree)
    for idx, a in enumerate(tab.midx):
        sg = 1.0
        dead = False
        for ai, si in zip(a, signs):
            if ai:
                if si == 0:
                    dead = True
                    break
                if si < 0 and ai % 2:
                    sg = -sg
        if dead:
            continue
        tot = int(tab.degsum[idx])
        out.coeffs[idx] = taylor[tot] * tab.multinom[idx] * sg
    return out


def lift_pair_function(kind: str, pair: tuple[int, int], shift: complex,
                       lat: el.Lattice, base, degree: int) -> Jet:
    """Jet of an elliptic-kernel function of x_j - x_k.

    kind in {"wp", "wp_prime", "zeta", "sigma"}: the function evaluated at
    x_j - x_k + shift.  kind "f" is the two-point ratio
    sigma(x_jk + shift)/(sigma(x_jk) sigma(shift)) with `shift` playing the
    role of the spectral parameter.
    """
    u = base[pair[0] - 1] - base[pair[1] - 1] + (0j if kind == "f" else complex(shift))
    if kind == "wp":
        tay = el.taylor_from_derivs(el.wp_derivative_list(u, lat, degree))
    elif kind == "wp_prime":
        d = el.wp_derivative_list(u, lat, degree + 1)
        tay = el.taylor_from_derivs(d[1:])
    elif kind == "zeta":
        tay = el.taylor_from_derivs(el.zeta_derivative_list(u, lat, degree))
    elif kind == "sigma":
        tay = el.taylor_from_derivs(el.sigma_derivative_list(u, lat, degree))
    elif kind == "f":
        alpha = complex(shift)
        ratio = el.sigma_ratio_taylor(u, alpha, lat, degree)
        s_alpha = el.sigma_w(alpha, lat)
        tay = [c / s_alpha for c in ratio]
    else:
        raise JetError(f"unknown pair-function kind {kind!r}")
    return lift_univariate(tay, pair, base, degree)


def lift_exponential(kvec, base, degree: int) -> Jet:
    """Jet of exp(k1 x1 + k2 x2 + k3 x3)."""
    tab = _tables(degree)
    out = Jet(base, degree)
    e0 = np.exp(sum(complex(k) * complex(b) for k, b in zip(kvec, base)))
    k1, k2, k3 = (complex(k) for k in kvec)
    for idx, a in enumerate(tab.midx):
        fac = math.factorial(a[0]) * math.factorial(a[1]) * math.factorial(a[2])
        out.coeffs[idx] = e0 * (k1 ** a[0]) * (k2 ** a[1]) * (k3 ** a[2]) / fac
    return out
