"""Weierstrass elliptic functions on an arbitrary complex lattice.

Production evaluation goes through the odd-theta q-series after reducing
the argument into the fundamental cell; the quasi-periodicity multipliers
are restored exactly.  Derivative jets at a point are generated from the
algebraic ODE of wp (never finite differences).  Truncated lattice sums
live in :mod:`spincm.oracles` and are used only for verification.

Conventions: periods are ``2*omega1`` and ``2*omega2``; ``tau =
omega2/omega1`` is normalized to the upper half plane; ``q =
exp(i*pi*tau)``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import theta_derivs

PI = math.pi

# Below this fraction of |omega1| a meromorphic evaluation point counts as
# a pole; cancellation destroys all digits well before this.
POLE_GUARD = 1e-12

# q-series terms are added until the last one is below 1e-16 of the sum.
SERIES_TOL = 1e-16
SERIES_CAP = 200

# Largest supported derivative order for the point jets.
D_MAX = 24


class LatticeError(ValueError):
    """Raised for degenerate or unusable period pairs."""


class PoleError(ValueError):
    """Evaluation too close to a lattice point of a meromorphic function."""

    def __init__(self, z: complex, lattice_point: complex):
        super().__init__(f"argument {z} within pole guard of lattice point {lattice_point}")
        self.z = z
        self.lattice_point = lattice_point


@dataclass(frozen=True, eq=False)
class Lattice:
    """Period pair with precomputed evaluation context.

    Immutable after construction; every evaluator is a pure function of
    (z, Lattice), safe for concurrent read-only use.
    """

    omega1: complex
    omega2: complex
    eta1: complex
    eta2: complex
    g2: complex
    g3: complex
    q: complex
    theta_coef: np.ndarray = field(repr=False)
    t1p: complex = field(repr=False)        # theta1'(0)
    red_inv: np.ndarray = field(repr=False)  # maps (Re z, Im z) -> cell coords

    @property
    def pole_radius(self) -> float:
        return POLE_GUARD * abs(self.omega1)


def _theta_coefficients(q: complex) -> np.ndarray:
    coef = []
    for n in range(SERIES_CAP):
        c = 2.0 * (-1) ** n * q ** ((n + 0.5) ** 2)
        coef.append(c)
        if n > 1 and abs(c) < SERIES_TOL * abs(coef[0]):
            return np.array(coef, dtype=np.complex128)
    raise LatticeError(f"theta series did not converge in {SERIES_CAP} terms (|q|={abs(q):.4f})")


def _eisenstein_weights(q: complex) -> tuple[complex, complex]:
    """E4 and E6 from the divisor-sum q-series in Q = q**2."""
    Q = q * q
    e4 = 1.0 + 0j
    e6 = 1.0 + 0j
    Qn = 1.0 + 0j
    for n in range(1, SERIES_CAP):
        Qn *= Q
        s3 = 0
        s5 = 0
        for d in range(1, n + 1):
            if n % d == 0:
                s3 += d**3
                s5 += d**5
        e4 += 240.0 * s3 * Qn
        e6 -= 504.0 * s5 * Qn
        if abs(Qn) * n**5 < SERIES_TOL:
            return e4, e6
    raise LatticeError(
        f"invariant series did not converge in {SERIES_CAP} terms "
        f"(|q|={abs(q):.3f}; the period ratio is too extreme)"
    )


def lattice_new(omega1: complex, omega2: complex) -> Lattice:
    """Build the evaluation context for the period pair (2*omega1, 2*omega2).

    The pair is normalized so Im(omega2/omega1) > 0 (omega2 is negated when
    needed); collinear or zero periods are rejected.
    """
    omega1 = complex(omega1)
    omega2 = complex(omega2)
    if omega1 == 0 or omega2 == 0:
        raise LatticeError("zero period")
    tau = omega2 / omega1
    if abs(tau.imag) < 1e-12 * abs(tau):
        raise LatticeError(f"degenerate (collinear) periods: Im(omega2/omega1) = {tau.imag:.3e}")
    if tau.imag < 0:
        omega2 = -omega2
        tau = -tau

    q = cmath.exp(1j * PI * tau)
    coef = _theta_coefficients(q)

    th0 = theta_derivs(0.0 + 0j, coef)
    t1p, t1ppp = th0[1], th0[3]
    eta1 = -(PI**2 / (12.0 * omega1)) * (t1ppp / t1p)

    e4, e6 = _eisenstein_weights(q)
    g2 = (PI**4 / (12.0 * omega1**4)) * e4
    g3 = (PI**6 / (216.0 * omega1**6)) * e6

    # Cell coordinates: z = a*(2 omega1) + b*(2 omega2) with real a, b.
    w1, w2 = 2 * omega1, 2 * omega2
    mat = np.array([[w1.real, w2.real], [w1.imag, w2.imag]], dtype=float)
    red_inv = np.linalg.inv(mat)

    lat = Lattice(
        omega1=omega1, omega2=omega2, eta1=eta1, eta2=0j,
        g2=g2, g3=g3, q=q, theta_coef=coef, t1p=t1p, red_inv=red_inv,
    )
    # eta2 from a direct zeta evaluation at omega2 (needs only eta1), so the
    # Legendre relation stays an independent consistency check.
    eta2 = _eta2_bootstrap(lat)
    object.__setattr__(lat, "eta2", eta2)
    return lat


def reduce_to_cell(z: complex, lat: Lattice) -> tuple[complex, int, int]:
    """Split z = z0 + 2*m*omega1 + 2*n*omega2 with z0 in the centered cell."""
    ab = lat.red_inv @ (z.real, z.imag)
    m = int(round(ab[0]))
    n = int(round(ab[1]))
    return z - 2 * m * lat.omega1 - 2 * n * lat.omega2, m, n


def lattice_point_near(z: complex, lat: Lattice, radius: float | None = None) -> complex | None:
    """The lattice point within `radius` of z, or None."""
    z0, m, n = reduce_to_cell(z, lat)
    r = lat.pole_radius if radius is None else radius
    if abs(z0) <= r:
        return 2 * m * lat.omega1 + 2 * n * lat.omega2
    return None


def _theta_at(z0: complex, lat: Lattice) -> np.ndarray:
    u = PI * z0 / (2.0 * lat.omega1)
    return theta_derivs(u, lat.theta_coef)


def _eta2_bootstrap(lat: Lattice) -> complex:
    """zeta(omega2) while lat.eta2 is still a placeholder.

    omega2 sits on the cell boundary (second reduction coordinate exactly
    1/2), where a rounding tie could pick a shift by 2*omega2 whose
    multiplier needs the yet-unknown eta2.  Reducing along omega1 only is
    always safe: the theta argument stays inside the convergence strip
    and the shift multiplier needs only eta1.
    """
    ab = lat.red_inv @ (lat.omega2.real, lat.omega2.imag)
    m = int(round(ab[0]))
    z0 = lat.omega2 - 2 * m * lat.omega1
    th = _theta_at(z0, lat)
    c = PI / (2.0 * lat.omega1)
    return lat.eta1 * z0 / lat.omega1 + c * th[1] / th[0] + 2 * m * lat.eta1


def _require_off_lattice(z: complex, lat: Lattice) -> tuple[complex, int, int]:
    z0, m, n = reduce_to_cell(z, lat)
    if abs(z0) <= lat.pole_radius:
        raise PoleError(z, 2 * m * lat.omega1 + 2 * n * lat.omega2)
    return z0, m, n


def sigma_w(z: complex, lat: Lattice) -> complex:
    """Weierstrass sigma (entire; odd, sigma(z) ~ z near 0)."""
    z0, m, n = reduce_to_cell(z, lat)
    th = _theta_at(z0, lat)
    base = (2.0 * lat.omega1 / PI) * cmath.exp(lat.eta1 * z0 * z0 / (2.0 * lat.omega1)) * th[0] / lat.t1p
    if m == 0 and n == 0:
        return base
    # sigma(z0 + Om) = (-1)^(m+n+mn) exp(etaOm*(z0 + Om/2)) sigma(z0)
    om = 2 * m * lat.omega1 + 2 * n * lat.omega2
    eta_om = 2 * m * lat.eta1 + 2 * n * lat.eta2
    sign = -1.0 if (m + n + m * n) % 2 else 1.0
    return sign * cmath.exp(eta_om * (z0 + om / 2.0)) * base


def zeta_w(z: complex, lat: Lattice) -> complex:
    """Weierstrass zeta (odd; simple poles on the lattice; zeta' = -wp)."""
    z0, m, n = _require_off_lattice(z, lat)
    th = _theta_at(z0, lat)
    c = PI / (2.0 * lat.omega1)
    return lat.eta1 * z0 / lat.omega1 + c * th[1] / th[0] + 2 * m * lat.eta1 + 2 * n * lat.eta2


def wp(z: complex, lat: Lattice) -> complex:
    """Weierstrass pe function (even, doubly periodic, double poles)."""
    z0, _, _ = _require_off_lattice(z, lat)
    th = _theta_at(z0, lat)
    c = PI / (2.0 * lat.omega1)
    g1 = th[1] / th[0]
    return -lat.eta1 / lat.omega1 - c * c * (th[2] / th[0] - g1 * g1)


def wp_prime(z: complex, lat: Lattice) -> complex:
    """Derivative of wp (odd)."""
    z0, _, _ = _require_off_lattice(z, lat)
    th = _theta_at(z0, lat)
    c = PI / (2.0 * lat.omega1)
    g1 = th[1] / th[0]
    g2r = th[2] / th[0]
    g3r = th[3] / th[0]
    return -(c**3) * (g3r - 3.0 * g1 * g2r + 2.0 * g1**3)


def sigma_log(z: complex, lat: Lattice) -> complex:
    """One branch of log sigma(z).

    The quasi-periodicity multipliers grow like exp(quadratic) in the
    number of cells traversed; summing exponents keeps ratios of sigmas
    finite long after the factors themselves overflow.  The imaginary
    part is branch-arbitrary; only use this inside exp of differences.
    """
    z0, m, n = _require_off_lattice(z, lat)
    th = _theta_at(z0, lat)
    out = cmath.log((2.0 * lat.omega1 / PI) * th[0] / lat.t1p)
    out += lat.eta1 * z0 * z0 / (2.0 * lat.omega1)
    if m or n:
        om = 2 * m * lat.omega1 + 2 * n * lat.omega2
        eta_om = 2 * m * lat.eta1 + 2 * n * lat.eta2
        out += eta_om * (z0 + om / 2.0)
        if (m + n + m * n) % 2:
            out += 1j * PI
    return out


def weier_eval(z: complex, lat: Lattice) -> tuple[complex, complex, complex, complex]:
    """Fused (sigma, zeta, wp, wp') at z from a single theta evaluation."""
    z0, m, n = _require_off_lattice(z, lat)
    th = _theta_at(z0, lat)
    c = PI / (2.0 * lat.omega1)
    g1 = th[1] / th[0]
    g2r = th[2] / th[0]
    g3r = th[3] / th[0]
    sig = (2.0 * lat.omega1 / PI) * cmath.exp(lat.eta1 * z0 * z0 / (2.0 * lat.omega1)) * th[0] / lat.t1p
    if m or n:
        om = 2 * m * lat.omega1 + 2 * n * lat.omega2
        eta_om = 2 * m * lat.eta1 + 2 * n * lat.eta2
        sign = -1.0 if (m + n + m * n) % 2 else 1.0
        sig = sign * cmath.exp(eta_om * (z0 + om / 2.0)) * sig
        zet = lat.eta1 * z0 / lat.omega1 + c * g1 + eta_om
    else:
        zet = lat.eta1 * z0 / lat.omega1 + c * g1
    wpv = -lat.eta1 / lat.omega1 - c * c * (g2r - g1 * g1)
    wppv = -(c**3) * (g3r - 3.0 * g1 * g2r + 2.0 * g1**3)
    return sig, zet, wpv, wppv


# ---------------------------------------------------------------------------
# Derivative jets at a point.
#
# wp'' = 6 wp^2 - g2/2, so repeated Leibniz differentiation generates every
# higher derivative from (wp, wp'):  wp^(m+2) = 6 sum_k C(m,k) wp^(k) wp^(m-k).
# zeta' = -wp and sigma' = sigma*zeta extend the tower downward.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EllipticValue:
    """Function value plus the derivative list d^0..d^order at the point."""

    value: complex
    derivatives: tuple[complex, ...]


def _check_order(order: int) -> None:
    if not 0 <= order <= D_MAX:
        raise ValueError(f"derivative order {order} outside [0, {D_MAX}]")


def wp_derivative_list(z: complex, lat: Lattice, order: int) -> list[complex]:
    _check_order(order)
    _, _, w0, w1 = weier_eval(z, lat)
    d = [w0, w1]
    for m in range(order - 1):
        if m == 0:
            d.append(6.0 * w0 * w0 - lat.g2 / 2.0)
        else:
            d.append(6.0 * sum(math.comb(m, k) * d[k] * d[m - k] for k in range(m + 1)))
    return d[: order + 1]


def zeta_derivative_list(z: complex, lat: Lattice, order: int) -> list[complex]:
    _check_order(order)
    zet = zeta_w(z, lat)
    if order == 0:
        return [zet]
    wd = wp_derivative_list(z, lat, order - 1)
    return [zet] + [-w for w in wd]


def sigma_derivative_list(z: complex, lat: Lattice, order: int) -> list[complex]:
    _check_order(order)
    z0, _, _ = reduce_to_cell(z, lat)
    if abs(z0) <= lat.pole_radius:
        # sigma is entire but its log-derivative tower is not; derivatives at
        # a lattice zero are not needed by any caller.
        raise PoleError(z, z - z0)
    sig = sigma_w(z, lat)
    norm = sigma_normalized_derivative_list(z, lat, order)
    return [sig * t for t in norm]


def sigma_normalized_derivative_list(z: complex, lat: Lattice, order: int) -> list[complex]:
    """The list sigma^(m)(z)/sigma(z) for m = 0..order.

    Stays finite however many cells z is away from the origin (the
    common sigma scale divides out), unlike the raw derivative list.
    """
    _check_order(order)
    if order == 0:
        return [1.0 + 0j]
    zd = zeta_derivative_list(z, lat, order - 1)
    t = [1.0 + 0j]
    for m in range(order):
        t.append(sum(math.comb(m, k) * t[k] * zd[m - k] for k in range(m + 1)))
    return t


def wp_jet(z: complex, lat: Lattice, order: int) -> EllipticValue:
    d = wp_derivative_list(z, lat, order)
    return EllipticValue(d[0], tuple(d))


def zeta_jet(z: complex, lat: Lattice, order: int) -> EllipticValue:
    d = zeta_derivative_list(z, lat, order)
    return EllipticValue(d[0], tuple(d))


def sigma_jet(z: complex, lat: Lattice, order: int) -> EllipticValue:
    d = sigma_derivative_list(z, lat, order)
    return EllipticValue(d[0], tuple(d))


# ---------------------------------------------------------------------------
# Univariate truncated Taylor helpers (coefficient lists, c[m] = f^(m)/m!).
# ---------------------------------------------------------------------------


def taylor_from_derivs(derivs) -> list[complex]:
    return [d / math.factorial(m) for m, d in enumerate(derivs)]


def taylor_mul(a, b, n: int) -> list[complex]:
    out = [0j] * (n + 1)
    for i in range(min(len(a), n + 1)):
        ai = a[i]
        if ai == 0:
            continue
        for j in range(min(len(b), n + 1 - i)):
            out[i + j] += ai * b[j]
    return out


def taylor_div(a, b, n: int) -> list[complex]:
    """a/b truncated at order n; b[0] must be nonzero."""
    if b[0] == 0:
        raise ZeroDivisionError("leading Taylor coefficient vanishes")
    out = [0j] * (n + 1)
    inv0 = 1.0 / b[0]
    for m in range(n + 1):
        acc = a[m] if m < len(a) else 0j
        for k in range(1, m + 1):
            if k < len(b):
                acc -= b[k] * out[m - k]
        out[m] = acc * inv0
    return out


def sigma_ratio_taylor_split(u: complex, shift: complex, lat: Lattice,
                             order: int) -> tuple[complex, list[complex]]:
    """(log of the leading ratio, unit-lead Taylor) of sigma(u+shift)/sigma(u).

    The lead comes from exponent differences and the shape from the
    normalized derivative towers, so far-from-cell arguments (whose raw
    sigma values overflow) stay exact; callers combine the log lead with
    their other exponents before exponentiating.
    """
    log_lead = sigma_log(u + shift, lat) - sigma_log(u, lat)
    num = taylor_from_derivs(sigma_normalized_derivative_list(u + shift, lat, order))
    den = taylor_from_derivs(sigma_normalized_derivative_list(u, lat, order))
    return log_lead, taylor_div(num, den, order)


def sigma_ratio_taylor(u: complex, shift: complex, lat: Lattice, order: int) -> list[complex]:
    """Taylor coefficients of sigma(u + shift)/sigma(u) about u."""
    log_lead, coeffs = sigma_ratio_taylor_split(u, shift, lat, order)
    lead = cmath.exp(log_lead)
    return [lead * c for c in coeffs]


# ---------------------------------------------------------------------------
# Kernel self-test used both by the test suite and the verify CLI.
# ---------------------------------------------------------------------------


def zeta_addition_check(x: complex, y: complex, z: complex, lat: Lattice) -> complex:
    """Residual of the sigma/zeta addition formula.

    zeta(x)+zeta(y)+zeta(z)-zeta(x+y+z)
        = sigma(x+y) sigma(y+z) sigma(z+x) / [sigma(x) sigma(y) sigma(z) sigma(x+y+z)]

    Returns LHS - RHS; exact cancellations (e.g. y = -x) give 0 on both
    sides and need no special casing.
    """
    lhs = zeta_w(x, lat) + zeta_w(y, lat) + zeta_w(z, lat) - zeta_w(x + y + z, lat)
    rhs = (
        sigma_w(x + y, lat) * sigma_w(y + z, lat) * sigma_w(z + x, lat)
        / (sigma_w(x, lat) * sigma_w(y, lat) * sigma_w(z, lat) * sigma_w(x + y + z, lat))
    )
    return lhs - rhs
