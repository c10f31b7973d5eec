"""Explicit two-parameter eigenfunctions at coupling a = 1.

The constrained-sector state is parameterized by two auxiliary complex
parameters (lambda12, lambda31) plus momenta fixed up to the total
momentum K.  Y and Z are the two independent component differences; their
product-of-sigma ansatz, the closed form of Y - Z, the parameter orbit
realizing particle permutations, and the symmetrized/antisymmetrized
eigenfunctions psi0 and psi1 all live here, together with the eigenvalues
of the Hamiltonian and both conserved charges.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from . import elliptic as el
from .jets import Jet, lift_exponential, lift_univariate
from .spin import SpinField, sector_embed

#: Default rejection radius for degenerate parameter values, relative to |omega1|.
DEGENERACY_GUARD = 1e-9


class ParamError(ValueError):
    """Degenerate wave parameters (a sigma zero annihilates the state)."""


@dataclass(frozen=True)
class WaveParams:
    """Momenta, spectral parameters and normalization of one ansatz state."""

    k1: complex
    k2: complex
    k3: complex
    lambda12: complex
    lambda31: complex
    b: complex = 1.0 + 0j

    @property
    def kvec(self) -> tuple[complex, complex, complex]:
        return (self.k1, self.k2, self.k3)

    @property
    def total_momentum(self) -> complex:
        return self.k1 + self.k2 + self.k3

    @property
    def mu12(self) -> complex:
        return self.lambda12 - self.lambda31

    @property
    def mu23(self) -> complex:
        return -self.lambda31


@dataclass(frozen=True)
class EigenData:
    """Eigenvalues: energy plus the two conserved-charge values j1, j2."""

    energy: complex
    j1: complex
    j2: complex


def check_lambdas(lambda12: complex, lambda31: complex, lat: el.Lattice,
                  guard: float = DEGENERACY_GUARD) -> None:
    """Reject lambda12, lambda31 or their difference on (or near) the lattice."""
    r = guard * abs(lat.omega1)
    for name, u in (("lambda12", lambda12), ("lambda31", lambda31),
                    ("lambda12-lambda31", lambda12 - lambda31)):
        if el.lattice_point_near(u, lat, r) is not None:
            raise ParamError(f"{name} = {u} within {guard:g}|omega1| of a lattice point")


def complete_params(lambda12: complex, lambda31: complex, total_momentum: complex,
                    lat: el.Lattice, b: complex = 1.0) -> WaveParams:
    """Solve for the momenta given the two parameter constraints.

    k1 - k2 = zeta(lambda31 - lambda12) - zeta(lambda12)
    k2 - k3 = zeta(lambda31) + zeta(lambda12)
    k1 + k2 + k3 = total_momentum
    """
    check_lambdas(lambda12, lambda31, lat)
    d1 = el.zeta_w(lambda31 - lambda12, lat) - el.zeta_w(lambda12, lat)
    d2 = el.zeta_w(lambda31, lat) + el.zeta_w(lambda12, lat)
    k2 = (complex(total_momentum) - d1 + d2) / 3.0
    return WaveParams(k1=k2 + d1, k2=k2, k3=k2 - d2,
                      lambda12=complex(lambda12), lambda31=complex(lambda31),
                      b=complex(b))


def params_residual(p: WaveParams, lat: el.Lattice) -> tuple[complex, complex]:
    """Residuals of the two momentum-difference constraints."""
    r1 = (p.k1 - p.k2) - (el.zeta_w(p.lambda31 - p.lambda12, lat) - el.zeta_w(p.lambda12, lat))
    r2 = (p.k2 - p.k3) - (el.zeta_w(p.lambda31, lat) + el.zeta_w(p.lambda12, lat))
    return r1, r2


def negate_params(p: WaveParams) -> WaveParams:
    """Global sign reversal of momenta and spectral parameters."""
    return WaveParams(k1=-p.k1, k2=-p.k2, k3=-p.k3,
                      lambda12=-p.lambda12, lambda31=-p.lambda31, b=p.b)


def _require_off_lattice(u: complex, lat: el.Lattice, what: str) -> None:
    if el.lattice_point_near(u, lat) is not None:
        raise el.PoleError(u, u)


def _kx(p: WaveParams, x) -> complex:
    return p.k1 * x[0] + p.k2 * x[1] + p.k3 * x[2]


def eval_YZ(p: WaveParams, x, lat: el.Lattice) -> tuple[complex, complex]:
    """Point values of the two component differences Y and Z.

    All sigma factors are combined in log space before exponentiating:
    individual factors overflow once the parameters sit several cells
    out, while the assembled state stays moderate.
    """
    check_lambdas(p.lambda12, p.lambda31, lat)
    x12 = x[0] - x[1]
    x23 = x[1] - x[2]
    x31 = x[2] - x[0]
    for u, w in ((x12, "x12"), (x23, "x23"), (x31, "x31")):
        _require_off_lattice(u, lat, w)
    ls = lambda u: el.sigma_log(u, lat)
    kx = _kx(p, x)
    y = p.b * cmath.exp(
        ls(p.mu12) + ls(x12 + p.lambda12) + ls(x31 + p.lambda31) - ls(x12) - ls(x31) + kx
    )
    z = p.b * cmath.exp(
        ls(p.lambda12) + ls(x12 + p.mu12) + ls(x23 + p.mu23) - ls(x12) - ls(x23) + kx
    )
    return y, z


def y_minus_z_closed(p: WaveParams, x, lat: el.Lattice) -> complex:
    """Closed single-product form of Y - Z (equals C - B).

    Valid identically in the parameters; used as a kernel identity check
    and stable where Y and Z individually have their x12 poles.
    """
    x23 = x[1] - x[2]
    x31 = x[2] - x[0]
    ls = lambda u: el.sigma_log(u, lat)
    return -p.b * cmath.exp(
        ls(p.lambda31) + ls(x23 - p.lambda12) + ls(x31 - p.lambda12 + p.lambda31)
        - ls(x23) - ls(x31) + _kx(p, x)
    )


def eval_YZ_jets(p: WaveParams, x, lat: el.Lattice, degree: int) -> tuple[Jet, Jet]:
    """Jets of Y and Z about x (pair ratios lifted through the chain rule).

    The sigma-ratio leads and the constant prefactor are accumulated as
    one exponent, applied once to the unit-lead jet product.
    """
    check_lambdas(p.lambda12, p.lambda31, lat)

    def ratio(pair, lam):
        u = x[pair[0] - 1] - x[pair[1] - 1]
        log_lead, coeffs = el.sigma_ratio_taylor_split(u, lam, lat, degree)
        return log_lead, lift_univariate(coeffs, pair, x, degree)

    ekx = lift_exponential(p.kvec, x, degree)
    e0 = ekx.value
    lead_y1, r_y1 = ratio((1, 2), p.lambda12)
    lead_y2, r_y2 = ratio((3, 1), p.lambda31)
    lead_z1, r_z1 = ratio((1, 2), p.mu12)
    lead_z2, r_z2 = ratio((2, 3), p.mu23)
    pre_y = p.b * cmath.exp(el.sigma_log(p.mu12, lat) + lead_y1 + lead_y2 + cmath.log(e0))
    pre_z = p.b * cmath.exp(el.sigma_log(p.lambda12, lat) + lead_z1 + lead_z2 + cmath.log(e0))
    ekx_unit = ekx * (1.0 / e0)
    yj = pre_y * (r_y1 * r_y2 * ekx_unit)
    zj = pre_z * (r_z1 * r_z2 * ekx_unit)
    return yj, zj


def components_ABC(p: WaveParams, x, lat: el.Lattice):
    """Sector components from (Y, Z): the unique inversion under A+B+C=0."""
    y, z = eval_YZ(p, x, lat)
    return (y + z) / 3.0, (z - 2.0 * y) / 3.0, (y - 2.0 * z) / 3.0


def components_ABC_jets(p: WaveParams, x, lat: el.Lattice, degree: int):
    y, z = eval_YZ_jets(p, x, lat, degree)
    third = 1.0 / 3.0
    return (y + z) * third, (z - 2.0 * y) * third, (y - 2.0 * z) * third


def psi_field(p: WaveParams, x, lat: el.Lattice) -> SpinField:
    """The unsymmetrized sector state as a point-valued spin field."""
    a, b, c = components_ABC(p, x, lat)
    return sector_embed(a, b, c)


def psi_field_jets(p: WaveParams, x, lat: el.Lattice, degree: int) -> SpinField:
    a, b, c = components_ABC_jets(p, x, lat, degree)
    return sector_embed(a, b, c)


# ---------------------------------------------------------------------------
# Parameter orbit under particle permutations.
#
# Each row maps the parameter set to one whose state equals (sign x
# permutation operator) applied to the original: building the state from
# row parameters at the SAME point realizes the permuted state.  perm
# lists particle images 1-based; sign is the prefactor.
# ---------------------------------------------------------------------------

PARAM_ORBIT: tuple[dict, ...] = (
    dict(kperm=(1, 2, 3), sign=+1, perm=(1, 2, 3),
         l12=lambda a, b: a, l31=lambda a, b: b),
    dict(kperm=(2, 1, 3), sign=-1, perm=(2, 1, 3),
         l12=lambda a, b: -(a - b), l31=lambda a, b: b),
    dict(kperm=(1, 3, 2), sign=-1, perm=(1, 3, 2),
         l12=lambda a, b: -b, l31=lambda a, b: -a),
    dict(kperm=(3, 2, 1), sign=-1, perm=(3, 2, 1),
         l12=lambda a, b: a, l31=lambda a, b: a - b),
    dict(kperm=(2, 3, 1), sign=+1, perm=(3, 1, 2),
         l12=lambda a, b: -b, l31=lambda a, b: a - b),
    dict(kperm=(3, 1, 2), sign=+1, perm=(2, 3, 1),
         l12=lambda a, b: -(a - b), l31=lambda a, b: -a),
)


def table_orbit(p: WaveParams) -> list[tuple[int, tuple[int, int, int], WaveParams]]:
    """All six (sign, particle permutation, transformed parameters) rows."""
    k = p.kvec
    out = []
    for row in PARAM_ORBIT:
        kt = tuple(k[i - 1] for i in row["kperm"])
        out.append((
            row["sign"], row["perm"],
            WaveParams(k1=kt[0], k2=kt[1], k3=kt[2],
                       lambda12=row["l12"](p.lambda12, p.lambda31),
                       lambda31=row["l31"](p.lambda12, p.lambda31),
                       b=p.b),
        ))
    return out


def psi0(p: WaveParams, x, lat: el.Lattice) -> SpinField:
    """Symmetrized eigenfunction: signed sum over the parameter orbit."""
    total = None
    for sign, _, pt in table_orbit(p):
        term = psi_field(pt, x, lat) * float(sign)
        total = term if total is None else total + term
    return total


def psi0_jets(p: WaveParams, x, lat: el.Lattice, degree: int) -> SpinField:
    total = None
    for sign, _, pt in table_orbit(p):
        term = psi_field_jets(pt, x, lat, degree) * float(sign)
        total = term if total is None else total + term
    return total


def psi1(p: WaveParams, x, lat: el.Lattice) -> SpinField:
    """The partner eigenfunction: psi0 with globally negated parameters."""
    return psi0(negate_params(p), x, lat)


def psi1_jets(p: WaveParams, x, lat: el.Lattice, degree: int) -> SpinField:
    return psi0_jets(negate_params(p), x, lat, degree)


def eigen_data(p: WaveParams, lat: el.Lattice) -> EigenData:
    """Eigenvalues of the state: energy and the two conserved charges.

    j1's middle term carries the square of the zeta combination (the
    combination is j2, and its square equals the wp sum by the x+y+z=0
    identity), as the weight-3 homogeneity of a third-order charge
    requires.
    """
    check_lambdas(p.lambda12, p.lambda31, lat)
    K = p.total_momentum
    mu = p.lambda12 - p.lambda31
    wp12 = el.wp(p.lambda12, lat)
    wp31 = el.wp(p.lambda31, lat)
    wpmu = el.wp(mu, lat)
    energy = -K * K / 6.0 - (wp12 + wp31 + wpmu) / 3.0
    j2 = el.zeta_w(p.lambda12, lat) - el.zeta_w(p.lambda31, lat) - el.zeta_w(mu, lat)
    wps = el.wp_prime(p.lambda12, lat) - el.wp_prime(p.lambda31, lat) - el.wp_prime(mu, lat)
    j1 = K**3 / 27.0 - (K / 9.0) * j2 * j2 - (14.0 * j2**3 + 9.0 * wps) / 54.0
    return EigenData(energy=energy, j1=j1, j2=j2)


# ---------------------------------------------------------------------------
# Two-body reference solution (sanity oracle for the kernel).
# ---------------------------------------------------------------------------


def lame_reference(alpha: complex, x: complex, lat: el.Lattice) -> tuple[complex, complex]:
    """Classical two-body solution psi(x) = exp(-x zeta(alpha)) sigma(x+alpha)/sigma(x)
    of -psi'' + 2 wp psi = E psi, with E = -wp(alpha)."""
    za = el.zeta_w(alpha, lat)
    psi = cmath.exp(-x * za + el.sigma_log(x + alpha, lat) - el.sigma_log(x, lat))
    return psi, -el.wp(alpha, lat)


def lame_taylor(alpha: complex, x: complex, lat: el.Lattice, order: int) -> list[complex]:
    """Univariate Taylor coefficients of the two-body solution about x."""
    za = el.zeta_w(alpha, lat)
    e0 = cmath.exp(-x * za)
    expo = [e0]
    for m in range(1, order + 1):
        expo.append(expo[-1] * (-za) / m)
    ratio = el.sigma_ratio_taylor(x, alpha, lat, order)
    return el.taylor_mul(expo, ratio, order)


def lame_residual(alpha: complex, x: complex, lat: el.Lattice, order: int = 6) -> float:
    """Max Taylor-coefficient residual of -psi'' + 2 wp psi - E psi about x.

    Each Taylor row is normalized by its own largest term: the rows mix
    orders, and near a pole the high-order coefficients dominate.
    """
    psi_t = lame_taylor(alpha, x, lat, order)
    wp_t = el.taylor_from_derivs(el.wp_derivative_list(x, lat, order))
    _, energy = lame_reference(alpha, x, lat)
    pot = el.taylor_mul(wp_t, psi_t, order - 2)
    worst = 0.0
    for m in range(order - 1):
        second = (m + 1) * (m + 2) * psi_t[m + 2]
        row = -second + 2.0 * pot[m] - energy * psi_t[m]
        scale = max(abs(second), 2.0 * abs(pot[m]), abs(energy * psi_t[m]), 1e-300)
        worst = max(worst, abs(row) / scale)
    return worst


def lame_bloch_factor(alpha: complex, lat: el.Lattice) -> complex:
    """Multiplier of the two-body solution under x -> x + 2 omega1."""
    return cmath.exp(2.0 * (lat.eta1 * alpha - el.zeta_w(alpha, lat) * lat.omega1))
