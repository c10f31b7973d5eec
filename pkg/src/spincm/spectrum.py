"""Quantization on the real circle of circumference 2*omega1.

A state built on the parameter pair (lambda12, lambda31) picks up one
Bloch multiplier exp(c_j) per coordinate shift x_j -> x_j + 2*omega1:

    c1 = 2 k1 omega1 + 2 eta1 (lambda12 - lambda31)
    c2 = 2 k2 omega1 - 2 eta1 lambda12
    c3 = 2 k3 omega1 + 2 eta1 lambda31

Periodicity demands every c_j in 2 pi i Z.  The differences fix the
two spectral parameters through the boundary-condition system solved
here by damped Newton with the analytic Jacobian (zeta' = -wp); the sum
fixes the total momentum through an extra integer l0 (chosen to
minimize |K|), which the two printed conditions alone leave free.

NOTE the first condition uses the momentum difference k1 - k3: the
variant with k1 - k2 fails the end-to-end periodicity check (the
symmetrized state then acquires Bloch factors of order one), while this
form reproduces machine-level periodicity.  See the test suite.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import eigen as eg
from . import elliptic as el
from . import operators as op

logger = logging.getLogger(__name__)

PI = math.pi

#: Seeds are dropped within this fraction of |omega1| of a degeneracy locus.
SEED_EXCLUSION = 0.05

#: Converged parameter pairs closer than this (times |omega1|) are one level.
DEDUP_TOL = 1e-8

#: Levels whose symmetrized state is this small relative to its orbit terms
#: are annihilated by the symmetrization (not physical sector states).
NULL_STATE_TOL = 1e-6


class SolveError(RuntimeError):
    """Newton failure: no convergence, or convergence to a degenerate point."""


@dataclass(frozen=True)
class Level:
    """One quantized state with its solve metadata."""

    l1: int
    l2: int
    l0: int
    lambda12: complex
    lambda31: complex
    params: eg.WaveParams
    data: eg.EigenData
    newton_iters: int
    residual: float
    bloch_residual: float = field(default=float("nan"))
    psi0_scale: float = field(default=float("nan"))


def _kdiffs(lambda12: complex, lambda31: complex, lat: el.Lattice):
    """Momentum differences (k1-k2, k2-k3) from the parameter constraints."""
    d1 = el.zeta_w(lambda31 - lambda12, lat) - el.zeta_w(lambda12, lat)
    d2 = el.zeta_w(lambda31, lat) + el.zeta_w(lambda12, lat)
    return d1, d2


def bloch_exponents(p: eg.WaveParams, lat: el.Lattice) -> tuple[complex, complex, complex]:
    """Log Bloch multipliers (c1, c2, c3) of the ansatz state per coordinate."""
    e1, w1 = lat.eta1, lat.omega1
    return (
        2.0 * p.k1 * w1 + 2.0 * e1 * (p.lambda12 - p.lambda31),
        2.0 * p.k2 * w1 - 2.0 * e1 * p.lambda12,
        2.0 * p.k3 * w1 + 2.0 * e1 * p.lambda31,
    )


def bc_residual(lambda12: complex, lambda31: complex, l1: int, l2: int,
                lat: el.Lattice) -> tuple[complex, complex]:
    """Residuals of the two quantization conditions.

    F1 = (k1 - k3) omega1 + eta1 (lambda12 - 2 lambda31) - i pi l1
    F2 = (k2 - k3) omega1 - eta1 (lambda12 + lambda31)   - i pi l2

    These are half the differences c1 - c3 and c2 - c3 of the per-
    coordinate Bloch exponents shifted by the integers.
    """
    d1, d2 = _kdiffs(lambda12, lambda31, lat)
    f1 = (d1 + d2) * lat.omega1 + lat.eta1 * (lambda12 - 2.0 * lambda31) - 1j * PI * l1
    f2 = d2 * lat.omega1 - lat.eta1 * (lambda12 + lambda31) - 1j * PI * l2
    return f1, f2


def bc_jacobian(lambda12: complex, lambda31: complex, lat: el.Lattice) -> np.ndarray:
    """Analytic Jacobian of (F1, F2) in (lambda12, lambda31)."""
    w1, e1 = lat.omega1, lat.eta1
    wp_mu = el.wp(lambda31 - lambda12, lat)
    wp_12 = el.wp(lambda12, lat)
    wp_31 = el.wp(lambda31, lat)
    return np.array([
        [wp_mu * w1 + e1, -(wp_mu + wp_31) * w1 - 2.0 * e1],
        [-wp_12 * w1 - e1, -wp_31 * w1 - e1],
    ])


def _lambda_ok(lambda12: complex, lambda31: complex, lat: el.Lattice, radius: float) -> bool:
    for u in (lambda12, lambda31, lambda12 - lambda31):
        if el.lattice_point_near(u, lat, radius) is not None:
            return False
    return True


#: Converged parameters farther out than this many cells are runaway
#: duplicates: lattice shifts of lambda relabel the integers, so every
#: state has its canonical representative inside the fundamental domain.
DOMAIN_PAD = 1.4


def _in_domain(lambda12: complex, lambda31: complex, lat: el.Lattice) -> bool:
    for u in (lambda12, lambda31):
        ab = lat.red_inv @ (u.real, u.imag)
        if np.max(np.abs(ab)) > DOMAIN_PAD:
            return False
    return True


def _choose_l0(lambda12: complex, lambda31: complex, lat: el.Lattice) -> tuple[int, complex]:
    """Integer closing the total-momentum Bloch condition, minimizing |K|.

    c3 = 2 pi i l0 pins k3 = (i pi l0 - eta1 lambda31)/omega1; K is linear
    in l0 with slope 3 i pi / omega1.
    """
    d1, d2 = _kdiffs(lambda12, lambda31, lat)

    def total(l0: int) -> complex:
        k3 = (1j * PI * l0 - lat.eta1 * lambda31) / lat.omega1
        return 3.0 * k3 + d1 + 2.0 * d2

    slope = 3j * PI / lat.omega1
    guess = int(round((-total(0) / slope).real))
    best = min(
        (guess + d for d in (-2, -1, 0, 1, 2)),
        key=lambda l0: abs(total(l0)),
    )
    return best, total(best)


# Deterministic off-coincidence spot for the periodicity check, in units
# of omega1 (real coordinates: the circle the spectrum lives on).
_BLOCH_SPOT = (0.213, 0.529, -0.351)


def _bloch_check(p: eg.WaveParams, lat: el.Lattice) -> tuple[float, float]:
    """(max per-coordinate periodicity residual of psi0, relative state size)."""
    x = tuple(c * lat.omega1 for c in _BLOCH_SPOT)
    base = eg.psi0(p, x, lat)
    # scale of the individual orbit terms, before symmetrization cancellation
    term_scale = max(
        eg.psi_field(pt, x, lat).norm() for _, _, pt in eg.table_orbit(p)
    )
    rel = base.norm() / max(term_scale, 1e-300)
    if rel < NULL_STATE_TOL:
        return float("nan"), rel
    worst = 0.0
    for i in range(3):
        xs = list(x)
        xs[i] += 2.0 * lat.omega1
        shifted = eg.psi0(p, tuple(xs), lat)
        worst = max(worst, (shifted - base).norm() / base.norm())
    return worst, rel


def solve_level(l1: int, l2: int, seed: tuple[complex, complex], lat: el.Lattice,
                l0: int | None = None, tol: float = 1e-12, max_iter: int = 50,
                guard: float = 1e-6) -> Level:
    """Damped Newton on the quantization conditions from one seed pair.

    Raises SolveError on non-convergence, convergence to a degenerate
    parameter point, or a state annihilated by the symmetrization.
    """
    lam = np.array(seed, dtype=complex)
    radius = guard * abs(lat.omega1)
    if not _lambda_ok(lam[0], lam[1], lat, radius):
        raise SolveError("seed on a degeneracy locus")
    fv = np.array(bc_residual(lam[0], lam[1], l1, l2, lat))
    iters = 0
    while np.max(np.abs(fv)) >= tol:
        if iters >= max_iter:
            raise SolveError(f"no convergence after {max_iter} iterations")
        jac = bc_jacobian(lam[0], lam[1], lat)
        try:
            step = np.linalg.solve(jac, -fv)
        except np.linalg.LinAlgError as exc:
            raise SolveError(f"singular Jacobian: {exc}") from exc
        scale = 1.0
        for _ in range(10):
            cand = lam + scale * step
            if _lambda_ok(cand[0], cand[1], lat, radius):
                try:
                    fc = np.array(bc_residual(cand[0], cand[1], l1, l2, lat))
                except el.PoleError:
                    fc = None
                if fc is not None and np.all(np.isfinite(fc)) and (
                    np.max(np.abs(fc)) < np.max(np.abs(fv)) or np.max(np.abs(fc)) < tol
                ):
                    lam, fv = cand, fc
                    break
            scale *= 0.5
        else:
            raise SolveError("step damping exhausted")
        iters += 1

    lambda12, lambda31 = complex(lam[0]), complex(lam[1])
    if not _lambda_ok(lambda12, lambda31, lat, radius):
        raise SolveError("converged to a degenerate parameter point")
    if not _in_domain(lambda12, lambda31, lat):
        raise SolveError("converged outside the fundamental domain (duplicate label)")

    if l0 is None:
        l0_val, K = _choose_l0(lambda12, lambda31, lat)
    else:
        l0_val = int(l0)
        k3 = (1j * PI * l0_val - lat.eta1 * lambda31) / lat.omega1
        d1, d2 = _kdiffs(lambda12, lambda31, lat)
        K = 3.0 * k3 + d1 + 2.0 * d2
    params = eg.complete_params(lambda12, lambda31, K, lat)
    data = eg.eigen_data(params, lat)
    bloch, rel = _bloch_check(params, lat)
    if rel < NULL_STATE_TOL:
        raise SolveError(
            f"symmetrization annihilates the state (relative size {rel:.2e})"
        )
    return Level(
        l1=l1, l2=l2, l0=l0_val, lambda12=lambda12, lambda31=lambda31,
        params=params, data=data, newton_iters=iters,
        residual=float(np.max(np.abs(fv))), bloch_residual=bloch, psi0_scale=rel,
    )


def _cell_coords(u: complex, lat: el.Lattice) -> np.ndarray:
    ab = lat.red_inv @ (u.real, u.imag)
    return ab - np.floor(ab + 0.5)


def _orbit_lambda_images(lambda12: complex, lambda31: complex) -> list[tuple[complex, complex]]:
    a, b = lambda12, lambda31
    return [
        (a, b), (-(a - b), b), (-b, -a), (a, a - b), (-b, a - b), (-(a - b), -a),
    ]


def same_level(one: Level, other: Level, lat: el.Lattice, tol: float = DEDUP_TOL) -> bool:
    """Lattice- and orbit-aware identity of two solved levels.

    The full eigendata is compared as well: a globally sign-reversed
    partner can land on orbit/lattice-coincident parameters yet carries
    the opposite charge eigenvalues and is a distinct degenerate state.
    """
    scale = max(1.0, abs(one.data.energy), abs(other.data.energy))
    if abs(one.data.energy - other.data.energy) > 1e-6 * scale:
        return False
    jscale = max(1.0, abs(one.data.j1), abs(one.data.j2))
    if abs(one.data.j1 - other.data.j1) > 1e-6 * jscale:
        return False
    if abs(one.data.j2 - other.data.j2) > 1e-6 * jscale:
        return False
    ref = (one.lambda12, one.lambda31)
    for cand in _orbit_lambda_images(other.lambda12, other.lambda31):
        d1 = np.max(np.abs(_cell_coords(cand[0] - ref[0], lat)))
        d2 = np.max(np.abs(_cell_coords(cand[1] - ref[1], lat)))
        if d1 < tol and d2 < tol:
            return True
    return False


def _spot_eigen_residual(level: Level, lat: el.Lattice, n_points: int = 3) -> float:
    """Hamiltonian spot check of the solved state at a few generic points.

    Normalized by the pre-cancellation orbit-term scale: the symmetrized
    state is a signed six-term sum and float evaluation cannot resolve
    residuals below the cancellation floor.
    """
    ctx = op.coupling(1.0, lat)
    rng = np.random.default_rng(abs(hash((level.l1, level.l2, level.l0))) % 2**32)
    worst = 0.0
    for _ in range(n_points):
        x = tuple((0.1 + 0.8 * t) * lat.omega1 for t in rng.uniform(size=3))
        try:
            psi = eg.psi0_jets(level.params, x, lat, 3)
            term_scale = max(
                eg.psi_field_jets(pt, x, lat, 3).norm()
                for _, _, pt in eg.table_orbit(level.params)
            )
        except el.PoleError:
            continue
        hpsi = op.apply_hamiltonian(psi, ctx)
        resid = (hpsi - psi.truncate(1) * level.data.energy).norm()
        scale = max(hpsi.norm(), abs(level.data.energy) * term_scale, 1e-300)
        worst = max(worst, resid / scale)
    return worst


def enumerate_spectrum(l_max: int, seeds_per_cell: int, lat: el.Lattice,
                       tol: float = 1e-12, eigen_check: bool = True) -> list[Level]:
    """Deduplicated, energy-sorted levels over |l1|, |l2| <= l_max.

    Newton runs from every ordered pair of grid seeds in the fundamental
    cell; failed seeds are logged, never fatal.  Levels related by the
    parameter orbit (the same physical state found under a relabeled
    integer pair) are merged; globally sign-reversed partners are kept,
    they are the distinct degenerate states.
    """
    if abs(lat.omega1.imag) > 1e-12 * abs(lat.omega1):
        raise ValueError("spectrum enumeration needs a real omega1 (physical circle)")
    offsets = [(i + 0.5) / seeds_per_cell for i in range(seeds_per_cell)]
    grid = [
        a * 2.0 * lat.omega1 + b * 2.0 * lat.omega2
        for a in offsets for b in offsets
    ]
    excl = SEED_EXCLUSION * abs(lat.omega1)
    seeds = [
        (s12, s31)
        for s12 in grid for s31 in grid
        if _lambda_ok(s12, s31, lat, excl)
    ]
    levels: list[Level] = []
    n_failed = 0
    for l1 in range(-l_max, l_max + 1):
        for l2 in range(-l_max, l_max + 1):
            for seed in seeds:
                try:
                    lv = solve_level(l1, l2, seed, lat, tol=tol)
                except (SolveError, el.PoleError, eg.ParamError) as exc:
                    n_failed += 1
                    logger.debug("seed %s for (%d,%d) rejected: %s", seed, l1, l2, exc)
                    continue
                if any(same_level(lv, kept, lat) for kept in levels):
                    continue
                if eigen_check:
                    spot = _spot_eigen_residual(lv, lat)
                    if spot > 1e-6:
                        logger.warning(
                            "level (%d,%d,%d) failed the eigen spot check: %.2e",
                            lv.l1, lv.l2, lv.l0, spot,
                        )
                        continue
                levels.append(lv)
    # Sign-reversal completion: the conditions are odd under the global
    # reversal of lambdas and integers, so every level has a partner at
    # the negated pair; seed it exactly (grid seeds live in one cell and
    # lattice shifts of lambda relabel the integers, so the plain scan
    # can reach only one member of a pair).
    for lv in list(levels):
        if abs(lv.l1) > l_max or abs(lv.l2) > l_max:
            continue
        try:
            partner = solve_level(-lv.l1, -lv.l2, (-lv.lambda12, -lv.lambda31), lat, tol=tol)
        except (SolveError, el.PoleError, eg.ParamError) as exc:
            logger.debug("sign partner of (%d,%d) rejected: %s", lv.l1, lv.l2, exc)
            continue
        if any(same_level(partner, kept, lat) for kept in levels):
            continue
        if eigen_check and _spot_eigen_residual(partner, lat) > 1e-6:
            continue
        levels.append(partner)
    logger.info("spectrum: %d levels kept, %d seeds rejected", len(levels), n_failed)
    levels.sort(key=lambda lv: (lv.data.energy.real, lv.data.energy.imag, lv.l1, lv.l2))
    return levels
