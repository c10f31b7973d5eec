import numpy as np
import pytest

from spincm import elliptic as el
from spincm import operators as op
from spincm.jets import JetError, jet_constant, lift_exponential, lift_pair_function
from spincm.spin import SpinField
from spincm.verify import random_spin_state

from conftest import random_cell_point, random_coords

X = (0.21 - 0.11j, 0.53 + 0.17j, -0.35 + 0.02j)


def constant_field(base, degree):
    return SpinField([jet_constant(1.0, base, degree) for _ in range(8)])


def test_free_constant_state_annihilated(lat):
    ctx = op.coupling(0.0, lat)
    out = op.apply_hamiltonian(constant_field(X, 4), ctx)
    assert out.norm() == 0.0


def test_hamiltonian_on_aligned_plane_wave(lat):
    # aligned spins: every exchange acts as the identity
    a = 1.3
    ctx = op.coupling(a, lat)
    k = (0.4 - 0.2j, -0.1 + 0.3j, 0.25)
    wave = lift_exponential(k, X, 6)
    comps = [jet_constant(0.0, X, 6) for _ in range(8)]
    comps[0] = wave  # all up
    psi = SpinField(comps)
    out = op.apply_hamiltonian(psi, ctx)
    wp_sum = sum(el.wp(X[i] - X[j], lat) for i, j in ((0, 1), (1, 2), (2, 0)))
    expect = (-0.5 * sum(v * v for v in k) + a * (a + 1) * wp_sum) * wave.value
    assert abs(out.comps[0].value - expect) < 1e-12 * abs(expect)
    assert all(out.comps[b].max_abs() == 0.0 for b in range(1, 8))


def test_family_reduces_to_third_derivative_at_zero_coupling(lat, rng):
    ctx = op.coupling(0.0, lat)
    psi = random_spin_state(lat, X, 5, rng)
    out = op.apply_spectral_family(psi, 0.23 + 0.11j, ctx)
    want = SpinField([c.partial(0).partial(1).partial(2) for c in psi.comps])
    assert (out - want).norm() < 1e-12 * max(want.norm(), 1.0)


def test_family_spinless_reduction(lat, rng):
    """On exchange-symmetric states the family equals the scalar operator
    plus the alpha-dependent constant from the pole expansion."""
    a = 1.4
    alpha = 0.23 + 0.11j
    ctx = op.coupling(a, lat)
    f = (lift_pair_function("sigma", (1, 2), 0.31, lat, X, 6)
         * lift_exponential((0.2, -0.1, 0.05), X, 6))
    psi = SpinField([f.copy() for _ in range(8)])
    got = op.apply_spectral_family(psi, alpha, ctx)
    dout = 3
    wp_alpha = el.wp(alpha, lat)
    scalar = f.partial(0).partial(1).partial(2).truncate(dout)
    for (j, k) in ((1, 2), (2, 3), (3, 1)):
        l = op.third_particle(j, k)
        pot = lift_pair_function("wp", (j, k), 0.0, lat, X, dout) - wp_alpha
        scalar = scalar + a * (a + 1) * (pot * f.partial(l - 1).truncate(dout))
    scalar = scalar - (a * a * el.wp_prime(alpha, lat)) * f.truncate(dout)
    for b in range(8):
        assert np.max(np.abs(got.comps[b].coeffs - scalar.coeffs)) < 1e-10 * max(
            1.0, scalar.max_abs()
        )


def test_momentum_invariant_is_momentum_when_spinless(lat):
    ctx = op.coupling(2.1, lat)
    f = (lift_pair_function("sigma", (2, 3), -0.2, lat, X, 5)
         * lift_exponential((0.1, 0.3, -0.2), X, 5))
    psi = SpinField([f.copy() for _ in range(8)])
    got = op.apply_momentum_invariant(psi, ctx)
    want = op.apply_total_momentum(psi)
    assert (got - want).norm() < 1e-12 * max(want.norm(), 1.0)


def test_phi_decomposition_over_alpha(lat, rng):
    x = random_coords(lat, rng)
    dec = op.phi_decompose(x, (1, 2, 3), lat)
    for _ in range(10):
        alpha = random_cell_point(lat, rng, 0.1)
        direct = op.phi_product(x, (1, 2, 3), alpha, lat)
        recon = op.phi_reconstruct(dec, alpha, lat)
        assert abs(direct - recon) < 1e-10 * max(1.0, abs(direct))


def test_zeta_triple_sum_is_odd(lat, rng):
    x = random_coords(lat, rng)
    fwd = op.phi_decompose(x, (1, 2, 3), lat).psi_jkl
    swp = op.phi_decompose(x, (2, 1, 3), lat).psi_jkl
    assert abs(fwd + swp) < 1e-13 * max(1.0, abs(fwd))


def test_wp_sum_equals_zeta_sum_squared(lat, rng):
    x = random_coords(lat, rng)
    dec = op.phi_decompose(x, (1, 2, 3), lat)
    wps = sum(el.wp(x[i] - x[j], lat) for i, j in ((0, 1), (1, 2), (2, 0)))
    assert abs(wps - dec.psi_jkl**2) < 1e-10 * max(1.0, abs(wps))


@pytest.mark.parametrize("a", [0.5, 1.0, 2.3])
def test_commutator_ring(lat, rng, a):
    ctx = op.coupling(a, lat)
    ham = op.hamiltonian_op(ctx)
    cubic = op.cubic_invariant_op(ctx)
    momentum = op.momentum_invariant_op(ctx)
    for _ in range(2):
        x = random_coords(lat, rng)
        psi = random_spin_state(lat, x, 6, rng)
        alpha = random_cell_point(lat, rng, 0.1)
        fam = op.spectral_family_op(alpha, ctx)
        assert op.commutator_residual(ham, fam, psi) < 1e-8
        assert op.commutator_residual(ham, cubic, psi) < 1e-8
        assert op.commutator_residual(ham, momentum, psi) < 1e-8
        assert op.commutator_residual(cubic, momentum, psi) < 1e-8


def test_commutator_with_itself_vanishes(lat, rng):
    ctx = op.coupling(1.1, lat)
    psi = random_spin_state(lat, X, 5, rng)
    ham = op.hamiltonian_op(ctx)
    assert op.commutator(ham, ham, psi).norm() == 0.0


def test_naive_family_fails_to_commute(lat, rng):
    ctx = op.coupling(1.0, lat)
    psi = random_spin_state(lat, X, 6, rng)
    naive = op.naive_family_op(0.23 + 0.11j, ctx)
    assert op.commutator_residual(op.hamiltonian_op(ctx), naive, psi) > 1e-3


def test_perturbed_weight_breaks_commutation(lat, rng):
    a = 1.0
    ctx = op.coupling(a, lat, lambda_coeff=a * a / 3.0 * 1.2)
    psi = random_spin_state(lat, X, 6, rng)
    fam = op.spectral_family_op(0.23 + 0.11j, ctx)
    assert op.commutator_residual(op.hamiltonian_op(ctx), fam, psi) > 1e-3


def test_family_recombines_from_invariants(lat, rng):
    """family(alpha) = cubic - wp(alpha)(a^2 P + a momentum) - wp'(alpha)/2 (a^2/3) sum SS."""
    a = 1.7
    alpha = 0.23 + 0.11j
    ctx = op.coupling(a, lat)
    psi = random_spin_state(lat, X, 6, rng)
    fam = op.apply_spectral_family(psi, alpha, ctx)
    dout = psi.degree - 3
    cubic = op.apply_cubic_invariant(psi, ctx)
    mom = op.apply_momentum_invariant(psi, ctx).truncate(dout)
    ptot = op.apply_total_momentum(psi).truncate(dout)
    ss = op.apply_double_exchange_sum(psi).truncate(dout)
    wpa = el.wp(alpha, lat)
    wppa = el.wp_prime(alpha, lat)
    recon = cubic - wpa * (a * a * ptot + a * mom) - (0.5 * wppa * a * a / 3.0) * ss
    assert (fam - recon).norm() < 1e-12 * max(fam.norm(), 1.0)


def test_commutator_needs_enough_degree(lat, rng):
    ctx = op.coupling(1.0, lat)
    psi = random_spin_state(lat, X, 4, rng)
    with pytest.raises(JetError):
        op.commutator(op.hamiltonian_op(ctx), op.spectral_family_op(0.2 + 0.1j, ctx), psi)


def test_coupling_defaults_to_ring_weight(lat):
    ctx = op.coupling(2.4, lat)
    assert ctx.lambda_coeff == pytest.approx(2.4**2 / 3.0)
