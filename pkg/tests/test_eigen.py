import numpy as np
import pytest

from spincm import eigen as eg
from spincm import elliptic as el
from spincm import operators as op
from spincm.jets import lift_pair_function
from spincm.spin import coordinate_permutation

from conftest import random_cell_point, random_coords

L12, L31 = 0.31 + 0.12j, -0.17 + 0.23j
KTOT = 0.2 - 0.1j


@pytest.fixture(scope="module")
def params(lat):
    return eg.complete_params(L12, L31, KTOT, lat)


def draw_params(lat, rng, kscale=1.0):
    while True:
        l12 = random_cell_point(lat, rng, margin=0.1)
        l31 = random_cell_point(lat, rng, margin=0.1)
        if el.lattice_point_near(l12 - l31, lat, 0.1) is not None:
            continue
        K = kscale * (rng.normal() + 1j * rng.normal())
        try:
            return eg.complete_params(l12, l31, K, lat)
        except eg.ParamError:
            continue


def test_symmetric_momenta_for_opposite_lambdas(lat):
    lam = 0.27 + 0.21j
    p = eg.complete_params(lam, -lam, 0.0, lat)
    assert abs(p.k2 - p.k3) < 1e-14
    assert abs(p.total_momentum) < 1e-13


def test_constraint_residuals_vanish(lat, params):
    r1, r2 = eg.params_residual(params, lat)
    assert abs(r1) < 1e-12 and abs(r2) < 1e-12


def test_orbit_row_reproduces_permuted_momenta(lat, params):
    # the row exchanging particles 1 and 2 carries the swapped momentum pair
    sign, perm, pt = eg.table_orbit(params)[1]
    assert perm == (2, 1, 3) and sign == -1
    assert pt.k1 == params.k2 and pt.k2 == params.k1 and pt.k3 == params.k3
    built = eg.complete_params(pt.lambda12, pt.lambda31, pt.total_momentum, lat)
    assert abs(built.k1 - pt.k1) < 1e-12
    assert abs(built.k2 - pt.k2) < 1e-12
    assert abs(built.k3 - pt.k3) < 1e-12


def test_degenerate_lambdas_rejected(lat):
    with pytest.raises(eg.ParamError):
        eg.complete_params(0.3, 0.3, 0.0, lat)
    with pytest.raises(eg.ParamError):
        eg.complete_params(0.0, 0.3j, 0.0, lat)


def test_y_minus_z_identity(lat, rng):
    for _ in range(100):
        p = draw_params(lat, rng)
        x = random_coords(lat, rng)
        y, z = eg.eval_YZ(p, x, lat)
        closed = eg.y_minus_z_closed(p, x, lat)
        assert abs(y - z - closed) < 1e-11 * max(abs(y), abs(z))


def test_equal_bloch_factors(lat, params):
    x = (0.11 - 0.21j, 0.42 + 0.13j, -0.27 + 0.31j)
    y0, z0 = eg.eval_YZ(params, x, lat)
    for i in range(3):
        xs = list(x)
        xs[i] += 2 * lat.omega1
        y1, z1 = eg.eval_YZ(params, tuple(xs), lat)
        assert abs(y1 / y0 - z1 / z0) < 1e-12 * abs(y1 / y0)


def test_coupled_equations(lat, rng):
    for _ in range(10):
        p = draw_params(lat, rng)
        x = random_coords(lat, rng)
        data = eg.eigen_data(p, lat)
        yj, zj = eg.eval_YZ_jets(p, x, lat, 4)
        dout = 2
        wp12 = lift_pair_function("wp", (1, 2), 0.0, lat, x, dout)
        wp23 = lift_pair_function("wp", (2, 3), 0.0, lat, x, dout)
        wp31 = lift_pair_function("wp", (3, 1), 0.0, lat, x, dout)

        def lap(j):
            return (j.partial(0, 2).truncate(dout) + j.partial(1, 2).truncate(dout)
                    + j.partial(2, 2).truncate(dout))

        yt, zt = yj.truncate(dout), zj.truncate(dout)
        r1 = 0.5 * lap(yj) + data.energy * yt - wp12 * (yt + zt) - wp31 * (2.0 * yt - zt)
        r2 = 0.5 * lap(zj) + data.energy * zt - wp12 * (yt + zt) - wp23 * (2.0 * zt - yt)
        scale = max(yt.max_abs(), zt.max_abs()) * max(abs(data.energy), wp12.max_abs())
        assert r1.max_abs() < 1e-9 * scale
        assert r2.max_abs() < 1e-9 * scale


def test_components_satisfy_constraint_and_inversion(lat, params, rng):
    x = random_coords(lat, rng)
    a, b, c = eg.components_ABC(params, x, lat)
    y, z = eg.eval_YZ(params, x, lat)
    scale = max(abs(a), abs(b), abs(c))
    assert abs(a + b + c) < 1e-13 * scale
    assert abs((a - b) - y) < 1e-13 * scale
    assert abs((a - c) - z) < 1e-13 * scale


def test_component_equations(lat, rng):
    for _ in range(5):
        p = draw_params(lat, rng)
        x = random_coords(lat, rng)
        data = eg.eigen_data(p, lat)
        dout = 2
        A, B, C = eg.components_ABC_jets(p, x, lat, 4)
        wp12 = lift_pair_function("wp", (1, 2), 0.0, lat, x, dout)
        wp23 = lift_pair_function("wp", (2, 3), 0.0, lat, x, dout)
        wp31 = lift_pair_function("wp", (3, 1), 0.0, lat, x, dout)
        wtot = wp12 + wp23 + wp31

        def lap(j):
            return (j.partial(0, 2).truncate(dout) + j.partial(1, 2).truncate(dout)
                    + j.partial(2, 2).truncate(dout))

        scale = max(A.max_abs(), B.max_abs(), C.max_abs()) * max(abs(data.energy), wp12.max_abs())
        rows = (
            (A, wp12 * A + wp31 * C + wp23 * B),
            (B, wp12 * C + wp31 * B + wp23 * A),
            (C, wp12 * B + wp31 * A + wp23 * C),
        )
        for f, exch in rows:
            r = 0.5 * lap(f) + data.energy * f.truncate(dout) - wtot * f.truncate(dout) - exch.truncate(dout)
            assert r.max_abs() < 1e-9 * scale


def test_psi0_symmetric_under_particle_permutations(lat, params, rng):
    x = random_coords(lat, rng)
    base = eg.psi0(params, x, lat)
    for perm in ((2, 1, 3), (1, 3, 2), (3, 2, 1)):
        xp = tuple(x[perm[i] - 1] for i in range(3))
        moved = coordinate_permutation(perm, eg.psi0(params, xp, lat))
        assert (moved - base).norm() < 1e-10 * base.norm()


def test_orbit_rows_match_signed_permutations(lat, params, rng):
    x = random_coords(lat, rng)
    scale = eg.psi_field(params, x, lat).norm()
    for sign, perm, pt in eg.table_orbit(params):
        xp = tuple(x[perm[i] - 1] for i in range(3))
        moved = coordinate_permutation(perm, eg.psi_field(params, xp, lat))
        rebuilt = eg.psi_field(pt, x, lat)
        assert (rebuilt - moved * float(sign)).norm() < 1e-10 * scale


def test_psi1_is_reflected_psi0(lat, params, rng):
    x = random_coords(lat, rng)
    p1 = eg.psi1(params, x, lat)
    p0m = eg.psi0(params, tuple(-c for c in x), lat)
    assert (p1 + p0m).norm() < 1e-10 * max(p1.norm(), 1e-300)


def test_energy_invariance_and_charge_flips(lat, params):
    data = eg.eigen_data(params, lat)
    for _, _, pt in eg.table_orbit(params):
        dt = eg.eigen_data(pt, lat)
        assert abs(dt.energy - data.energy) < 1e-12 * max(1.0, abs(data.energy))
    dneg = eg.eigen_data(eg.negate_params(params), lat)
    assert abs(dneg.energy - data.energy) < 1e-12 * max(1.0, abs(data.energy))
    assert abs(dneg.j2 + data.j2) < 1e-12 * max(1.0, abs(data.j2))
    assert abs(dneg.j1 + data.j1) < 1e-12 * max(1.0, abs(data.j1))


def test_psi0_eigenfunction_of_all_three_charges(lat, rng):
    ctx = op.coupling(1.0, lat)
    for _ in range(5):
        p = draw_params(lat, rng, kscale=0.5)
        x = random_coords(lat, rng)
        data = eg.eigen_data(p, lat)
        psi = eg.psi0_jets(p, x, lat, 6)
        term_scale = max(
            eg.psi_field_jets(pt, x, lat, 6).norm() for _, _, pt in eg.table_orbit(p)
        )
        for apply_op, eig, deg in (
            (lambda s: op.apply_hamiltonian(s, ctx), data.energy, 4),
            (lambda s: op.apply_cubic_invariant(s, ctx), data.j1, 3),
            (lambda s: op.apply_momentum_invariant(s, ctx), data.j2, 5),
        ):
            got = apply_op(psi)
            resid = (got - psi.truncate(deg) * eig).norm()
            assert resid < 1e-8 * max(got.norm(), abs(eig) * term_scale)


def test_psi1_has_opposite_charges(lat, rng):
    ctx = op.coupling(1.0, lat)
    p = draw_params(lat, rng, kscale=0.5)
    x = random_coords(lat, rng)
    data = eg.eigen_data(p, lat)
    psi = eg.psi1_jets(p, x, lat, 6)
    term_scale = max(
        eg.psi_field_jets(pt, x, lat, 6).norm()
        for _, _, pt in eg.table_orbit(eg.negate_params(p))
    )
    got = op.apply_momentum_invariant(psi, ctx)
    resid = (got + psi.truncate(5) * data.j2).norm()
    assert resid < 1e-8 * max(got.norm(), abs(data.j2) * term_scale)
    hpsi = op.apply_hamiltonian(psi, ctx)
    resid = (hpsi - psi.truncate(4) * data.energy).norm()
    assert resid < 1e-8 * max(hpsi.norm(), abs(data.energy) * term_scale)


def test_psi0_regular_at_coincidence(lat, params):
    eps_list = (1e-2, 1e-3, 1e-4, 1e-5)
    x = (0.0, 0.41 + 0.05j, -0.33 + 0.11j)
    regular = eg.psi0(params, (0.2, x[1], x[2]), lat).norm()
    vand = np.array([[1.0 / e, 1.0, e, e * e] for e in eps_list])
    direction = np.exp(0.4j)
    for slot in (1, 2, 4):
        vals = []
        for e in eps_list:
            xe = (x[1] + e * direction, x[1], x[2])
            vals.append(eg.psi0(params, xe, lat).comps[slot])
        coef = np.linalg.solve(vand, np.array(vals))
        assert abs(coef[0]) < 1e-6 * regular


def test_lame_reference_solves_equation(lat, rng):
    done = 0
    while done < 5:
        alpha = random_cell_point(lat, rng, 0.1)
        x = random_cell_point(lat, rng, 0.1)
        if el.lattice_point_near(x + alpha, lat, 0.1) is not None:
            continue
        done += 1
        assert eg.lame_residual(alpha, x, lat) < 1e-10


def test_lame_energy_at_half_period(rect_lat):
    _, energy = eg.lame_reference(rect_lat.omega1, 0.37, rect_lat)
    assert abs(energy.imag) < 1e-12 * abs(energy)
    assert abs(energy + el.wp(rect_lat.omega1, rect_lat)) < 1e-12 * abs(energy)


def test_lame_bloch_factor(lat, rng):
    alpha = random_cell_point(lat, rng, 0.1)
    x = random_cell_point(lat, rng, 0.1)
    v0, _ = eg.lame_reference(alpha, x, lat)
    v1, _ = eg.lame_reference(alpha, x + 2 * lat.omega1, lat)
    want = eg.lame_bloch_factor(alpha, lat)
    assert abs(v1 / v0 - want) < 1e-10 * abs(want)
