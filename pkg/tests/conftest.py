import numpy as np
import pytest

from spincm import elliptic as el


@pytest.fixture(scope="session")
def lat():
    """Generic complex lattice used across the suites."""
    return el.lattice_new(1.0, 0.4 + 1.2j)


@pytest.fixture(scope="session")
def rect_lat():
    """Real-omega1 lattice (the physical circle for the spectrum)."""
    return el.lattice_new(1.0, 0.9j)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)


def random_cell_point(lattice, generator, margin=0.08):
    for _ in range(100):
        a = generator.uniform(-0.5, 0.5)
        b = generator.uniform(-0.5, 0.5)
        z = 2 * a * lattice.omega1 + 2 * b * lattice.omega2
        if el.lattice_point_near(z, lattice, margin * abs(lattice.omega1)) is None:
            return z
    raise RuntimeError("no off-lattice point found")


def random_coords(lattice, generator):
    for _ in range(100):
        x = tuple(
            complex(generator.uniform(-0.6, 0.6), generator.uniform(-0.3, 0.3))
            for _ in range(3)
        )
        seps = (x[0] - x[1], x[1] - x[2], x[2] - x[0])
        if all(el.lattice_point_near(s, lattice, 0.08) is None for s in seps):
            return x
    raise RuntimeError("no separated coordinates found")


def fd_derivative(f, x, midx, h):
    """Mixed partial derivative by nested central differences.

    One Richardson step (h, h/2) removes the leading h^2 error.
    """

    def nested(fun, direction, step):
        def out(xs):
            xp = list(xs)
            xm = list(xs)
            xp[direction] += step
            xm[direction] -= step
            return (fun(tuple(xp)) - fun(tuple(xm))) / (2 * step)
        return out

    def estimate(step):
        fun = f
        for direction, count in enumerate(midx):
            for _ in range(count):
                fun = nested(fun, direction, step)
        return fun(tuple(x))

    d1 = estimate(h)
    d2 = estimate(h / 2)
    return (4.0 * d2 - d1) / 3.0
