"""spincm: the three-particle spin-1/2 elliptic many-body eigenproblem.

Weierstrass kernels on arbitrary complex lattices, jet-based application
of the Hamiltonian and its two extra conserved charges, the explicit
two-parameter eigenfunctions at unit coupling, and the quantized
spectrum on the real circle.
"""

__version__ = "0.1.0"

from .backend import BACKEND, USING_NUMBA
from .elliptic import (
    EllipticValue,
    Lattice,
    LatticeError,
    PoleError,
    lattice_new,
    sigma_w,
    wp,
    wp_jet,
    wp_prime,
    zeta_addition_check,
    zeta_w,
)
from .jets import Jet, JetError, jet_add, jet_mul, jet_partial, jet_scale, lift_pair_function
from .spin import PermOp, SectorError, SpinField, apply_sjk, coordinate_permutation, sector_embed, spin_exchange
from .operators import (
    CouplingContext,
    PhiDecomposition,
    apply_cubic_invariant,
    apply_hamiltonian,
    apply_momentum_invariant,
    apply_naive_family,
    apply_spectral_family,
    commutator,
    commutator_residual,
    coupling,
    phi_decompose,
)
from .eigen import (
    EigenData,
    ParamError,
    WaveParams,
    complete_params,
    components_ABC,
    eigen_data,
    eval_YZ,
    lame_reference,
    psi0,
    psi1,
)
from .spectrum import Level, SolveError, bc_residual, enumerate_spectrum, solve_level

__all__ = [
    "BACKEND",
    "USING_NUMBA",
    "CouplingContext",
    "EigenData",
    "EllipticValue",
    "Jet",
    "JetError",
    "Lattice",
    "LatticeError",
    "Level",
    "ParamError",
    "PermOp",
    "PhiDecomposition",
    "PoleError",
    "SectorError",
    "SolveError",
    "SpinField",
    "WaveParams",
    "apply_cubic_invariant",
    "apply_hamiltonian",
    "apply_momentum_invariant",
    "apply_naive_family",
    "apply_sjk",
    "apply_spectral_family",
    "bc_residual",
    "commutator",
    "commutator_residual",
    "complete_params",
    "components_ABC",
    "coordinate_permutation",
    "coupling",
    "eigen_data",
    "enumerate_spectrum",
    "eval_YZ",
    "jet_add",
    "jet_mul",
    "jet_partial",
    "jet_scale",
    "lame_reference",
    "lattice_new",
    "lift_pair_function",
    "phi_decompose",
    "psi0",
    "psi1",
    "sector_embed",
    "sigma_w",
    "solve_level",
    "spin_exchange",
    "wp",
    "wp_jet",
    "wp_prime",
    "zeta_addition_check",
    "zeta_w",
]
