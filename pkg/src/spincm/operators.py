"""Differential-spin operators: the Hamiltonian, the spectral-parameter
family of third-order charges, and the two extracted invariants.

All operators consume and produce spin fields whose components are jets
about a common base point; each application lowers the jet degree by the
operator's differential order, so compositions (commutators) stay exact
to the remaining order with no re-expansion.

Summation conventions (validated numerically by the commutator suite):
sums over "j != k != l != j" run over all 6 ordered triples, "j < k"
over the 3 pairs.  The pair-potential middle terms are collapsed to
pair sums since wp is even and the exchange operator is symmetric in
its pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .elliptic import Lattice, weier_eval, wp as wp_point, wp_prime as wp_prime_point, zeta_w
from .jets import Jet, JetError, lift_pair_function
from .spin import SpinField, compose_tables, exchange_pair_table

PAIRS = ((1, 2), (2, 3), (3, 1))
ORDERED_PAIRS = ((1, 2), (2, 1), (2, 3), (3, 2), (3, 1), (1, 3))
ORDERED_TRIPLES = (
    (1, 2, 3), (1, 3, 2), (2, 1, 3), (2, 3, 1), (3, 1, 2), (3, 2, 1),
)


@dataclass(frozen=True)
class CouplingContext:
    """Coupling constant, lattice, and the spin-spin term weight.

    The default weight is a**2/3, the unique value closing the
    commutator ring; other values are accepted only to drive negative
    controls.
    """

    a: float
    lat: Lattice
    lambda_coeff: float

    @property
    def jet_degree_floor(self) -> int:
        return 3


def coupling(a: float, lat: Lattice, lambda_coeff: float | None = None) -> CouplingContext:
    a = float(a)
    lam = a * a / 3.0 if lambda_coeff is None else float(lambda_coeff)
    return CouplingContext(a=a, lat=lat, lambda_coeff=lam)


def third_particle(j: int, k: int) -> int:
    return 6 - j - k


def _require_jets(psi: SpinField, min_degree: int, opname: str) -> tuple:
    if not psi.is_jet:
        raise TypeError(f"{opname} needs a spin field of jets")
    if psi.degree < min_degree:
        raise JetError(f"{opname} needs jet degree >= {min_degree}, got {psi.degree}")
    return psi.base


def _pair_exchange(psi: SpinField, j: int, k: int) -> SpinField:
    return psi.relabel(exchange_pair_table(j, k))


def _double_exchange(psi: SpinField, j: int, k: int, l: int) -> SpinField:
    """S_jk S_kl acting on the kets."""
    t = compose_tables(exchange_pair_table(k, l), exchange_pair_table(j, k))
    return psi.relabel(t)


def apply_double_exchange_sum(psi: SpinField) -> SpinField:
    """Sum of S_jk S_kl over all 6 ordered triples."""
    out = psi * 0.0
    for (j, k, l) in ORDERED_TRIPLES:
        out = out + _double_exchange(psi, j, k, l)
    return out


def apply_total_momentum(psi: SpinField) -> SpinField:
    """Sum of the three first derivatives (degree drops by 1)."""
    _require_jets(psi, 1, "total momentum")
    d = psi.degree - 1
    return SpinField([
        c.partial(0).truncate(d) + c.partial(1).truncate(d) + c.partial(2).truncate(d)
        for c in psi.comps
    ])


def apply_hamiltonian(psi: SpinField, ctx: CouplingContext) -> SpinField:
    """-1/2 sum_j d_j^2 + sum_{j<k} a(a + S_jk) wp(x_jk); degree drops by 2."""
    x = _require_jets(psi, 2, "hamiltonian")
    a = ctx.a
    dout = psi.degree - 2
    out = []
    for c in psi.comps:
        acc = c.partial(0, 2).truncate(dout)
        acc = acc + c.partial(1, 2).truncate(dout)
        acc = acc + c.partial(2, 2).truncate(dout)
        out.append(acc * (-0.5))
    result = SpinField(out)
    psi_t = psi.truncate(dout)
    for (j, k) in PAIRS:
        pot = lift_pair_function("wp", (j, k), 0.0, ctx.lat, x, dout)
        swapped = _pair_exchange(psi_t, j, k)
        result = result + SpinField([
            pot * (a * a * tc + a * sc)
            for tc, sc in zip(psi_t.comps, swapped.comps)
        ])
    return result


def _exchange_derivative_terms(psi: SpinField, ctx: CouplingContext,
                               shift_const: complex, dout: int) -> SpinField:
    """sum over pairs of a(a + S_jk)(wp(x_jk) - shift_const) d_l psi.

    Equals the 1/2-weighted ordered-triple sum because wp is even
    and S_jk does not depend on the pair order.
    """
    x = psi.base
    a = ctx.a
    out = SpinField.zero_jets(x, dout)
    for (j, k) in PAIRS:
        l = third_particle(j, k)
        pot = lift_pair_function("wp", (j, k), 0.0, ctx.lat, x, dout) - shift_const
        dpsi = SpinField([c.partial(l - 1).truncate(dout) for c in psi.comps])
        swapped = _pair_exchange(dpsi, j, k)
        out = out + SpinField([
            pot * (a * a * dc + a * sc)
            for dc, sc in zip(dpsi.comps, swapped.comps)
        ])
    return out


def _triple_zeta_sum_jet(jets_by_pair: dict, j: int, k: int, l: int) -> Jet:
    return jets_by_pair[(j, k)] + jets_by_pair[(k, l)] + jets_by_pair[(l, j)]


def apply_spectral_family(psi: SpinField, alpha: complex, ctx: CouplingContext,
                          lambda_coeff: float | None = None) -> SpinField:
    """Third-order charge with spectral parameter alpha; degree drops by 3.

    d^3/dx1 dx2 dx3
      + 1/2 sum_{6} a(a+S_jk)(wp(x_jk) - wp(alpha)) d_l
      + lambda sum_{6} f(x_jk) f(x_kl) f(x_lj) S_jk S_kl,
    with f the sigma ratio of the pair separation and alpha, and lambda
    defaulting to the ring-closing a**2/3.
    """
    x = _require_jets(psi, 3, "spectral family")
    lam = ctx.lambda_coeff if lambda_coeff is None else float(lambda_coeff)
    dout = psi.degree - 3
    out = SpinField([c.partial(0).partial(1).partial(2).truncate(dout) for c in psi.comps])
    wp_alpha = wp_point(alpha, ctx.lat)
    out = out + _exchange_derivative_terms(psi, ctx, wp_alpha, dout)
    if lam != 0.0:
        fjet = {
            pair: lift_pair_function("f", pair, alpha, ctx.lat, x, dout)
            for pair in ORDERED_PAIRS
        }
        psi_t = psi.truncate(dout)
        for (j, k, l) in ORDERED_TRIPLES:
            phi = fjet[(j, k)] * fjet[(k, l)] * fjet[(l, j)]
            exch = _double_exchange(psi_t, j, k, l)
            out = out + SpinField([phi * c for c in exch.comps]) * lam
    return out


def apply_naive_family(psi: SpinField, alpha: complex, ctx: CouplingContext) -> SpinField:
    """The direct spin generalization WITHOUT the spin-spin correction.

    It fails to commute with the Hamiltonian; kept as the negative
    control for the commutator suite.
    """
    return apply_spectral_family(psi, alpha, ctx, lambda_coeff=0.0)


def apply_cubic_invariant(psi: SpinField, ctx: CouplingContext) -> SpinField:
    """Spectral-parameter-free third-order invariant; degree drops by 3.

    d^3/dx1 dx2 dx3 + 1/2 sum_{6} a(a+S_jk) wp(x_jk) d_l
      + (a^2/3) sum_{6} phi_jkl S_jk S_kl,
    phi_jkl = -(wp'(x_jk)+wp'(x_kl)+wp'(x_lj) + 2 (zeta-sum)^3)/6.
    """
    x = _require_jets(psi, 3, "cubic invariant")
    a = ctx.a
    dout = psi.degree - 3
    out = SpinField([c.partial(0).partial(1).partial(2).truncate(dout) for c in psi.comps])
    out = out + _exchange_derivative_terms(psi, ctx, 0.0, dout)
    zjet = {p: lift_pair_function("zeta", p, 0.0, ctx.lat, x, dout) for p in ORDERED_PAIRS}
    wjet = {p: lift_pair_function("wp_prime", p, 0.0, ctx.lat, x, dout) for p in ORDERED_PAIRS}
    psi_t = psi.truncate(dout)
    for (j, k, l) in ORDERED_TRIPLES:
        zsum = _triple_zeta_sum_jet(zjet, j, k, l)
        wsum = _triple_zeta_sum_jet(wjet, j, k, l)
        phi = (wsum + 2.0 * (zsum * zsum * zsum)) * (-1.0 / 6.0)
        exch = _double_exchange(psi_t, j, k, l)
        out = out + SpinField([phi * c for c in exch.comps]) * (a * a / 3.0)
    return out


def apply_momentum_invariant(psi: SpinField, ctx: CouplingContext) -> SpinField:
    """First-order invariant; degree drops by 1.

    1/2 sum_{6} S_jk d_l - (a/3) sum_{6} psi_jkl S_jk S_kl,
    psi_jkl = zeta(x_jk) + zeta(x_kl) + zeta(x_lj).  Coincides with the
    total momentum when every S_jk acts as the identity.
    """
    x = _require_jets(psi, 1, "momentum invariant")
    a = ctx.a
    dout = psi.degree - 1
    out = SpinField.zero_jets(x, dout)
    for (j, k) in PAIRS:
        l = third_particle(j, k)
        dpsi = SpinField([c.partial(l - 1).truncate(dout) for c in psi.comps])
        out = out + _pair_exchange(dpsi, j, k)
    zjet = {p: lift_pair_function("zeta", p, 0.0, ctx.lat, x, dout) for p in ORDERED_PAIRS}
    psi_t = psi.truncate(dout)
    for (j, k, l) in ORDERED_TRIPLES:
        zsum = _triple_zeta_sum_jet(zjet, j, k, l)
        exch = _double_exchange(psi_t, j, k, l)
        out = out + SpinField([zsum * c for c in exch.comps]) * (-a / 3.0)
    return out


# ---------------------------------------------------------------------------
# Laurent decomposition of the triple sigma-ratio product in the spectral
# parameter: Phi_jkl(alpha) = -wp'(alpha)/2 + psi_jkl wp(alpha) + phi_jkl.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhiDecomposition:
    psi_jkl: complex
    phi_jkl: complex


def phi_decompose(x, triple: tuple[int, int, int], lat: Lattice) -> PhiDecomposition:
    """alpha-independent pieces of the pole expansion for one ordered triple."""
    j, k, l = triple
    ujk = x[j - 1] - x[k - 1]
    ukl = x[k - 1] - x[l - 1]
    ulj = x[l - 1] - x[j - 1]
    vals = [weier_eval(u, lat) for u in (ujk, ukl, ulj)]
    zsum = sum(v[1] for v in vals)
    wpsum = sum(v[3] for v in vals)
    return PhiDecomposition(
        psi_jkl=zsum,
        phi_jkl=-(wpsum + 2.0 * zsum**3) / 6.0,
    )


def phi_product(x, triple: tuple[int, int, int], alpha: complex, lat: Lattice) -> complex:
    """Direct product f(x_jk) f(x_kl) f(x_lj) at the spectral parameter."""
    j, k, l = triple
    s_alpha = weier_eval(alpha, lat)[0]

    def f(u):
        return weier_eval(u + alpha, lat)[0] / (weier_eval(u, lat)[0] * s_alpha)

    return (
        f(x[j - 1] - x[k - 1]) * f(x[k - 1] - x[l - 1]) * f(x[l - 1] - x[j - 1])
    )


def phi_reconstruct(dec: PhiDecomposition, alpha: complex, lat: Lattice) -> complex:
    """Evaluate the three-term pole expansion at alpha."""
    return -0.5 * wp_prime_point(alpha, lat) + dec.psi_jkl * wp_point(alpha, lat) + dec.phi_jkl


# ---------------------------------------------------------------------------
# Operator wrappers and commutators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Operator:
    """A named operator with its differential order, for commutator plumbing."""

    name: str
    order: int
    fn: Callable[[SpinField], SpinField]

    def __call__(self, psi: SpinField) -> SpinField:
        return self.fn(psi)


def hamiltonian_op(ctx: CouplingContext) -> Operator:
    return Operator("H", 2, lambda psi: apply_hamiltonian(psi, ctx))


def cubic_invariant_op(ctx: CouplingContext) -> Operator:
    return Operator("I3", 3, lambda psi: apply_cubic_invariant(psi, ctx))


def momentum_invariant_op(ctx: CouplingContext) -> Operator:
    return Operator("I1", 1, lambda psi: apply_momentum_invariant(psi, ctx))


def spectral_family_op(alpha: complex, ctx: CouplingContext,
                       lambda_coeff: float | None = None) -> Operator:
    return Operator(
        "Ifam", 3, lambda psi: apply_spectral_family(psi, alpha, ctx, lambda_coeff)
    )


def naive_family_op(alpha: complex, ctx: CouplingContext) -> Operator:
    return Operator("Inaive", 3, lambda psi: apply_naive_family(psi, alpha, ctx))


def total_momentum_op() -> Operator:
    return Operator("P", 1, apply_total_momentum)


def commutator(op_a: Operator, op_b: Operator, psi: SpinField) -> SpinField:
    """op_a(op_b psi) - op_b(op_a psi); needs degree >= order_a + order_b."""
    need = op_a.order + op_b.order
    if psi.degree < need:
        raise JetError(
            f"commutator [{op_a.name},{op_b.name}] needs degree >= {need}, got {psi.degree}"
        )
    return op_a(op_b(psi)) - op_b(op_a(psi))


def commutator_residual(op_a: Operator, op_b: Operator, psi: SpinField) -> float:
    """Commutator norm over the largest intermediate magnitude.

    The commutator is a difference of large compositions; dividing by the
    max intermediate norm makes the residual meaningful.
    """
    ab = op_a(op_b(psi))
    ba = op_b(op_a(psi))
    scale = max(ab.norm(), ba.norm(), 1e-300)
    return (ab - ba).norm() / scale
