"""Three-particle spin-1/2 state space and permutation action.

Basis order is binary counting with up = 0, down = 1 on (s1, s2, s3),
s1 being the most significant bit: index 0 is all-up, index 1 is
up-up-down, ..., index 7 all-down.  The full 8-dimensional space is kept
(not just the constrained sector) because the conserved-charge
commutator identities hold on arbitrary spin states.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .jets import Jet

UP, DOWN = 0, 1

#: All 8 basis labels (s1, s2, s3) in storage order.
BASIS: tuple[tuple[int, int, int], ...] = tuple(
    ((b >> 2) & 1, (b >> 1) & 1, b & 1) for b in range(8)
)

# Sector component slots for the total-S_z = +1/2 triple:
# up-up-down, up-down-up, down-up-up.
IDX_UUD, IDX_UDU, IDX_DUU = 0b001, 0b010, 0b100


def basis_index(s1: int, s2: int, s3: int) -> int:
    return (s1 << 2) | (s2 << 1) | s3


class SectorError(ValueError):
    """Constraint violation when embedding a constrained-sector state."""


class SpinField:
    """Wavefunction as 8 scalar fields (complex values or jets), one per basis label."""

    __slots__ = ("comps",)

    def __init__(self, comps):
        comps = list(comps)
        if len(comps) != 8:
            raise ValueError("a spin field has exactly 8 components")
        self.comps = comps

    @classmethod
    def zero_jets(cls, base, degree: int) -> "SpinField":
        return cls([Jet(base, degree) for _ in range(8)])

    @property
    def is_jet(self) -> bool:
        return isinstance(self.comps[0], Jet)

    @property
    def base(self):
        return self.comps[0].base if self.is_jet else None

    @property
    def degree(self) -> int:
        if not self.is_jet:
            raise TypeError("point-valued spin field has no jet degree")
        return min(c.degree for c in self.comps)

    def __add__(self, other: "SpinField") -> "SpinField":
        return SpinField([a + b for a, b in zip(self.comps, other.comps)])

    def __sub__(self, other: "SpinField") -> "SpinField":
        return SpinField([a - b for a, b in zip(self.comps, other.comps)])

    def __mul__(self, scalar) -> "SpinField":
        return SpinField([c * scalar for c in self.comps])

    __rmul__ = __mul__

    def __neg__(self) -> "SpinField":
        return SpinField([-c for c in self.comps])

    def truncate(self, degree: int) -> "SpinField":
        return SpinField([c.truncate(degree) for c in self.comps])

    def values(self) -> np.ndarray:
        """Point values of the 8 components."""
        if self.is_jet:
            return np.array([c.value for c in self.comps])
        return np.array([complex(c) for c in self.comps])

    def norm(self) -> float:
        """Max coefficient magnitude over all components."""
        if self.is_jet:
            return max(c.max_abs() for c in self.comps)
        return float(np.max(np.abs(self.values())))

    def relabel(self, table) -> "SpinField":
        """Components pulled back through a basis-label permutation table."""
        return SpinField([self.comps[table[b]] for b in range(8)])


@lru_cache(maxsize=None)
def _swap_table(j: int, k: int) -> tuple[int, ...]:
    out = []
    for b in range(8):
        s = [(b >> 2) & 1, (b >> 1) & 1, b & 1]
        s[j - 1], s[k - 1] = s[k - 1], s[j - 1]
        out.append(basis_index(*s))
    return tuple(out)


@dataclass(frozen=True)
class PermOp:
    """Spin exchange operator for one particle pair (an involution)."""

    jk: tuple[int, int]
    table: tuple[int, ...]

    def matrix(self) -> np.ndarray:
        m = np.zeros((8, 8))
        for b in range(8):
            m[self.table[b], b] = 1.0
        return m


def spin_exchange(j: int, k: int) -> PermOp:
    if j == k or not {j, k} <= {1, 2, 3}:
        raise ValueError(f"invalid particle pair ({j}, {k})")
    return PermOp(jk=(j, k), table=_swap_table(j, k))


def apply_sjk(op: PermOp, psi: SpinField) -> SpinField:
    """Exchange the spin labels of op's pair; scalar fields untouched."""
    return psi.relabel(op.table)


def compose_tables(outer, inner) -> tuple[int, ...]:
    """Label table of (outer then inner acting on kets): outer[inner[b]]."""
    return tuple(outer[inner[b]] for b in range(8))


def exchange_pair_table(j: int, k: int) -> tuple[int, ...]:
    return _swap_table(j, k)


def sector_embed(A, B, C, tol: float = 1e-10) -> SpinField:
    """Embed constrained components (A, B, C) with A + B + C = 0.

    The constraint is checked at the evaluation point (constant jet
    coefficient) relative to the component scale.
    """

    def val(f):
        return f.value if isinstance(f, Jet) else complex(f)

    resid = val(A) + val(B) + val(C)
    scale = max(abs(val(A)), abs(val(B)), abs(val(C)), 1e-300)
    if abs(resid) > tol * scale:
        raise SectorError(
            f"sector constraint violated: |A+B+C| = {abs(resid):.3e} (scale {scale:.3e})"
        )
    if isinstance(A, Jet):
        zero = Jet(A.base, A.degree)
        comps = [zero.copy() for _ in range(8)]
    else:
        comps = [0j] * 8
    comps[IDX_UUD] = A
    comps[IDX_UDU] = B
    comps[IDX_DUU] = C
    return SpinField(comps)


def _spin_label_table(perm: tuple[int, int, int]) -> tuple[int, ...]:
    """Basis relabeling for particle permutation perm: s'_i = s_perm[i]."""
    out = []
    for b in range(8):
        s = BASIS[b]
        out.append(basis_index(s[perm[0] - 1], s[perm[1] - 1], s[perm[2] - 1]))
    return tuple(out)


def coordinate_permutation(perm: tuple[int, int, int], psi: SpinField) -> SpinField:
    """Relabel both coordinates and spins by the particle permutation.

    perm lists images 1-based: the transformed field reads particle
    perm[i] in slot i.  Jet components are relabeled exactly; point
    values are treated as constants (evaluate at the permuted point
    before calling if a pointwise action is wanted).
    """
    table = _spin_label_table(perm)
    moved = psi.relabel(table)
    if psi.is_jet:
        moved = SpinField([c.permute_coords(perm) for c in moved.comps])
    return moved
