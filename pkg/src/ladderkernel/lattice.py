"""Operators of the periodic spin-1/2 Heisenberg ladder, blocked by total S^z.

Spin (l, k) with rung l = 1..L and leg k = 1, 2 lives on bit 2(l-1)+(k-1)
of the product-state integer; a set bit is spin up (S^z = +1/2).  Every
operator built here conserves total S^z, so it is stored as one sparse
block per sector, the sector being labelled by the number of up spins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from .errors import ContractError, InvalidSpecError

__all__ = [
    "LadderSpec",
    "BlockedOperator",
    "site_bit",
    "sector_states",
    "ladder_bonds",
    "default_mid_rung",
    "mode_coefficients",
    "build_h0",
    "build_v",
    "build_total",
    "build_sz_rung",
    "build_sz_mode",
    "build_sz_total",
    "commutator",
]


@dataclass(frozen=True)
class LadderSpec:
    """Geometry and couplings of the ladder.

    ``bond_scale`` multiplies every two-spin product (the Heisenberg bonds
    of H0 and the S^z S^z bonds of V).  With ``bond_scale=2`` a bond reads
    sigma.sigma/2 in Pauli matrices, which is the energy scale the shipped
    default configuration uses for the density-of-states diagnostics.
    """

    L: int
    J_par: float = 1.0
    J_perp: float = 1.0
    lam: float = 0.0
    bond_scale: float = 1.0

    def __post_init__(self):
        if isinstance(self.L, bool) or not isinstance(self.L, (int, np.integer)):
            raise InvalidSpecError(f"L must be an integer, got {self.L!r}")
        if self.L < 2:
            raise InvalidSpecError(f"L must be >= 2, got {self.L}")
        for name in ("J_par", "J_perp", "lam", "bond_scale"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidSpecError(f"{name} must be finite")

    @property
    def n_sites(self) -> int:
        return 2 * self.L

    @property
    def dim(self) -> int:
        return 1 << self.n_sites

    def with_lambda(self, lam: float) -> "LadderSpec":
        return replace(self, lam=float(lam))


def site_bit(l: int, k: int) -> int:
    """Bit position of spin (l, k), both indices 1-based."""
    return 2 * (l - 1) + (k - 1)


def default_mid_rung(L: int) -> int:
    """Centre rung: L/2 for even L, (L+1)/2 for odd L."""
    return L // 2 if L % 2 == 0 else (L + 1) // 2


@lru_cache(maxsize=None)
def _sector_states(n_sites: int) -> tuple:
    states = np.arange(1 << n_sites, dtype=np.int64)
    pop = np.zeros_like(states)
    for b in range(n_sites):
        pop += (states >> b) & 1
    out = []
    for n in range(n_sites + 1):
        s = states[pop == n]
        s.setflags(write=False)
        out.append(s)
    return tuple(out)


def sector_states(n_sites: int) -> dict[int, np.ndarray]:
    """Sorted product states of each sector, keyed by the number of up spins."""
    return dict(enumerate(_sector_states(n_sites)))


def ladder_bonds(L: int) -> dict[str, list[tuple[int, int]]]:
    """Bit pairs of leg, rung and diagonal bonds with periodic legs.

    The sums run literally over l = 1..L, so for L = 2 each leg and each
    diagonal bond appears twice.
    """
    nxt = lambda l: l % L + 1  # noqa: E731
    legs = [(site_bit(l, k), site_bit(nxt(l), k)) for k in (1, 2) for l in range(1, L + 1)]
    rungs = [(site_bit(l, 1), site_bit(l, 2)) for l in range(1, L + 1)]
    diagonals = []
    for l in range(1, L + 1):
        diagonals.append((site_bit(l, 1), site_bit(nxt(l), 2)))
        diagonals.append((site_bit(l, 2), site_bit(nxt(l), 1)))
    return {"legs": legs, "rungs": rungs, "diagonals": diagonals}


@dataclass(frozen=True, eq=False)
class BlockedOperator:
    """Operator conserving total S^z, stored as sparse blocks per sector.

    ``blocks[n]`` acts on the states ``states[n]`` (sorted integers with
    ``n`` set bits).  Sectors absent from ``blocks`` are zero.
    """

    n_sites: int
    blocks: Mapping[int, sp.csr_matrix]
    states: Mapping[int, np.ndarray]
    label: str = ""

    @property
    def dim(self) -> int:
        return 1 << self.n_sites

    @property
    def sectors(self) -> list[int]:
        return sorted(self.states)

    def sector_dim(self, n: int) -> int:
        return len(self.states[n])

    def block(self, n: int) -> sp.csr_matrix:
        if n in self.blocks:
            return self.blocks[n]
        d = self.sector_dim(n)
        return sp.csr_matrix((d, d))

    def dense_block(self, n: int) -> np.ndarray:
        return self.block(n).toarray()

    def to_dense(self) -> np.ndarray:
        """Full 2^N matrix indexed by product-state integers."""
        dtype = np.result_type(*[b.dtype for b in self.blocks.values()]) if self.blocks else float
        out = np.zeros((self.dim, self.dim), dtype=dtype)
        for n, st in self.states.items():
            out[np.ix_(st, st)] = self.dense_block(n)
        return out

    def is_diagonal(self) -> bool:
        for b in self.blocks.values():
            coo = b.tocoo()
            if np.any((coo.row != coo.col) & (coo.data != 0)):
                return False
        return True

    def hermiticity_error(self) -> float:
        err = 0.0
        for b in self.blocks.values():
            diff = b - b.conj().T
            if diff.nnz:
                err = max(err, float(abs(diff).max()))
        return err

    def trace(self) -> complex:
        return sum(b.diagonal().sum() for b in self.blocks.values())

    def _combine(self, other, fn):
        if not isinstance(other, BlockedOperator):
            return NotImplemented
        if other.n_sites != self.n_sites:
            raise ContractError("operators act on different lattices")
        blocks = {n: sp.csr_matrix(fn(self.block(n), other.block(n))) for n in self.sectors}
        return BlockedOperator(self.n_sites, blocks, self.states)

    def __add__(self, other):
        return self._combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._combine(other, lambda a, b: a - b)

    def __matmul__(self, other):
        return self._combine(other, lambda a, b: a @ b)

    def __mul__(self, scalar):
        if isinstance(scalar, BlockedOperator):
            return NotImplemented
        blocks = {n: sp.csr_matrix(b * scalar) for n, b in self.blocks.items()}
        return BlockedOperator(self.n_sites, blocks, self.states, self.label)

    __rmul__ = __mul__


def commutator(a: BlockedOperator, b: BlockedOperator) -> BlockedOperator:
    return a @ b - b @ a


def _build(n_sites, heisenberg=(), ising=(), field=(), label=""):
    """Assemble sum J S_a.S_b + sum J S^z_a S^z_b + sum h S^z_a per sector.

    ``heisenberg`` and ``ising`` are (bit_a, bit_b, J) triples, ``field``
    is (bit, h) pairs.
    """
    states = sector_states(n_sites)
    blocks = {}
    for n, st in states.items():
        dim = len(st)
        diag = np.zeros(dim)
        rows, cols, vals = [], [], []
        for a, b, J in list(heisenberg) + list(ising):
            ba = (st >> a) & 1
            bb = (st >> b) & 1
            diag += np.where(ba == bb, 0.25 * J, -0.25 * J)
        for a, b, J in heisenberg:
            flip = np.nonzero(((st >> a) & 1) != ((st >> b) & 1))[0]
            if flip.size == 0:
                continue
            target = st[flip] ^ ((1 << a) | (1 << b))
            rows.append(np.searchsorted(st, target))
            cols.append(flip)
            vals.append(np.full(flip.size, 0.5 * J))
        for a, h in field:
            diag += h * (((st >> a) & 1) - 0.5)
        rows.append(np.arange(dim))
        cols.append(np.arange(dim))
        vals.append(diag)
        m = sp.coo_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(dim, dim),
        ).tocsr()
        m.sum_duplicates()
        m.eliminate_zeros()
        blocks[n] = m
    return BlockedOperator(n_sites, blocks, states, label)


def build_h0(spec: LadderSpec) -> BlockedOperator:
    """H0 = J_par * (leg bonds) + J_perp * (rung bonds), periodic legs."""
    bonds = ladder_bonds(spec.L)
    s = spec.bond_scale
    heis = [(a, b, s * spec.J_par) for a, b in bonds["legs"]]
    heis += [(a, b, s * spec.J_perp) for a, b in bonds["rungs"]]
    return _build(spec.n_sites, heisenberg=heis, label="H0")


def build_v(spec: LadderSpec) -> BlockedOperator:
    """Diagonal-bond perturbation V = sum_l S^z_{l,1} S^z_{l+1,2} + S^z_{l,2} S^z_{l+1,1}."""
    bonds = ladder_bonds(spec.L)
    ising = [(a, b, spec.bond_scale) for a, b in bonds["diagonals"]]
    return _build(spec.n_sites, ising=ising, label="V")


def build_total(spec: LadderSpec) -> BlockedOperator:
    """H = H0 + lam * V."""
    h = build_h0(spec)
    if spec.lam != 0.0:
        h = h + spec.lam * build_v(spec)
    return BlockedOperator(h.n_sites, h.blocks, h.states, f"H(lam={spec.lam})")


def _check_rung(spec, l):
    if not 1 <= l <= spec.L:
        raise IndexError(f"rung index {l} outside 1..{spec.L}")


def build_sz_rung(spec: LadderSpec, l: int) -> BlockedOperator:
    """Rung magnetization S^z_{l,1} + S^z_{l,2}."""
    _check_rung(spec, l)
    field = [(site_bit(l, 1), 1.0), (site_bit(l, 2), 1.0)]
    return _build(spec.n_sites, field=field, label=f"Sz_rung[{l}]")


def mode_coefficients(L: int, k: int) -> np.ndarray:
    """cos[q (l - L/2)] for l = 1..L with q = 2 pi k / L and L/2 taken as a real number."""
    if not 0 <= k <= L - 1:
        raise IndexError(f"mode index {k} outside 0..{L - 1}")
    q = 2.0 * np.pi * k / L
    return np.cos(q * (np.arange(1, L + 1) - L / 2.0))


def build_sz_mode(spec: LadderSpec, k: int) -> BlockedOperator:
    """Fourier mode S^z_q = sum_l cos[q (l - L/2)] S^z_l of the rung magnetizations."""
    c = mode_coefficients(spec.L, k)
    field = []
    for l in range(1, spec.L + 1):
        field += [(site_bit(l, 1), c[l - 1]), (site_bit(l, 2), c[l - 1])]
    return _build(spec.n_sites, field=field, label=f"Sz_mode[{k}]")


def build_sz_total(spec: LadderSpec) -> BlockedOperator:
    field = [(b, 1.0) for b in range(spec.n_sites)]
    return _build(spec.n_sites, field=field, label="Sz_total")
