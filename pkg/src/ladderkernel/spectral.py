"""Sector-wise diagonalization and the spectral diagnostics built on it.

Provides density of states, local density of states of an initial state,
fractional window weights, and the perturbation written in the ordered
eigenbasis of the unperturbed Hamiltonian together with its sparseness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np
import scipy.sparse as sp

from .errors import ContractError, InvalidSpecError
from .lattice import BlockedOperator

__all__ = [
    "Spectrum",
    "Histogram",
    "EigenbasisMatrix",
    "diagonalize",
    "dos_histogram",
    "ldos_weights",
    "ldos_histogram",
    "window_weight",
    "v_in_eigenbasis",
    "sparseness",
]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues (ascending) and eigenvectors of every sector block."""

    n_sites: int
    energies: Mapping[int, np.ndarray]
    vectors: Mapping[int, np.ndarray]
    states: Mapping[int, np.ndarray]

    @property
    def dim(self) -> int:
        return sum(len(e) for e in self.energies.values())

    @property
    def sectors(self) -> list[int]:
        return sorted(self.energies)

    def all_energies(self) -> np.ndarray:
        """All eigenvalues in ascending order."""
        return np.sort(np.concatenate([self.energies[n] for n in self.sectors]))

    def global_order(self) -> tuple[np.ndarray, np.ndarray]:
        """(sector, local index) of every eigenstate, sorted by energy.

        Ties are broken by sector label then local index, so the ordering
        is deterministic.
        """
        sec = np.concatenate([np.full(len(self.energies[n]), n) for n in self.sectors])
        loc = np.concatenate([np.arange(len(self.energies[n])) for n in self.sectors])
        e = np.concatenate([self.energies[n] for n in self.sectors])
        order = np.lexsort((loc, sec, e))
        return sec[order], loc[order]

    def global_index(self) -> dict[int, np.ndarray]:
        """Position of each sector eigenstate in the global energy ordering."""
        sec, loc = self.global_order()
        out = {n: np.empty(len(self.energies[n]), dtype=np.int64) for n in self.sectors}
        for g, (n, i) in enumerate(zip(sec, loc)):
            out[n][i] = g
        return out

    def to_eigenbasis(self, op: BlockedOperator) -> dict[int, np.ndarray]:
        """Dense blocks U^dagger A U of ``op`` in this eigenbasis."""
        _check_compatible(op, self)
        out = {}
        for n in self.sectors:
            u = self.vectors[n]
            out[n] = u.conj().T @ (op.block(n) @ u)
        return out

    def from_eigenbasis(self, blocks: Mapping[int, np.ndarray]) -> dict[int, np.ndarray]:
        """Inverse of :meth:`to_eigenbasis`: dense blocks U M U^dagger."""
        out = {}
        for n in self.sectors:
            u = self.vectors[n]
            out[n] = u @ blocks[n] @ u.conj().T
        return out

    def unitarity_error(self) -> float:
        err = 0.0
        for u in self.vectors.values():
            err = max(err, float(np.abs(u.conj().T @ u - np.eye(u.shape[1])).max()))
        return err


def _check_compatible(op, spectrum):
    if op.n_sites != spectrum.n_sites:
        raise ContractError(f"operator has {op.n_sites} sites, spectrum has {spectrum.n_sites}")
    for n in spectrum.sectors:
        if op.sector_dim(n) != len(spectrum.energies[n]):
            raise ContractError(f"sector {n} dimension mismatch")


def diagonalize(op: BlockedOperator, tol: float = 1e-10) -> Spectrum:
    """Full eigendecomposition of every sector block.

    Raises ContractError if a block is not Hermitian to relative
    precision ``tol``.
    """
    scale = max([1.0] + [float(abs(b).max()) for b in op.blocks.values() if b.nnz])
    herr = op.hermiticity_error()
    if herr > tol * scale:
        raise ContractError(f"operator is not Hermitian (max |M - M^dagger| = {herr:.3e})")
    energies, vectors = {}, {}
    for n in op.sectors:
        w, u = np.linalg.eigh(op.dense_block(n))
        energies[n] = w
        vectors[n] = u
    return Spectrum(op.n_sites, energies, vectors, op.states)


@dataclass(frozen=True)
class Histogram:
    """Uniform-width histogram.

    ``kind`` is ``"count"`` for N(E)/d and ``"weight"`` for an energy
    distribution of a state; both sum to one.
    """

    edges: np.ndarray
    values: np.ndarray
    kind: str

    @property
    def width(self) -> float:
        return float(self.edges[1] - self.edges[0])

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def _edges(lo, hi, width):
    if not width > 0:
        raise InvalidSpecError("bin_width must be positive")
    nb = max(1, math.ceil((hi - lo) / width))
    edges = lo + width * np.arange(nb + 1)
    if edges[-1] < hi:
        edges = np.append(edges, edges[-1] + width)
    return edges


def dos_histogram(spectrum: Spectrum, bin_width: float, lo: float | None = None) -> Histogram:
    """Fraction of eigenstates per bin, bins anchored at the lowest eigenvalue."""
    e = spectrum.all_energies()
    lo = e[0] if lo is None else lo
    edges = _edges(lo, e[-1], bin_width)
    counts, _ = np.histogram(e, bins=edges)
    return Histogram(edges, counts / spectrum.dim, "count")


def ldos_weights(spectrum: Spectrum, rho) -> tuple[np.ndarray, np.ndarray]:
    """Energies and populations <n|rho|n> over the eigenstates of ``spectrum``.

    ``rho`` is any object with a ``product_blocks()`` method returning its
    dense sector blocks in the product basis (see dynamics.DensityMatrix).
    """
    blocks = rho.product_blocks()
    es, ws = [], []
    for n in spectrum.sectors:
        u = spectrum.vectors[n]
        w = np.einsum("in,ij,jn->n", u.conj(), blocks[n], u).real
        es.append(spectrum.energies[n])
        ws.append(w)
    e = np.concatenate(es)
    w = np.concatenate(ws)
    total = w.sum()
    if not np.isfinite(total) or total <= 0:
        raise InvalidSpecError("state is not normalizable")
    return e, w / total


def ldos_histogram(spectrum: Spectrum, rho, bin_width: float, lo: float | None = None) -> Histogram:
    """Energy distribution of ``rho`` over the eigenbasis of ``spectrum``.

    Bins share the anchor of :func:`dos_histogram` so both line up.
    """
    e, w = ldos_weights(spectrum, rho)
    lo = e.min() if lo is None else lo
    edges = _edges(lo, e.max(), bin_width)
    vals, _ = np.histogram(e, bins=edges, weights=w)
    return Histogram(edges, vals, "weight")


def window_weight(h: Histogram, window: tuple[float, float]) -> float:
    """Histogram weight inside ``window``, partial bins counted by overlap."""
    lo, hi = window
    if not lo < hi:
        raise InvalidSpecError("window must satisfy E_lo < E_hi")
    left = np.maximum(h.edges[:-1], lo)
    right = np.minimum(h.edges[1:], hi)
    frac = np.clip(right - left, 0.0, None) / np.diff(h.edges)
    return float(np.sum(frac * h.values))


@dataclass(frozen=True, eq=False)
class EigenbasisMatrix:
    """An operator in the energy-ordered eigenbasis, kept as sector blocks.

    Elements between different sectors vanish identically;
    :meth:`to_dense` interleaves the blocks by energy.
    """

    blocks: Mapping[int, np.ndarray]
    spectrum: Spectrum

    @property
    def dim(self) -> int:
        return self.spectrum.dim

    def max_abs(self) -> float:
        return max(float(np.abs(b).max()) if b.size else 0.0 for b in self.blocks.values())

    def trace(self) -> complex:
        return sum(np.trace(b) for b in self.blocks.values())

    def hermiticity_error(self) -> float:
        return max(float(np.abs(b - b.conj().T).max()) if b.size else 0.0 for b in self.blocks.values())

    def to_dense(self) -> np.ndarray:
        idx = self.spectrum.global_index()
        dtype = np.result_type(*self.blocks.values())
        out = np.zeros((self.dim, self.dim), dtype=dtype)
        for n, b in self.blocks.items():
            out[np.ix_(idx[n], idx[n])] = b
        return out

    def triplets(self, threshold: float = 1e-10):
        """(row, col, value) of elements above ``threshold * max|V_mn|``, in global order."""
        idx = self.spectrum.global_index()
        cut = threshold * self.max_abs()
        rows, cols, vals = [], [], []
        for n in sorted(self.blocks):
            b = self.blocks[n]
            i, j = np.nonzero(np.abs(b) > cut)
            rows.append(idx[n][i])
            cols.append(idx[n][j])
            vals.append(b[i, j])
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        vals = np.concatenate(vals)
        order = np.lexsort((cols, rows))
        return rows[order], cols[order], vals[order]

    def to_product_basis(self) -> BlockedOperator:
        """Transform back to the product basis (round-trip check)."""
        back = self.spectrum.from_eigenbasis(self.blocks)
        blocks = {n: sp.csr_matrix(b) for n, b in back.items()}
        return BlockedOperator(self.spectrum.n_sites, blocks, self.spectrum.states)


def v_in_eigenbasis(v: BlockedOperator, spectrum: Spectrum) -> EigenbasisMatrix:
    return EigenbasisMatrix(spectrum.to_eigenbasis(v), spectrum)


def sparseness(m: EigenbasisMatrix, threshold: float = 1e-10) -> float:
    """Fraction of all d^2 elements with |V_mn| > threshold * max|V_mn|."""
    if not threshold > 0:
        raise InvalidSpecError("threshold must be positive")
    mx = m.max_abs()
    if mx == 0.0:
        return 0.0
    cut = threshold * mx
    nz = sum(int(np.count_nonzero(np.abs(b) > cut)) for b in m.blocks.values())
    return nz / m.dim**2
