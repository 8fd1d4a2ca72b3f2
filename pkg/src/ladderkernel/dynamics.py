"""Initial states and exact expectation-value dynamics in the eigenbasis of H.

Both the density matrix and the observable are rotated into the energy
eigenbasis once per sector; every time point is then a phase-weighted sum
over matrix elements, so there is no integrator error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import ContractError, InvalidSpecError
from .lattice import (
    BlockedOperator,
    LadderSpec,
    build_sz_rung,
    build_total,
    default_mid_rung,
)
from .spectral import Spectrum, diagonalize

__all__ = [
    "InitialStateSpec",
    "DensityMatrix",
    "TimeSeries",
    "time_grid",
    "make_rho1",
    "make_rho2",
    "make_state",
    "evolve_expectation",
    "evolve_many",
    "magnetization_profile",
    "infinite_time_average",
    "rescale_to",
    "slope_at_zero",
]

STATE_KINDS = ("rho1", "rho2")


@dataclass(frozen=True)
class InitialStateSpec:
    """rho1 ~ 1 - epsilon S^z_mid;  rho2 ~ exp[-beta (H + B S^z_mid)]."""

    kind: str = "rho1"
    epsilon: float = 0.01
    beta: float = 0.1
    B: float = 5.0
    mid_rung: int | None = None

    def __post_init__(self):
        if self.kind not in STATE_KINDS:
            raise InvalidSpecError(f"state kind must be one of {STATE_KINDS}, got {self.kind!r}")
        if self.kind == "rho1" and not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise InvalidSpecError("epsilon must be positive and finite")
        if self.kind == "rho2":
            if not (self.beta >= 0 and math.isfinite(self.beta)):
                raise InvalidSpecError("beta must be non-negative and finite")
            if not math.isfinite(self.B):
                raise InvalidSpecError("B must be finite")

    def mid(self, L: int) -> int:
        m = default_mid_rung(L) if self.mid_rung is None else self.mid_rung
        if not 1 <= m <= L:
            raise InvalidSpecError(f"mid_rung {m} outside 1..{L}")
        return m


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Density matrix held as dense sector blocks in the eigenbasis of ``spectrum``."""

    blocks: Mapping[int, np.ndarray]
    spectrum: Spectrum
    kind: str = ""

    def trace(self) -> float:
        return float(sum(np.trace(b).real for b in self.blocks.values()))

    def hermiticity_error(self) -> float:
        return max(float(np.abs(b - b.conj().T).max()) for b in self.blocks.values())

    def min_eigenvalue(self) -> float:
        return min(float(np.linalg.eigvalsh(b)[0]) for b in self.blocks.values() if b.size)

    def product_blocks(self) -> dict[int, np.ndarray]:
        return self.spectrum.from_eigenbasis(self.blocks)


@dataclass(frozen=True)
class TimeSeries:
    """Real samples p(n * dt), n = 0, 1, ...; ``meta`` carries labels."""

    dt: float
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise ContractError("time series must be one-dimensional")
        if not self.dt > 0:
            raise ContractError("dt must be positive")
        if not np.all(np.isfinite(v)):
            raise ContractError("time series contains non-finite values")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(len(self.values))

    def with_values(self, values, **meta) -> "TimeSeries":
        return replace(self, values=np.asarray(values, dtype=float), meta={**self.meta, **meta})

    def truncated(self, n: int) -> "TimeSeries":
        return replace(self, values=self.values[:n])


def time_grid(t_max: float, dt: float) -> np.ndarray:
    if not dt > 0:
        raise InvalidSpecError("dt must be positive")
    if not t_max > 0:
        raise InvalidSpecError("t_max must be positive")
    n = int(math.floor(t_max / dt + 1e-9)) + 1
    return dt * np.arange(n)


def make_rho1(spec: LadderSpec, s: InitialStateSpec, spectrum: Spectrum) -> DensityMatrix:
    """(1 - epsilon S^z_mid) / 2^N, rotated into the eigenbasis of ``spectrum``."""
    if s.kind != "rho1":
        raise InvalidSpecError("make_rho1 needs kind='rho1'")
    sz = build_sz_rung(spec, s.mid(spec.L))
    blocks = {}
    for n in spectrum.sectors:
        diag = (1.0 - s.epsilon * sz.block(n).diagonal()) / spec.dim
        u = spectrum.vectors[n]
        blocks[n] = u.conj().T @ (diag[:, None] * u)
    return DensityMatrix(blocks, spectrum, "rho1")


def make_rho2(
    spec: LadderSpec,
    s: InitialStateSpec,
    h_total: BlockedOperator,
    spectrum: Spectrum | None = None,
) -> DensityMatrix:
    """exp[-beta (H + B S^z_mid)] / Z in the eigenbasis of H.

    ``h_total`` must already contain lam * V.  ``spectrum`` is the
    eigendecomposition of ``h_total``; it is computed when omitted.
    """
    if s.kind != "rho2":
        raise InvalidSpecError("make_rho2 needs kind='rho2'")
    if spectrum is None:
        spectrum = diagonalize(h_total)
    shifted = diagonalize(h_total + s.B * build_sz_rung(spec, s.mid(spec.L)))
    e_min = min(float(e[0]) for e in shifted.energies.values())
    weights = {n: np.exp(-s.beta * (shifted.energies[n] - e_min)) for n in shifted.sectors}
    z = sum(float(w.sum()) for w in weights.values())
    blocks = {}
    for n in spectrum.sectors:
        w = shifted.vectors[n]
        rho_prod = (w * (weights[n] / z)) @ w.conj().T
        u = spectrum.vectors[n]
        blocks[n] = u.conj().T @ rho_prod @ u
    return DensityMatrix(blocks, spectrum, "rho2")


def make_state(spec: LadderSpec, s: InitialStateSpec, h_total=None, spectrum=None) -> DensityMatrix:
    if h_total is None:
        h_total = build_total(spec)
    if spectrum is None:
        spectrum = diagonalize(h_total)
    if s.kind == "rho1":
        return make_rho1(spec, s, spectrum)
    return make_rho2(spec, s, h_total, spectrum)


def _check_inputs(spectrum, rho, ops):
    if rho.spectrum is not spectrum:
        for n in spectrum.sectors:
            if rho.blocks[n].shape[0] != len(spectrum.energies[n]):
                raise ContractError(f"density matrix does not match spectrum in sector {n}")
    if rho.hermiticity_error() > 1e-10 * max(1.0, max(np.abs(b).max() for b in rho.blocks.values())):
        raise ContractError("density matrix is not Hermitian")
    for op in ops:
        if op.n_sites != spectrum.n_sites:
            raise ContractError("observable and spectrum act on different lattices")


def evolve_many(
    spectrum: Spectrum,
    rho: DensityMatrix,
    ops: Sequence[BlockedOperator],
    times: np.ndarray,
    chunk: int = 512,
) -> np.ndarray:
    """tr[rho(t) A] for every observable in ``ops`` at every time in ``times``.

    Uses p(t) = sum_{m,n} rho_mn A_nm exp[-i (E_m - E_n) t] per sector.
    Returns an array of shape (len(ops), len(times)).
    """
    _check_inputs(spectrum, rho, ops)
    times = np.asarray(times, dtype=float)
    re = np.zeros((len(ops), len(times)))
    im = np.zeros_like(re)
    for n in spectrum.sectors:
        r = rho.blocks[n]
        if not np.any(r):
            continue
        e = spectrum.energies[n]
        u = spectrum.vectors[n]
        coeffs = []
        for op in ops:
            a = u.conj().T @ (op.block(n) @ u)
            coeffs.append(r * a.T)
        for start in range(0, len(times), chunk):
            t = times[start : start + chunk]
            ph = np.outer(t, e)
            c, s = np.cos(ph), np.sin(ph)
            for k, cm in enumerate(coeffs):
                if np.iscomplexobj(cm):
                    phase = c + 1j * s
                    val = np.sum((phase.conj() @ cm) * phase, axis=1)
                    re[k, start : start + len(t)] += val.real
                    im[k, start : start + len(t)] += val.imag
                else:
                    cc = c @ cm
                    sc = s @ cm
                    re[k, start : start + len(t)] += np.sum(cc * c + sc * s, axis=1)
                    im[k, start : start + len(t)] += np.sum(cc * s - sc * c, axis=1)
    resid = float(np.abs(im).max()) if im.size else 0.0
    if resid > 1e-9 * max(1.0, float(np.abs(re).max())):
        raise ContractError(f"expectation value not real (imaginary residue {resid:.3e})")
    return re


def evolve_expectation(
    spectrum: Spectrum,
    rho: DensityMatrix,
    a: BlockedOperator,
    t_max: float,
    dt: float,
    meta: dict | None = None,
) -> TimeSeries:
    times = time_grid(t_max, dt)
    vals = evolve_many(spectrum, rho, [a], times)[0]
    return TimeSeries(dt, vals, dict(meta or {}, observable=a.label, state=rho.kind))


def magnetization_profile(
    spec: LadderSpec,
    spectrum: Spectrum,
    rho: DensityMatrix,
    t_max: float,
    dt: float,
) -> list[TimeSeries]:
    """Rung magnetizations p_l(t) for l = 1..L."""
    ops = [build_sz_rung(spec, l) for l in range(1, spec.L + 1)]
    times = time_grid(t_max, dt)
    vals = evolve_many(spectrum, rho, ops, times)
    return [TimeSeries(dt, vals[l - 1], {"rung": l, "state": rho.kind}) for l in range(1, spec.L + 1)]


def infinite_time_average(
    spectrum: Spectrum, rho: DensityMatrix, a: BlockedOperator, degeneracy_tol: float = 1e-9
) -> float:
    """Infinite-time average of tr[rho(t) A]: sum over pairs with E_m = E_n.

    Without degeneracies this is the diagonal-ensemble value sum_m rho_mm A_mm.
    """
    total = 0.0
    for n in spectrum.sectors:
        e = spectrum.energies[n]
        u = spectrum.vectors[n]
        am = u.conj().T @ (a.block(n) @ u)
        same = np.abs(e[:, None] - e[None, :]) < degeneracy_tol
        total += float(np.sum((rho.blocks[n] * am.T)[same]).real)
    return total


def rescale_to(series: TimeSeries, target_initial: float) -> TimeSeries:
    """Multiply the series so that it starts at ``target_initial``."""
    p0 = series.values[0]
    if p0 == 0.0:
        raise ContractError("cannot rescale a series with p(0) = 0")
    s = target_initial / p0
    return series.with_values(s * series.values, scale=s)


def slope_at_zero(series: TimeSeries) -> float:
    """Second-order one-sided finite-difference estimate of dp/dt at t = 0."""
    if len(series) < 3:
        raise ContractError("slope_at_zero needs at least 3 samples")
    p = series.values
    return float((-3.0 * p[0] + 4.0 * p[1] - p[2]) / (2.0 * series.dt))
