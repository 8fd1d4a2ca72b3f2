"""Memory kernel of a relaxation curve and the damped-kernel prediction.

A curve a(t) and its kernel K(tau) are linked by

    da/dt = -int_0^t K(t - t') a(t') dt'.

Extraction inverts this on the sampling grid (trapezoidal convolution,
solved row by row for K_n); the forward solver integrates it for a given
kernel.  The two are independent discretizations, so a round trip is
exact only up to O(dt^2).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dynamics import TimeSeries
from .errors import ContractError, InvalidSpecError, SingularDeconvolutionError
from .optimize import minimize_on_grid, nonnegative_grid

__all__ = [
    "Kernel",
    "GammaFit",
    "derivative",
    "extract_kernel",
    "forward_solve",
    "damp_kernel",
    "predict_modified",
    "fit_gamma",
    "l2_distance",
    "l2_norm",
]


@dataclass(frozen=True)
class Kernel:
    """Samples K(n * dt); ``gamma`` records exponential damping already applied."""

    dt: float
    values: np.ndarray
    gamma: float = 0.0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or not np.all(np.isfinite(v)):
            raise ContractError("kernel samples must be a finite 1-D array")
        if not self.dt > 0:
            raise ContractError("dt must be positive")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return len(self.values)

    @property
    def taus(self) -> np.ndarray:
        return self.dt * np.arange(len(self.values))


@dataclass(frozen=True)
class GammaFit:
    gamma: float
    l2_error: float
    bracket: tuple[float, float]
    iterations: int
    at_boundary: bool = False

    def to_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "l2_error": self.l2_error,
            "bracket": list(self.bracket),
            "iterations": self.iterations,
            "at_boundary": self.at_boundary,
        }


def derivative(a: np.ndarray, h: float) -> np.ndarray:
    """Central differences inside, second-order one-sided stencils at the ends."""
    d = np.empty_like(a)
    d[1:-1] = (a[2:] - a[:-2]) / (2 * h)
    d[0] = (-3 * a[0] + 4 * a[1] - a[2]) / (2 * h)
    d[-1] = (3 * a[-1] - 4 * a[-2] + a[-3]) / (2 * h)
    return d


def _is_even_start(a):
    # one-sided slope estimate negligible next to the first increment: a'(0) = 0
    # up to truncation, as for every curve generated by the kernel equation
    return abs(-3 * a[0] + 4 * a[1] - a[2]) / 2 <= 0.05 * abs(a[1] - a[0]) + 1e-12 * np.abs(a).max()


def extract_kernel(a: TimeSeries, symmetric: bool | None = None) -> Kernel:
    """Memory kernel of ``a`` on the same grid.

    K_0 = -a''(0)/a(0).  With ``symmetric`` (auto-detected when None) the
    second derivative uses the even extension a(-t) = a(t); otherwise a
    one-sided four-point stencil.  Later samples follow from

        a'(t_n) = -h [K_0 a_n / 2 + sum_{j=1}^{n-1} K_j a_{n-j} + K_n a_0 / 2],

    with the final sample extrapolated quadratically from its predecessors.
    The scheme is second order.  The even extension makes K_0 itself first
    order when K'(0) != 0; curves of time-reversal-invariant systems are
    even in t and unaffected.
    """
    v = a.values
    h = a.dt
    n = len(v)
    if n < 5:
        raise ContractError("kernel extraction needs at least 5 samples")
    a0 = v[0]
    if abs(a0) <= 1e-12 * np.abs(v).max() or a0 == 0.0:
        raise SingularDeconvolutionError("a(0) vanishes; kernel is undefined")
    if symmetric is None:
        symmetric = _is_even_start(v)
    if symmetric:
        d2 = 2 * (v[1] - v[0]) / h**2
    else:
        d2 = (2 * v[0] - 5 * v[1] + 4 * v[2] - v[3]) / h**2
    da = derivative(v, h)
    k = np.zeros(n)
    k[0] = -d2 / a0
    for i in range(1, n):
        conv = 0.5 * k[0] * v[i] + np.dot(k[1:i], v[i - 1 : 0 : -1])
        k[i] = (-da[i] / h - conv) / (0.5 * a0)
    # A one-sided derivative at the last sample sees sawtooth round-off of
    # the input amplified by 1/h^2; extrapolate from the interior instead.
    k[-1] = 3 * k[-2] - 3 * k[-3] + k[-4]
    return Kernel(h, k)


def forward_solve(k: Kernel, a0: float, n_steps: int) -> TimeSeries:
    """Integrate da/dt = -(K * a)(t) from a(0) = a0 for ``n_steps`` steps.

    Trapezoidal rule in time with trapezoidal convolution quadrature.  The
    implicit corrector is linear in the new sample, so it is solved in
    closed form instead of iterated.
    """
    if not np.isfinite(a0):
        raise ContractError("a0 must be finite")
    if n_steps + 1 > len(k):
        raise ContractError(f"kernel covers {len(k)} samples, {n_steps + 1} requested")
    h = k.dt
    kv = k.values
    a = np.zeros(n_steps + 1)
    f = np.zeros(n_steps + 1)
    a[0] = a0
    denom = 1.0 + 0.25 * h * h * kv[0]
    for m in range(1, n_steps + 1):
        s = -h * (0.5 * kv[m] * a[0] + np.dot(kv[m - 1 : 0 : -1], a[1:m]))
        a[m] = (a[m - 1] + 0.5 * h * (f[m - 1] + s)) / denom
        f[m] = s - 0.5 * h * kv[0] * a[m]
    return TimeSeries(h, a, {"kernel_gamma": k.gamma})


def damp_kernel(k: Kernel, gamma: float) -> Kernel:
    """Pointwise exp(-gamma tau) K(tau)."""
    if not gamma >= 0:
        raise InvalidSpecError("gamma must be non-negative")
    return replace(k, values=np.exp(-gamma * k.taus) * k.values, gamma=k.gamma + gamma)


def predict_modified(a_unpert: TimeSeries, gamma: float) -> TimeSeries:
    """a -> K -> exp(-gamma tau) K -> a~ with a~(0) = a(0)."""
    k = extract_kernel(a_unpert)
    out = forward_solve(damp_kernel(k, gamma), a_unpert.values[0], len(a_unpert) - 1)
    return out.with_values(out.values, gamma=gamma)


def l2_distance(x: np.ndarray, y: np.ndarray, dt: float) -> float:
    return float(np.sqrt(np.sum((np.asarray(x) - np.asarray(y)) ** 2) * dt))


def l2_norm(series: TimeSeries) -> float:
    return float(np.sqrt(np.sum(series.values**2) * series.dt))


def check_same_grid(a: TimeSeries, b: TimeSeries):
    if len(a) != len(b) or not np.isclose(a.dt, b.dt, rtol=1e-12, atol=0.0):
        raise ContractError("series are on different grids")


def fit_gamma(
    a_unpert: TimeSeries,
    a_pert: TimeSeries,
    gamma_max: float = 10.0,
    n_scan: int = 40,
    rtol: float = 1e-5,
) -> GammaFit:
    """Kernel damping gamma >= 0 minimizing the L2 distance to ``a_pert``.

    Scan on [0, gamma_max], golden-section polish; if the best scan point
    is gamma_max the range grows tenfold once.  ``at_boundary`` flags a
    minimum still on the upper end.
    """
    check_same_grid(a_unpert, a_pert)
    k = extract_kernel(a_unpert)
    a0 = a_unpert.values[0]
    target = a_pert.values
    nsteps = len(a_unpert) - 1
    h = a_unpert.dt

    def objective(g):
        pred = forward_solve(damp_kernel(k, g), a0, nsteps).values
        return float(np.sum((pred - target) ** 2) * h)

    upper = gamma_max
    best = minimize_on_grid(objective, nonnegative_grid(upper, n_scan), rtol)
    if best.at_boundary and best.x == upper:
        upper = 10 * gamma_max
        best = minimize_on_grid(objective, nonnegative_grid(upper, n_scan), rtol)
    return GammaFit(
        gamma=best.x,
        l2_error=float(np.sqrt(best.fx)),
        bracket=best.bracket,
        iterations=best.iterations,
        at_boundary=best.at_boundary and best.x == upper,
    )
