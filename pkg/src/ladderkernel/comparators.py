"""Direct-damping predictions used as comparators for the kernel model.

Two families damp the unperturbed curve itself rather than its kernel:
a constant rate, a(t) exp(-Gamma t), and a time-dependent rate
Gamma(t) = g (1 - exp(-t / tau_c)) that vanishes at t = 0 and so keeps
the initial slope.  The second family is a stand-in parameterization, not
a derived expression.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import TimeSeries, slope_at_zero
from .errors import InvalidSpecError
from .kernel import check_same_grid, l2_distance
from .optimize import minimize_on_grid, nonnegative_grid

__all__ = [
    "DampingFit",
    "FeasibilityReport",
    "constant_damping_predict",
    "tcl_damping_predict",
    "tcl_rate",
    "fit_damping",
    "damping_feasibility",
]

TCL_NOTE = "Gamma(t) = g (1 - exp(-t/tau_c)): assumed family with Gamma(0) = 0"


@dataclass(frozen=True)
class DampingFit:
    model: str
    params: dict
    l2_error: float
    at_boundary: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": dict(self.params),
            "l2_error": self.l2_error,
            "at_boundary": self.at_boundary,
            "note": self.note,
        }


@dataclass(frozen=True)
class FeasibilityReport:
    fraction_above: float
    slope_unpert: float
    slope_pert: float
    starts_equal: bool
    verdict: str
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "fraction_above": self.fraction_above,
            "slope_unpert": self.slope_unpert,
            "slope_pert": self.slope_pert,
            "starts_equal": self.starts_equal,
            "verdict": self.verdict,
        }


def constant_damping_predict(a_unpert: TimeSeries, Gamma: float) -> TimeSeries:
    if not Gamma >= 0:
        raise InvalidSpecError("Gamma must be non-negative")
    return a_unpert.with_values(a_unpert.values * np.exp(-Gamma * a_unpert.times), model="constant", Gamma=Gamma)


def tcl_rate(t: np.ndarray, g: float, tau_c: float) -> np.ndarray:
    if tau_c == 0:
        return np.where(t > 0, g, 0.0)
    return g * -np.expm1(-t / tau_c)


def tcl_damping_predict(a_unpert: TimeSeries, g: float, tau_c: float) -> TimeSeries:
    """a(t) exp(-int_0^t Gamma), the integral by the cumulative trapezoidal rule."""
    if not (g >= 0 and tau_c >= 0):
        raise InvalidSpecError("g and tau_c must be non-negative")
    rate = tcl_rate(a_unpert.times, g, tau_c)
    integral = np.concatenate(([0.0], np.cumsum(0.5 * (rate[1:] + rate[:-1]) * a_unpert.dt)))
    return a_unpert.with_values(a_unpert.values * np.exp(-integral), model="tcl", g=g, tau_c=tau_c)


def _fit_constant(a_unpert, a_pert, gamma_max, rtol):
    def obj(G):
        return l2_distance(constant_damping_predict(a_unpert, G).values, a_pert.values, a_unpert.dt) ** 2

    best = minimize_on_grid(obj, nonnegative_grid(gamma_max), rtol)
    return DampingFit("constant", {"Gamma": best.x}, float(np.sqrt(best.fx)), best.at_boundary and best.x > 0)


def _fit_tcl(a_unpert, a_pert, gamma_max, rtol, log_tau=(-4.0, 3.0), n_tau=29):
    def obj(g, tau):
        return l2_distance(tcl_damping_predict(a_unpert, g, tau).values, a_pert.values, a_unpert.dt) ** 2

    # profile over log10(tau_c): the best g is found for each tau_c, so the
    # outer search never has to walk along the g-tau_c valley
    def best_g(u):
        return minimize_on_grid(lambda g: obj(g, 10.0**u), nonnegative_grid(gamma_max, 20), rtol)

    outer = minimize_on_grid(lambda u: best_g(u).fx, np.linspace(*log_tau, n_tau), rtol)
    inner = best_g(outer.x)
    return DampingFit(
        "tcl",
        {"g": inner.x, "tau_c": 10.0**outer.x},
        float(np.sqrt(inner.fx)),
        at_boundary=(inner.x == gamma_max),
        note=TCL_NOTE,
    )


def fit_damping(
    a_unpert: TimeSeries,
    a_pert: TimeSeries,
    model: str = "constant",
    gamma_max: float = 10.0,
    rtol: float = 1e-5,
) -> DampingFit:
    """Least-squares damping parameters for ``model`` in {"constant", "tcl"}."""
    check_same_grid(a_unpert, a_pert)
    if model == "constant":
        return _fit_constant(a_unpert, a_pert, gamma_max, rtol)
    if model == "tcl":
        return _fit_tcl(a_unpert, a_pert, gamma_max, rtol)
    raise InvalidSpecError(f"unknown damping model {model!r}")


def damping_feasibility(a_unpert: TimeSeries, a_pert: TimeSeries, start_rtol: float = 1e-8) -> FeasibilityReport:
    """Can any direct damping of ``a_unpert`` reproduce ``a_pert``?

    |a(t) exp(-int Gamma)| <= |a(t)| for every non-negative rate, so a
    perturbed curve that starts at the same value and lies above the
    unperturbed one in magnitude on most of the grid rules the family out.
    """
    check_same_grid(a_unpert, a_pert)
    u = a_unpert.values
    p = a_pert.values
    above = float(np.mean(np.abs(p) > np.abs(u)))
    starts_equal = bool(abs(p[0] - u[0]) <= start_rtol * max(abs(u[0]), 1e-300))
    sign = 1.0 if u[0] >= 0 else -1.0
    verdict = "damping-infeasible" if (above > 0.5 and starts_equal) else "damping-feasible"
    return FeasibilityReport(
        fraction_above=above,
        slope_unpert=sign * slope_at_zero(a_unpert),
        slope_pert=sign * slope_at_zero(a_pert),
        starts_equal=starts_equal,
        verdict=verdict,
    )
