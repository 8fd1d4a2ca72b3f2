"""Acceptance criteria 1-10 at pinned tolerances.

Each check prints one line ``criterion N: PASS|FAIL  <numbers>``; the
lines are repeated in the pytest terminal summary.  Run this file
directly to get only the report.
"""

import time

import numpy as np
import pytest

from ladderkernel import (
    InitialStateSpec,
    LadderSpec,
    build_h0,
    build_sz_mode,
    build_total,
    build_v,
    diagonalize,
    dos_histogram,
    evolve_expectation,
    ldos_histogram,
    make_rho1,
    make_rho2,
    slope_at_zero,
    sparseness,
    v_in_eigenbasis,
    window_weight,
)
from ladderkernel.comparators import damping_feasibility, fit_damping
from ladderkernel.config import ExperimentConfig
from ladderkernel.dynamics import TimeSeries
from ladderkernel.kernel import Kernel, extract_kernel, fit_gamma, forward_solve, l2_norm
from ladderkernel.lattice import commutator
from ladderkernel.pipeline import run_experiment

SCALE = 2.0  # bond scale of the shipped configuration
REPORT: dict[int, str] = {}


def report(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    REPORT[n] = line
    print(line)
    return ok


def _L6(lam=0.0):
    return LadderSpec(6, lam=lam, bond_scale=SCALE)


def _rho1_mode(lam, t_max=50.0, dt=0.05, k=1):
    spec = _L6(lam)
    sp = diagonalize(build_total(spec))
    rho = make_rho1(spec, InitialStateSpec("rho1", epsilon=0.01), sp)
    return evolve_expectation(sp, rho, build_sz_mode(spec, k), t_max, dt)


def _damped(t, gamma):
    big = np.sqrt(1 - gamma**2 / 4)
    return np.exp(-gamma * t / 2) * (np.cos(big * t) + gamma / (2 * big) * np.sin(big * t))


def check_1():
    t0 = time.perf_counter()
    sp0 = diagonalize(build_h0(_L6()))
    w = window_weight(dos_histogram(sp0, 1.0), (-3.0, 3.0))
    elapsed = time.perf_counter() - t0
    ok = abs(w - 0.57) <= 0.03 and elapsed < 120 and sp0.dim == 4096
    return report(1, ok, f"DOS weight in [-3,3] = {w:.4f} (0.57 +- 0.03), d = {sp0.dim}, {elapsed:.1f} s (< 120 s)")


def check_2():
    spec = _L6(0.1)
    sp0 = diagonalize(build_h0(spec))
    rho = make_rho2(spec, InitialStateSpec("rho2", beta=0.1, B=5.0), build_total(spec))
    h = ldos_histogram(sp0, rho, 1.0)
    w = window_weight(h, (-3.0, 3.0))
    return report(2, abs(w - 0.54) <= 0.05, f"rho2 LDOS weight in [-3,3] = {w:.4f} (0.54 +- 0.05), lambda = 0.1")


def check_3():
    spec = _L6()
    m = v_in_eigenbasis(build_v(spec), diagonalize(build_h0(spec)))
    s = {t: sparseness(m, t) for t in (1e-12, 1e-10, 1e-8)}
    spread = max(s.values()) / min(s.values()) - 1
    ok = abs(s[1e-10] - 0.02) <= 0.01 and spread <= 0.10
    vals = ", ".join(f"{t:g}: {v:.5f}" for t, v in s.items())
    return report(3, ok, f"sparseness {vals} (0.02 +- 0.01), spread {spread:.2%} (<= 10%)")


def check_4():
    worst = 0.0
    for L in (2, 3, 4):
        spec = LadderSpec(L, bond_scale=SCALE)
        v = build_v(spec)
        for k in range(L):
            c = commutator(v, build_sz_mode(spec, k))
            worst = max([worst] + [float(abs(b).max()) for b in c.blocks.values() if b.nnz])
    return report(4, worst <= 1e-12, f"max |[V, S^z_q]| over L <= 4, all q = {worst:.2e} (<= 1e-12)")


def check_5():
    worst, ratios = 0.0, []
    for lam in (0.0, 0.1, 0.4):
        slopes = []
        for dt in (0.005, 0.0025):
            p = _rho1_mode(lam, t_max=2 * dt, dt=dt)
            slopes.append(abs(slope_at_zero(p)) / np.abs(p.values).max())
        worst = max(worst, slopes[0])
        ratios.append(slopes[0] / slopes[1])
    ok = worst < 1e-6 and min(ratios) >= 3.5
    return report(
        5,
        ok,
        f"max |slope|/peak at dt=0.005 = {worst:.2e} (< 1e-6); halving dt shrinks it by "
        f"{min(ratios):.2f}..{max(ratios):.2f} (>= 4 expected for dt^2)",
    )


def check_6():
    dt = 0.01
    t = dt * np.arange(1001)
    k = extract_kernel(TimeSeries(dt, np.cos(t)))
    e_cos = float(np.abs(k.values - 1).max())
    a = forward_solve(Kernel(dt, np.exp(-0.5 * t)), 1.0, len(t) - 1)
    e_osc = float(np.abs(a.values - _damped(t, 0.5)).max())
    errs = []
    f = lambda s: np.exp(-0.1 * s**2) * np.cos(s) + 0.3 * np.cos(2.3 * s)  # noqa: E731
    for h in (0.02, 0.01):
        s = TimeSeries(h, f(h * np.arange(int(round(10 / h)) + 1)))
        back = forward_solve(extract_kernel(s), s.values[0], len(s) - 1)
        errs.append(float(np.abs(back.values - s.values).max()))
    ratio = errs[0] / errs[1]
    ok = e_cos < 1e-3 and e_osc < 1e-4 and 3.0 <= ratio <= 5.0
    return report(
        6,
        ok,
        f"K(cos) dev {e_cos:.1e} (< 1e-3); damped oscillator err {e_osc:.1e} (< 1e-4); "
        f"round-trip ratio {ratio:.2f} (in [3, 5])",
    )


def check_7():
    dt = 0.01
    a = TimeSeries(dt, np.cos(dt * np.arange(1001)))
    fit = fit_gamma(a, a.with_values(_damped(a.times, 0.3)))
    same = fit_gamma(a, a)
    ok = abs(fit.gamma - 0.3) <= 1e-3 and same.gamma < 1e-4
    return report(7, ok, f"gamma* = {fit.gamma:.6f} (0.3 +- 1e-3); identical input gamma* = {same.gamma:.1e} (< 1e-4)")


def check_8(series=None):
    series = series or {lam: _rho1_mode(lam) for lam in (0.0, 0.4)}
    r = damping_feasibility(series[0.0], series[0.4])
    return report(
        8,
        r.verdict == "damping-infeasible",
        f"lambda=0.4: |a_pert| > |a_unpert| on {r.fraction_above:.1%} of the grid (> 50%), "
        f"starts equal {r.starts_equal}; verdict {r.verdict}",
    )


def check_9(series=None):
    series = series or {lam: _rho1_mode(lam) for lam in (0.0, 0.1)}
    u, p = series[0.0], series[0.1]
    kern = fit_gamma(u, p)
    const = fit_damping(u, p, "constant")
    rel = kern.l2_error / l2_norm(p)
    ok = kern.l2_error < const.l2_error and rel <= 0.05
    return report(
        9,
        ok,
        f"lambda=0.1: kernel L2 {kern.l2_error:.4e} (gamma* {kern.gamma:.4f}) vs constant L2 "
        f"{const.l2_error:.4e} (Gamma* {const.params['Gamma']:.4f}); kernel relative residual {rel:.1%} (<= 5%)",
    )


def check_10(tmp_path=None):
    spec = _L6(0.4)
    sp = diagonalize(build_total(spec))
    rho = make_rho1(spec, InitialStateSpec(), sp)
    p = evolve_expectation(sp, rho, build_sz_mode(spec, 0), 50.0, 0.05).values
    drift = float(np.abs(p - p[0]).max() / abs(p[0]))
    again = evolve_expectation(diagonalize(build_total(spec)), rho, build_sz_mode(spec, 1), 50.0, 0.05).values
    first = evolve_expectation(sp, rho, build_sz_mode(spec, 1), 50.0, 0.05).values
    same_series = np.array_equal(first, again)
    same_manifest = True
    if tmp_path is not None:
        cfg = ExperimentConfig.from_dict({"ladder": {"L": 4}, "lambdas": [0.0, 0.3], "grid": {"t_max": 10.0}})
        m1 = run_experiment(cfg, tmp_path / "a")
        m2 = run_experiment(cfg, tmp_path / "b", threads=2)
        same_manifest = m1.comparable() == m2.comparable()
        for f in m1.files:
            same_manifest &= (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    ok = drift <= 1e-10 and same_series and same_manifest
    return report(
        10,
        ok,
        f"q=0 relative drift {drift:.1e} (<= 1e-10); repeated evolution bitwise equal {same_series}; "
        f"repeated runs byte-identical {same_manifest}",
    )


@pytest.fixture(scope="module")
def mode_series():
    return {lam: _rho1_mode(lam) for lam in (0.0, 0.1, 0.4)}


class TestAcceptance:
    def test_criterion_1_dos_window_weight(self):
        assert check_1()

    def test_criterion_2_ldos_window_weight(self):
        assert check_2()

    def test_criterion_3_sparseness(self):
        assert check_3()

    def test_criterion_4_commutation(self):
        assert check_4()

    def test_criterion_5_zero_initial_slope(self):
        assert check_5()

    def test_criterion_6_kernel_analytics(self):
        assert check_6()

    def test_criterion_7_fit_self_consistency(self):
        assert check_7()

    def test_criterion_8_damping_infeasible(self, mode_series):
        assert check_8(mode_series), REPORT[8]

    def test_criterion_9_kernel_beats_constant_damping(self, mode_series):
        assert check_9(mode_series), REPORT[9]

    def test_criterion_10_conservation_and_determinism(self, tmp_path):
        assert check_10(tmp_path)


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    series = {lam: _rho1_mode(lam) for lam in (0.0, 0.1, 0.4)}
    for fn in (check_1, check_2, check_3, check_4, check_5, check_6, check_7):
        fn()
    check_8(series)
    check_9(series)
    with tempfile.TemporaryDirectory() as d:
        check_10(Path(d))
