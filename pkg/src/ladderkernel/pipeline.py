"""Batch pipeline: simulate every lambda, run the analyses, write artifacts.

Output layout below ``out_dir``::

    series/mode{k}_lam{lam}.csv (+ .json)   p_q(t), rescaled for rho2
    profile/profile_lam{lam}.csv            t, p_1 .. p_L
    rungs/rung{l}_lam{lam}.csv (+ .json)    requested single rungs
    spectral/dos.csv, spectral/ldos_lam{lam}.csv, spectral/vmatrix.csv
    kernel/kernel_unperturbed.csv
    fits/gamma_lam{lam}.json, fits/prediction_lam{lam}.csv,
    fits/damping_lam{lam}.json, fits/feasibility_lam{lam}.json
    plot/fig*_like*.csv                     written by emit_plotdata
    manifest.json
"""

from __future__ import annotations

import logging
import shutil
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import io
from .comparators import damping_feasibility, fit_damping
from .config import ExperimentConfig
from .dynamics import InitialStateSpec, TimeSeries, evolve_many, make_state, rescale_to, time_grid
from .errors import ContractError
from .kernel import extract_kernel, fit_gamma, forward_solve, damp_kernel, l2_norm
from .lattice import LadderSpec, build_h0, build_sz_mode, build_sz_rung, build_total, build_v
from .spectral import diagonalize, dos_histogram, ldos_histogram, sparseness, v_in_eigenbasis, window_weight

log = logging.getLogger(__name__)

__all__ = ["RunManifest", "run_experiment", "emit_plotdata", "ALL_STEPS"]

ALL_STEPS = frozenset({"series", "profile", "kernel", "fits", "dos", "ldos", "vmatrix"})


def lam_label(lam: float) -> str:
    return f"{lam:g}"


@dataclass
class RunManifest:
    config_hash: str
    state_kind: str
    lambdas: list
    files: list = field(default_factory=list)
    artifacts: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def comparable(self) -> dict:
        """Everything except wall-clock timings."""
        d = self.to_dict()
        d.pop("timings")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunManifest":
        return cls(**d)

    @classmethod
    def load(cls, path) -> "RunManifest":
        return cls.from_dict(io.read_json(path))


def ladder_spec(cfg: ExperimentConfig, lam: float = 0.0) -> LadderSpec:
    lad = cfg.ladder
    return LadderSpec(lad.L, lad.J_par, lad.J_perp, lam, lad.bond_scale)


def state_spec(cfg: ExperimentConfig) -> InitialStateSpec:
    st = cfg.state
    return InitialStateSpec(st.kind, st.epsilon, st.beta, st.B, st.mid_rung)


@dataclass
class _LambdaResult:
    lam: float
    series: TimeSeries | None = None
    profile: np.ndarray | None = None
    rungs: dict = field(default_factory=dict)
    ldos: object = None


def _simulate_lambda(cfg, lam, steps, h0_spectrum):
    spec = ladder_spec(cfg, lam)
    h = build_total(spec)
    spectrum = diagonalize(h)
    rho = make_state(spec, state_spec(cfg), h, spectrum)
    res = _LambdaResult(lam)
    if "ldos" in steps:
        lo = h0_spectrum.all_energies()[0]
        res.ldos = ldos_histogram(h0_spectrum, rho, cfg.diagnostics.bin_width, lo=lo)
    if "series" in steps:
        times = time_grid(cfg.grid.t_max, cfg.grid.dt)
        ops = [build_sz_mode(spec, cfg.observable.mode)]
        extra = list(cfg.observable.rungs or [])
        ops += [build_sz_rung(spec, l) for l in extra]
        n_prof = spec.L if "profile" in steps else 0
        ops += [build_sz_rung(spec, l) for l in range(1, n_prof + 1)]
        vals = evolve_many(spectrum, rho, ops, times)
        meta = {"lambda": lam, "mode": cfg.observable.mode, "state": cfg.state.kind}
        res.series = TimeSeries(cfg.grid.dt, vals[0], meta)
        for i, l in enumerate(extra):
            res.rungs[l] = TimeSeries(cfg.grid.dt, vals[1 + i], {"lambda": lam, "rung": l, "state": cfg.state.kind})
        if n_prof:
            res.profile = vals[1 + len(extra) :]
    return res


def _state_meta(cfg):
    st = cfg.state
    if st.kind == "rho1":
        return {"epsilon": st.epsilon}
    return {"beta": st.beta, "B": st.B}


def run_experiment(
    cfg: ExperimentConfig,
    out_dir=None,
    threads: int = 1,
    steps=ALL_STEPS,
) -> RunManifest:
    """Run the requested ``steps`` (intersected with the config toggles)."""
    out = Path(out_dir if out_dir is not None else cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    an = cfg.analysis
    steps = set(steps)
    toggles = {
        "dos": an.dos,
        "ldos": an.ldos,
        "vmatrix": an.vmatrix,
        "profile": an.profile,
        "fits": an.kernel_fit or an.damping_fit or an.feasibility,
    }
    steps = {s for s in steps if toggles.get(s, True)}
    if steps & {"kernel", "fits", "profile"}:
        steps.add("series")
    if steps & {"kernel", "fits"} and 0.0 not in cfg.lambdas:
        raise ContractError("kernel extraction and fits need lambda = 0 in the config")

    manifest = RunManifest(cfg.hash(), cfg.state.kind, list(cfg.lambdas))
    files = []
    timings = {}

    def record(path):
        files.append(Path(path).relative_to(out).as_posix())
        return files[-1]

    t0 = time.perf_counter()
    h0_spectrum = None
    if steps & {"dos", "ldos", "vmatrix"}:
        spec0 = ladder_spec(cfg)
        h0_spectrum = diagonalize(build_h0(spec0))
        manifest.diagnostics["dim"] = h0_spectrum.dim
    timings["h0_diagonalization"] = time.perf_counter() - t0

    window = tuple(cfg.diagnostics.dos_window)
    if "dos" in steps:
        t = time.perf_counter()
        hist = dos_histogram(h0_spectrum, cfg.diagnostics.bin_width)
        manifest.artifacts["dos"] = record(io.write_histogram(out / "spectral/dos.csv", hist))
        manifest.diagnostics["dos_window_weight"] = window_weight(hist, window)
        timings["dos"] = time.perf_counter() - t
    if "vmatrix" in steps:
        t = time.perf_counter()
        thr = cfg.diagnostics.sparseness_threshold
        m = v_in_eigenbasis(build_v(ladder_spec(cfg)), h0_spectrum)
        manifest.diagnostics["sparseness"] = sparseness(m, thr)
        manifest.diagnostics["sparseness_threshold"] = thr
        manifest.diagnostics["sparseness_scan"] = {f"{s:g}": sparseness(m, s) for s in (thr * 1e-2, thr, thr * 1e2)}
        manifest.artifacts["vmatrix"] = record(io.write_triplets(out / "spectral/vmatrix.csv", m, thr))
        timings["vmatrix"] = time.perf_counter() - t

    t = time.perf_counter()
    if steps & {"series", "ldos"}:
        with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
            results = list(pool.map(lambda lam: _simulate_lambda(cfg, lam, steps, h0_spectrum), cfg.lambdas))
    else:
        results = []
    timings["simulation"] = time.perf_counter() - t

    summary = {lam_label(r.lam): {"lambda": r.lam} for r in results}
    if "ldos" in steps:
        manifest.artifacts["ldos"] = {}
        for r in results:
            key = lam_label(r.lam)
            path = io.write_histogram(out / f"spectral/ldos_lam{key}.csv", r.ldos)
            manifest.artifacts["ldos"][key] = record(path)
            summary[key]["ldos_window_weight"] = window_weight(r.ldos, window)

    series = {}
    if "series" in steps:
        ref_lam = 0.0 if 0.0 in cfg.lambdas else cfg.lambdas[0]
        ref = next(r for r in results if r.lam == ref_lam)
        manifest.artifacts["reference_lambda"] = ref_lam
        manifest.artifacts["series"] = {}
        for r in results:
            key = lam_label(r.lam)
            s = r.series.with_values(r.series.values, **_state_meta(cfg), raw_p0=float(r.series.values[0]))
            if cfg.state.kind == "rho2":
                s = rescale_to(s, ref.series.values[0])
            series[r.lam] = s
            summary[key]["p0"] = float(s.values[0])
            path = out / f"series/mode{cfg.observable.mode}_lam{key}.csv"
            p, side = io.write_timeseries(path, s)
            manifest.artifacts["series"][key] = record(p)
            record(side)
            for l, rs in r.rungs.items():
                p, side = io.write_timeseries(out / f"rungs/rung{l}_lam{key}.csv", rs)
                record(p)
                record(side)
        if "profile" in steps:
            manifest.artifacts["profile"] = {}
            for r in results:
                key = lam_label(r.lam)
                header = ["t"] + [f"p_{l}" for l in range(1, cfg.ladder.L + 1)]
                cols = [r.series.times] + list(r.profile)
                path = io.write_table(out / f"profile/profile_lam{key}.csv", header, cols)
                manifest.artifacts["profile"][key] = record(path)

    if steps & {"kernel", "fits"}:
        t = time.perf_counter()
        unpert = series[0.0]
        if cfg.grid.fit_window is not None:
            n = int(np.floor(cfg.grid.fit_window / cfg.grid.dt + 1e-9)) + 1
            unpert = unpert.truncated(n)
        kern = extract_kernel(unpert)
        manifest.artifacts["kernel"] = record(io.write_kernel(out / "kernel/kernel_unperturbed.csv", kern))
        if "fits" in steps:
            _run_fits(cfg, series, unpert, kern, out, manifest, summary, record)
        timings["fits"] = time.perf_counter() - t

    manifest.summary = summary
    manifest.files = files
    manifest.timings = timings
    io.write_json(out / "manifest.json", manifest.to_dict())
    return manifest


def _run_fits(cfg, series, unpert, kern, out, manifest, summary, record):
    an = cfg.analysis
    gmax = cfg.diagnostics.gamma_max
    n = len(unpert)
    for key in ("gamma", "prediction", "damping", "feasibility"):
        manifest.artifacts[key] = {}
    for lam in cfg.lambdas:
        key = lam_label(lam)
        pert = series[lam].truncated(n)
        row = summary[key]
        if an.kernel_fit:
            fit = fit_gamma(unpert, pert, gamma_max=gmax)
            pred = forward_solve(damp_kernel(kern, fit.gamma), unpert.values[0], n - 1)
            row.update(gamma=fit.gamma, kernel_l2=fit.l2_error, kernel_rel_l2=fit.l2_error / l2_norm(pert))
            row["gamma_at_boundary"] = fit.at_boundary
            manifest.artifacts["gamma"][key] = record(io.write_json(out / f"fits/gamma_lam{key}.json", fit.to_dict()))
            path = io.write_table(
                out / f"fits/prediction_lam{key}.csv",
                ["t", "data", "prediction"],
                [pert.times, pert.values, pred.values],
            )
            manifest.artifacts["prediction"][key] = record(path)
        if an.damping_fit:
            const = fit_damping(unpert, pert, "constant", gamma_max=gmax)
            tcl = fit_damping(unpert, pert, "tcl", gamma_max=gmax)
            row.update(Gamma=const.params["Gamma"], constant_l2=const.l2_error, tcl_l2=tcl.l2_error)
            row["tcl_params"] = tcl.params
            doc = {"constant": const.to_dict(), "tcl": tcl.to_dict()}
            manifest.artifacts["damping"][key] = record(io.write_json(out / f"fits/damping_lam{key}.json", doc))
        if an.feasibility:
            rep = damping_feasibility(unpert, pert)
            row.update(verdict=rep.verdict, fraction_above=rep.fraction_above)
            path = io.write_json(out / f"fits/feasibility_lam{key}.json", rep.to_dict())
            manifest.artifacts["feasibility"][key] = record(path)


OFFSET_STEP = {"rho1": -0.1, "rho2": -0.05}


def emit_plotdata(manifest: RunManifest, out_dir, offsets: bool = False, normalize: bool = False, epsilon=None):
    """Multi-column CSVs mirroring the figures: evolution curves (fig3),
    data vs kernel prediction (fig6), profiles (fig2), DOS/LDOS (fig4) and
    eigenbasis triplets (fig5).  Returns the written paths.
    """
    out = Path(out_dir)
    art = manifest.artifacts
    listed = []
    for key in ("series", "prediction", "profile", "ldos"):
        listed += list(art.get(key, {}).values())
    listed += [art[k] for k in ("dos", "vmatrix") if k in art]
    missing = [p for p in listed if not (out / p).is_file()]
    if "series" not in art:
        missing.append("series/* (no simulated curves in manifest)")
    if missing:
        raise ContractError("missing artifacts: " + ", ".join(missing))

    keys = [lam_label(l) for l in manifest.lambdas]
    curves = {k: io.read_timeseries(out / art["series"][k]) for k in keys}
    ref = curves[lam_label(art["reference_lambda"])]
    scale = 1.0
    if normalize:
        if manifest.state_kind == "rho1" and epsilon is not None:
            scale = 1.0 / (-0.5 * epsilon)
        else:
            scale = 1.0 / ref.values[0]
    written = []
    t = ref.times
    plot = out / "plot"
    written.append(
        io.write_table(plot / "fig3_like.csv", ["t"] + [f"lam{k}" for k in keys], [t] + [scale * curves[k].values for k in keys])
    )
    if art.get("prediction"):
        step = OFFSET_STEP[manifest.state_kind] if offsets else 0.0
        header, cols = ["t"], None
        for i, k in enumerate(keys):
            _, tab = io.read_table(out / art["prediction"][k])
            if cols is None:
                cols = [tab[:, 0]]
            header += [f"data_lam{k}", f"prediction_lam{k}"]
            cols += [scale * tab[:, 1] + i * step, scale * tab[:, 2] + i * step]
        written.append(io.write_table(plot / "fig6_like.csv", header, cols))
    for k, rel in art.get("profile", {}).items():
        header, tab = io.read_table(out / rel)
        cols = [tab[:, 0]] + [scale * tab[:, j] for j in range(1, tab.shape[1])]
        written.append(io.write_table(plot / f"fig2_like_lam{k}.csv", header, cols))
    if "dos" in art:
        _, dos = io.read_table(out / art["dos"])
        header, cols = ["E", "dos"], [dos[:, 0], dos[:, 1]]
        for k, rel in art.get("ldos", {}).items():
            _, ld = io.read_table(out / rel)
            if len(ld) != len(dos):
                raise ContractError(f"LDOS {rel} does not share the DOS binning")
            header.append(f"ldos_lam{k}")
            cols.append(ld[:, 1])
        written.append(io.write_table(plot / "fig4_like.csv", header, cols))
    if "vmatrix" in art:
        dst = plot / "fig5_like.csv"
        shutil.copyfile(out / art["vmatrix"], dst)
        written.append(dst)
    return written
