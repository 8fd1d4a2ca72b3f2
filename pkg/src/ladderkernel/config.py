"""Experiment configuration: JSON schema, validation, defaults."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

from .dynamics import STATE_KINDS
from .errors import ConfigError

__all__ = [
    "LadderSection",
    "StateSection",
    "ObservableSection",
    "GridSection",
    "AnalysisSection",
    "DiagnosticsSection",
    "ExperimentConfig",
    "load_config",
    "default_config",
]


@dataclass
class LadderSection:
    L: int = 6
    J_par: float = 1.0
    J_perp: float = 1.0
    bond_scale: float = 2.0


@dataclass
class StateSection:
    kind: str = "rho1"
    epsilon: float = 0.01
    beta: float = 0.1
    B: float = 5.0
    mid_rung: int | None = None


@dataclass
class ObservableSection:
    mode: int = 1
    rungs: list | None = None


@dataclass
class GridSection:
    dt: float = 0.05
    t_max: float = 50.0
    fit_window: float | None = None


@dataclass
class AnalysisSection:
    dos: bool = True
    ldos: bool = True
    vmatrix: bool = True
    profile: bool = True
    kernel_fit: bool = True
    damping_fit: bool = True
    feasibility: bool = True


@dataclass
class DiagnosticsSection:
    bin_width: float = 1.0
    dos_window: list = field(default_factory=lambda: [-3.0, 3.0])
    sparseness_threshold: float = 1e-10
    gamma_max: float = 10.0


_SECTIONS = {
    "ladder": LadderSection,
    "state": StateSection,
    "observable": ObservableSection,
    "grid": GridSection,
    "analysis": AnalysisSection,
    "diagnostics": DiagnosticsSection,
}

# (type, optional) per field; floats accept ints
_TYPES = {
    "L": (int, False),
    "J_par": (float, False),
    "J_perp": (float, False),
    "bond_scale": (float, False),
    "kind": (str, False),
    "epsilon": (float, False),
    "beta": (float, False),
    "B": (float, False),
    "mid_rung": (int, True),
    "mode": (int, False),
    "rungs": (list, True),
    "dt": (float, False),
    "t_max": (float, False),
    "fit_window": (float, True),
    "bin_width": (float, False),
    "dos_window": (list, False),
    "sparseness_threshold": (float, False),
    "gamma_max": (float, False),
    "lambda": (float, False),
    "output_dir": (str, False),
}


def _coerce(value, path, name):
    typ, optional = _TYPES.get(name, (bool, False))
    if value is None:
        if optional:
            return None
        raise ConfigError(path, "must not be null")
    if typ is bool:
        if not isinstance(value, bool):
            raise ConfigError(path, "expected a boolean")
        return value
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(path, "expected an integer")
        return value
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, "expected a number")
        if not math.isfinite(value):
            raise ConfigError(path, "must be finite")
        return float(value)
    if typ is str:
        if not isinstance(value, str):
            raise ConfigError(path, "expected a string")
        return value
    if not isinstance(value, list):
        raise ConfigError(path, "expected a list")
    return list(value)


def _section(cls, data, path):
    if not isinstance(data, dict):
        raise ConfigError(path, "expected an object")
    known = {f.name for f in fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"{path}.{key}", "unknown field")
    kwargs = {k: _coerce(v, f"{path}.{k}", k) for k, v in data.items()}
    return cls(**kwargs)


@dataclass
class ExperimentConfig:
    ladder: LadderSection = field(default_factory=LadderSection)
    lambdas: list = field(default_factory=lambda: [0.0, 0.1, 0.2, 0.4, 0.7])
    state: StateSection = field(default_factory=StateSection)
    observable: ObservableSection = field(default_factory=ObservableSection)
    grid: GridSection = field(default_factory=GridSection)
    analysis: AnalysisSection = field(default_factory=AnalysisSection)
    diagnostics: DiagnosticsSection = field(default_factory=DiagnosticsSection)
    output_dir: str = "out"
    normalize: bool = False

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("$", "expected an object")
        known = {f.name for f in fields(cls)}
        for key in data:
            if key not in known:
                raise ConfigError(f"$.{key}", "unknown field")
        kwargs = {}
        for name, sec in _SECTIONS.items():
            if name in data:
                kwargs[name] = _section(sec, data[name], f"$.{name}")
        if "lambdas" in data:
            lams = data["lambdas"]
            if not isinstance(lams, list) or not lams:
                raise ConfigError("$.lambdas", "expected a non-empty list")
            kwargs["lambdas"] = [_coerce(v, f"$.lambdas[{i}]", "lambda") for i, v in enumerate(lams)]
        if "output_dir" in data:
            kwargs["output_dir"] = _coerce(data["output_dir"], "$.output_dir", "output_dir")
        if "normalize" in data:
            kwargs["normalize"] = _coerce(data["normalize"], "$.normalize", "normalize")
        cfg = cls(**kwargs)
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def validate(self) -> None:
        lad, st, ob, gr, dg = self.ladder, self.state, self.observable, self.grid, self.diagnostics
        if lad.L < 2:
            raise ConfigError("$.ladder.L", "must be >= 2")
        if lad.L > 8:
            raise ConfigError("$.ladder.L", "dense sector diagonalization supports L <= 8")
        if len(set(self.lambdas)) != len(self.lambdas):
            raise ConfigError("$.lambdas", "values must be distinct")
        if st.kind not in STATE_KINDS:
            raise ConfigError("$.state.kind", f"must be one of {list(STATE_KINDS)}")
        if st.kind == "rho1" and not st.epsilon > 0:
            raise ConfigError("$.state.epsilon", "must be positive")
        if st.kind == "rho2" and not st.beta >= 0:
            raise ConfigError("$.state.beta", "must be non-negative")
        if st.mid_rung is not None and not 1 <= st.mid_rung <= lad.L:
            raise ConfigError("$.state.mid_rung", f"must lie in 1..{lad.L}")
        if not 0 <= ob.mode <= lad.L - 1:
            raise ConfigError("$.observable.mode", f"must lie in 0..{lad.L - 1}")
        if ob.rungs is not None:
            for i, r in enumerate(ob.rungs):
                if isinstance(r, bool) or not isinstance(r, int) or not 1 <= r <= lad.L:
                    raise ConfigError(f"$.observable.rungs[{i}]", f"must be an integer in 1..{lad.L}")
        if not gr.dt > 0:
            raise ConfigError("$.grid.dt", "must be positive")
        if not gr.t_max > 0:
            raise ConfigError("$.grid.t_max", "must be positive")
        if gr.t_max / gr.dt < 4:
            raise ConfigError("$.grid.t_max", "grid needs at least 5 samples")
        if gr.fit_window is not None and not (4 * gr.dt <= gr.fit_window <= gr.t_max):
            raise ConfigError("$.grid.fit_window", "must lie in [4 dt, t_max]")
        if not dg.bin_width > 0:
            raise ConfigError("$.diagnostics.bin_width", "must be positive")
        if len(dg.dos_window) != 2 or not all(isinstance(x, (int, float)) for x in dg.dos_window):
            raise ConfigError("$.diagnostics.dos_window", "expected [E_lo, E_hi]")
        if not dg.dos_window[0] < dg.dos_window[1]:
            raise ConfigError("$.diagnostics.dos_window", "requires E_lo < E_hi")
        if not dg.sparseness_threshold > 0:
            raise ConfigError("$.diagnostics.sparseness_threshold", "must be positive")
        if not dg.gamma_max > 0:
            raise ConfigError("$.diagnostics.gamma_max", "must be positive")
        an = self.analysis
        if (an.kernel_fit or an.damping_fit or an.feasibility) and 0.0 not in self.lambdas:
            raise ConfigError("$.lambdas", "fits need the unperturbed curve: include 0.0")


def load_config(path) -> ExperimentConfig:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError("$", f"invalid JSON: {exc}") from None
    return ExperimentConfig.from_dict(data)


def default_config() -> ExperimentConfig:
    """The configuration shipped as ``ladderkernel/data/default_config.json``."""
    text = resources.files("ladderkernel").joinpath("data/default_config.json").read_text(encoding="utf-8")
    return ExperimentConfig.from_dict(json.loads(text))
