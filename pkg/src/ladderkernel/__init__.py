"""Relaxation dynamics of perturbed Heisenberg spin ladders and the
damped-memory-kernel model of the perturbation's effect."""

from .comparators import (
    constant_damping_predict,
    damping_feasibility,
    fit_damping,
    tcl_damping_predict,
)
from .config import ExperimentConfig, default_config, load_config
from .dynamics import (
    DensityMatrix,
    InitialStateSpec,
    TimeSeries,
    evolve_expectation,
    magnetization_profile,
    make_rho1,
    make_rho2,
    make_state,
    rescale_to,
    slope_at_zero,
)
from .errors import ConfigError, ContractError, InvalidSpecError, LadderError, SingularDeconvolutionError
from .kernel import GammaFit, Kernel, damp_kernel, extract_kernel, fit_gamma, forward_solve, predict_modified
from .lattice import (
    BlockedOperator,
    LadderSpec,
    build_h0,
    build_sz_mode,
    build_sz_rung,
    build_sz_total,
    build_total,
    build_v,
)
from .pipeline import RunManifest, emit_plotdata, run_experiment
from .spectral import (
    EigenbasisMatrix,
    Histogram,
    Spectrum,
    diagonalize,
    dos_histogram,
    ldos_histogram,
    sparseness,
    v_in_eigenbasis,
    window_weight,
)

__version__ = "0.1.0"
