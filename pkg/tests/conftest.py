import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ladderkernel import (  # noqa: E402
    InitialStateSpec,
    LadderSpec,
    build_h0,
    build_sz_mode,
    build_total,
    diagonalize,
    evolve_expectation,
    make_rho1,
)

# energy scale of the shipped default configuration (see LadderSpec.bond_scale)
DEFAULT_SCALE = 2.0


@pytest.fixture(scope="session")
def ladder6():
    return LadderSpec(6, bond_scale=DEFAULT_SCALE)


@pytest.fixture(scope="session")
def h0_spectrum6(ladder6):
    return diagonalize(build_h0(ladder6))


@pytest.fixture(scope="session")
def rho1_mode_series6(ladder6):
    """Slowest-mode curves for rho1 at L = 6 on the default grid, keyed by lambda."""
    out = {}
    a = build_sz_mode(ladder6, 1)
    for lam in (0.0, 0.1, 0.4):
        spec = ladder6.with_lambda(lam)
        sp = diagonalize(build_total(spec))
        rho = make_rho1(spec, InitialStateSpec("rho1"), sp)
        out[lam] = evolve_expectation(sp, rho, a, 50.0, 0.05, meta={"lambda": lam})
    return out


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import REPORT
    except ImportError:
        return
    if REPORT:
        terminalreporter.section("acceptance criteria")
        for n in sorted(REPORT):
            terminalreporter.write_line(REPORT[n])
