import pytest

from homspec.fixtures import fixture_config
from homspec.pipeline import build_field
from homspec.spectral import FilterSpec, PhaseMatchSpec, biphoton_amplitude, build_grid

ACCEPTANCE = {}


@pytest.fixture(scope="session")
def lab_field():
    """Biphoton amplitude for the laboratory setup on the default grid."""
    return build_field(fixture_config("empty"))


@pytest.fixture(scope="session")
def small_field():
    """Same field model on a coarse grid for fast property tests."""
    filt = FilterSpec()
    grid = build_grid(815.0, 2.5e14, 1024)
    return biphoton_amplitude(PhaseMatchSpec(22.0), filt, grid)


@pytest.fixture
def acceptance_report():
    def record(criterion, passed, detail):
        line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE[criterion] = line
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[key])
