import pytest

from fpu_pulses import bvp, dispersion
from fpu_pulses.normalform import normal_form_coeffs
from fpu_pulses.potentials import PotentialSpec

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def critical():
    return dispersion.find_critical()


@pytest.fixture(scope="session")
def even_spec():
    return PotentialSpec(0.0, 0.0, 1.0, 1.0)


@pytest.fixture(scope="session")
def coeffs(critical, even_spec):
    return normal_form_coeffs(critical, even_spec)


@pytest.fixture(scope="session")
def family_timed(critical, coeffs, even_spec):
    """Continuation over the standard epsilon grid, solved once per session."""
    from fpu_pulses import verify

    return verify.solve_family(critical, coeffs, even_spec)


@pytest.fixture(scope="session")
def family(family_timed):
    return family_timed[0]


@pytest.fixture(scope="session")
def profile_004(family):
    return next(s for s in family if abs(s.epsilon - 0.04) < 1e-12)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
