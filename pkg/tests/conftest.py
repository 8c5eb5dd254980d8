import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qwtails.reference import C3PkSpec, exceptional_two_tail_instance, make_c3pk

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# filled by test_acceptance, reported once at the end of the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def grover():
    return make_c3pk(C3PkSpec(p=1 / 3, q=1 / 3, r=1 / 3, k=1))


@pytest.fixture
def nonrev():
    return make_c3pk(C3PkSpec(p=1 / 2, q=1 / 6, r=1 / 3, k=1))


@pytest.fixture
def exceptional():
    return exceptional_two_tail_instance()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
