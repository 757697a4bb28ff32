import numpy as np
import pytest

from eitsim.dynamics import build_liouvillian, steady_state
from eitsim.model import fig2_params, fig3_params


@pytest.fixture(scope="session")
def fig2():
    return fig2_params()


@pytest.fixture(scope="session")
def fig3():
    return fig3_params()


@pytest.fixture(scope="session")
def fig2_solution(fig2):
    lv = build_liouvillian(fig2, fig2.space())
    return lv, steady_state(lv)


@pytest.fixture(scope="session")
def fig3_solution(fig3):
    lv = build_liouvillian(fig3, fig3.space())
    return lv, steady_state(lv)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines):
            terminalreporter.write_line(lines[key])
