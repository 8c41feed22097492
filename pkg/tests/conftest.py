import os

import pytest
from hypothesis import HealthCheck, settings

from fedosov.config import load_config
from fedosov.fedosov import ChartData, build_state

settings.register_profile(
    "repo",
    max_examples=int(os.environ.get("HYPOTHESIS_EXAMPLES", "40")),
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

STD = [[0, 1], [-1, 0]]


@pytest.fixture(scope="session")
def flat_cfg():
    return load_config("flat2d")


@pytest.fixture(scope="session")
def curved_cfg():
    return load_config("curved2d")


@pytest.fixture(scope="session")
def flat8(flat_cfg):
    return build_state(flat_cfg.chart)


@pytest.fixture(scope="session")
def flat6():
    return build_state(ChartData.build(STD, cap=6))


@pytest.fixture(scope="session")
def curved(curved_cfg):
    return build_state(curved_cfg.chart)


@pytest.fixture(scope="session")
def flat_omega_c():
    """Flat chart with Omega_1 = 3 dx1^dx2."""
    return build_state(ChartData.build(STD, Omega={1: "3 @ dx1&dx2"}, cap=6))


_ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def record(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash.setdefault(_ACCEPTANCE, [])

    def _record(n: int, text: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {text}"
        if detail and not ok:
            line += f" [{detail}]"
        print(line)
        lines.append((n, line))
        return ok

    return _record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
