import os

import pytest
from hypothesis import HealthCheck, settings

from qcollide.model import ModelParams

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", deadline=None, max_examples=400)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

FIG3 = ModelParams()  # partial-swap sweep parameters
FIG4 = ModelParams(B2=0.15)  # random-ensemble parameters

_RESULTS = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """Record one acceptance line; printed again in the terminal summary."""
    lines = request.config.stash.setdefault(_RESULTS, [])

    def record(criterion: str, ok: bool, detail: str) -> bool:
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {criterion}: {detail}"
        print(line)
        lines.append(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_RESULTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
