import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "repo", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "repo"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def criterion(request):
    """Record one acceptance-criterion outcome for the terminal summary."""
    store = request.config.stash.setdefault(_CRITERIA, {})

    def record(number: int, title: str, ok: bool, note: str = ""):
        store[number] = (title, bool(ok), note)
        print(f"criterion {number} ({title}): {'PASS' if ok else 'FAIL'} {note}".rstrip())
        return ok

    return record


_CRITERIA = pytest.StashKey[dict]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    store = config.stash.get(_CRITERIA, {})
    if not store:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(store):
        title, ok, note = store[n]
        terminalreporter.write_line(f"criterion {n} ({title}): {'PASS' if ok else 'FAIL'} {note}".rstrip())
