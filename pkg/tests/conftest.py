import os

import pytest
from hypothesis import HealthCheck, settings

from zetalab.precision import PrecisionContext

settings.register_profile("zetalab", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("zetalab")

# keep the suite independent of any user cache
os.environ.pop("ZETALAB_CACHE_DIR", None)


@pytest.fixture(scope="session")
def ctx():
    return PrecisionContext(256)


@pytest.fixture(scope="session")
def ctx128():
    return PrecisionContext(128)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
