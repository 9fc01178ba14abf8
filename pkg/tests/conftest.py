import os
import sys

import pytest

from treezeros.atlas import enumerate_zero_set


@pytest.fixture(autouse=True, scope="session")
def _cache_dir(tmp_path_factory):
    os.environ["TREEZEROS_CACHE_DIR"] = str(tmp_path_factory.mktemp("cache"))


@pytest.fixture(scope="session")
def cayley11():
    """All Cayley zeros for (d, b) = (2, 2), depths 0..11."""
    return enumerate_zero_set(2, 2, 11, "cayley")


@pytest.fixture(scope="session")
def spherical6():
    return enumerate_zero_set(2, 2, 6, "spherical")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.format_line(n))
