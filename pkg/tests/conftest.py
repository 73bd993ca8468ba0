import numpy as np
import pytest

from scalewave import RadialGrid

# criterion number -> (title, outcome, seconds)
_CRITERIA: dict[int, tuple[str, str, float]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    num, title = mark.args
    if rep.when == "setup" and not rep.passed:
        _CRITERIA[num] = (title, "FAIL", rep.duration)
    elif rep.when == "call":
        _CRITERIA[num] = (title, "PASS" if rep.passed else "FAIL", rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, state, secs = _CRITERIA[num]
        tr.write_line(f"{state}  criterion {num:2d}  {title}  ({secs:.1f} s)")


@pytest.fixture(scope="session")
def grid3():
    return RadialGrid.build(3)


@pytest.fixture(scope="session")
def small_grid3():
    return RadialGrid.build(3, 1e-4, 64.0, 64, 64)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
