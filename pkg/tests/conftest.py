import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from statamoeba.presets import get_preset  # noqa: E402

settings.register_profile(
    "default",
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
    derandomize=True,
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def triangle():
    return get_preset("triangle")


@pytest.fixture(scope="session")
def fig4():
    return get_preset("fig4")


@pytest.fixture(scope="session")
def symmetric6():
    return get_preset("symmetric6")


@pytest.fixture(scope="session")
def degenerate6():
    return get_preset("degenerate6")


@pytest.fixture(scope="session")
def bump10():
    return get_preset("bump10")


# ---------------------------------------------------------------------------
# One PASS/FAIL line per acceptance criterion
# ---------------------------------------------------------------------------

_criteria: dict[str, list[bool]] = {}
_order: list[str] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion this test belongs to")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark and mark.args[0] not in _order:
            _order.append(mark.args[0])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.skipped:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _criteria.setdefault(mark.args[0], []).append(rep.passed)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for label in _order:
        results = _criteria.get(label)
        if results is None:
            tr.write_line(f"NOT RUN  {label}")
            continue
        status = "PASS" if all(results) else "FAIL"
        tr.write_line(f"{status:8} {label} ({sum(results)}/{len(results)} tests)")
