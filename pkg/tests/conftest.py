from __future__ import annotations

import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).resolve().parent
sys.path.insert(0, str(TESTS))

DATA = TESTS / "data"


@pytest.fixture(scope="session")
def synthetic_manifest(tmp_path_factory) -> Path:
    from idrmetrics.synthetic import write_fixture

    return write_fixture(tmp_path_factory.mktemp("synthetic"))


_CRITERIA: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, title): acceptance criterion checked by the test")


def pytest_runtest_logreport(report):
    marker = report.__dict__.get("criterion")
    if marker is None:
        return
    cid, title = marker
    prev = _CRITERIA.get(cid, (title, "PASS"))[1]
    failed = report.failed or (report.when == "call" and report.skipped)
    _CRITERIA[cid] = (title, "FAIL" if failed or prev == "FAIL" else "PASS")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_CRITERIA):
        title, status = _CRITERIA[cid]
        terminalreporter.write_line(f"{status}  {cid}  {title}")
