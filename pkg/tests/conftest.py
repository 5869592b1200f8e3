import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("repro", derandomize=True, deadline=None)
settings.load_profile("repro")


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(id, title): acceptance criterion")
    config._acceptance = {}


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("acceptance")
    if marker is None or call.when == "teardown":
        return
    key = marker.args
    failed = call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception)
    results = item.config._acceptance
    results[key] = results.get(key, True) and not failed


def pytest_terminal_summary(terminalreporter, config):
    results = getattr(config, "_acceptance", {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for (cid, title), ok in sorted(results.items()):
        terminalreporter.write_line(f"{cid} {'PASS' if ok else 'FAIL'}  {title}")
