import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    crit = item.get_closest_marker("criterion")
    if crit is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    n = crit.args[0]
    detail = dict(rep.user_properties).get("detail", "")
    ok = rep.passed
    prev = _criteria.get(n)
    if prev is not None:
        ok = ok and prev[0]
        detail = "; ".join(x for x in (prev[1], detail) if x)
    _criteria[n] = (ok, detail)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        ok, detail = _criteria[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
