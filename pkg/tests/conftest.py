import re

import pytest

_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    m = re.match(r"test_criterion_(\d+)_", item.name)
    if not m or item.module.__name__.rsplit(".", 1)[-1] != "test_acceptance":
        return
    n = int(m.group(1))
    doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
    prev = _ACCEPTANCE.get(n)
    failed = report.failed or (prev is not None and prev[0] == "FAIL")
    duration = (prev[2] if prev else 0.0) + report.duration
    _ACCEPTANCE[n] = ("FAIL" if failed else "PASS", doc, duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        status, doc, duration = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n}: {status}  {doc}  [{duration:.2f} s]")
