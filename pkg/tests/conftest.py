"""Acceptance bookkeeping: tests tagged ``@pytest.mark.criterion(n, title)`` are
summarised as one PASS/FAIL line per criterion at the end of the run."""

import collections

_results = collections.defaultdict(list)
_titles = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args[0]))
            _titles[mark.args[0]] = mark.args[1]


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or report.failed or report.skipped:
        _results[crit].append(report.passed and report.when == "call")


def pytest_terminal_summary(terminalreporter):
    if not _titles:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_titles):
        outcomes = _results.get(n, [])
        status = "PASS" if outcomes and all(outcomes) else "FAIL" if outcomes else "NOT RUN"
        terminalreporter.write_line(f"criterion {n}: {status}  {_titles[n]}")
