"""Shared pytest hooks: one pass/fail line per acceptance criterion."""

from collections import OrderedDict

_CRITERIA = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(number, title): ties a test to an acceptance criterion"
    )


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            number, title = m.args
            _CRITERIA.setdefault(number, {"title": title, "items": {}})
            _CRITERIA[number]["items"][item.nodeid] = None


def pytest_runtest_logreport(report):
    for entry in _CRITERIA.values():
        if report.nodeid in entry["items"]:
            prev = entry["items"][report.nodeid]
            if report.failed:
                entry["items"][report.nodeid] = "FAIL"
            elif report.when == "call" and prev is None:
                entry["items"][report.nodeid] = "SKIP" if report.skipped else "PASS"
            elif report.skipped and prev is None:
                entry["items"][report.nodeid] = "SKIP"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        states = list(entry["items"].values())
        if any(s == "FAIL" for s in states):
            verdict = "FAIL"
        elif states and all(s == "PASS" for s in states):
            verdict = "PASS"
        else:
            verdict = "INCOMPLETE"
        terminalreporter.write_line(
            f"criterion {number:>2} {verdict:<10} {entry['title']} ({len(states)} tests)"
        )
