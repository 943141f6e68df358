"""Collects acceptance outcomes and prints one PASS/FAIL line per criterion."""

_criteria = {}  # nodeid -> [label, passed]


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is not None and marker.args:
            _criteria[item.nodeid] = [" ".join(str(a) for a in marker.args), None]


def pytest_runtest_logreport(report):
    entry = _criteria.get(report.nodeid)
    if entry is None:
        return
    if report.failed:
        entry[1] = False
    elif report.when == "call" and entry[1] is None:
        entry[1] = report.passed


def pytest_terminal_summary(terminalreporter):
    ran = [v for v in _criteria.values() if v[1] is not None]
    if not ran:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed in sorted(ran):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}")
    terminalreporter.write_line(f"{sum(p for _, p in ran)}/{len(ran)} criteria pass")

