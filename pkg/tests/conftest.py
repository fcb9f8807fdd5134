"""Collects acceptance-criterion outcomes and prints one line per criterion."""

_CRITERIA: dict[str, tuple[int, str]] = {}
_OUTCOMES: dict[int, list[tuple[str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark:
            _CRITERIA[item.nodeid] = (mark.args[0], mark.args[1])


def pytest_runtest_logreport(report):
    if report.nodeid not in _CRITERIA:
        return
    if report.when == "call" or report.outcome != "passed":
        n, _ = _CRITERIA[report.nodeid]
        detail = "; ".join(str(v) for k, v in report.user_properties if k == "detail")
        _OUTCOMES.setdefault(n, []).append((report.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    titles = {}
    for n, title in _CRITERIA.values():
        titles.setdefault(n, title)
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_OUTCOMES):
        results = _OUTCOMES[n]
        ok = all(o == "passed" for o, _ in results)
        details = " | ".join(d for _, d in results if d)
        tr.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {titles[n]}  {details}")
