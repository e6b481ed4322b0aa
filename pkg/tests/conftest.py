import pytest

_results: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_collection_modifyitems(items):
    for item in items:
        if "test_acceptance" in item.nodeid:
            item.add_marker(pytest.mark.acceptance)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call" and not report.failed:
        return
    number, title = mark.args
    entry = _results.setdefault(number, {"title": title, "ok": True, "seconds": 0.0,
                                         "failed": []})
    entry["seconds"] += report.duration
    if report.failed:
        entry["ok"] = False
        entry["failed"].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_results, key=int):
        r = _results[number]
        verdict = "PASS" if r["ok"] else "FAIL"
        line = f"criterion {number:>2}: {verdict}  {r['title']} ({r['seconds']:.1f}s)"
        if r["failed"]:
            line += "  failed: " + ", ".join(r["failed"])
        tr.write_line(line)
