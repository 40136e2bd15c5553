import pytest

_RESULTS = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(item.user_properties).get("measured", "")
        _RESULTS[number] = (title, report.outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, outcome, detail = _RESULTS[number]
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"[{status}] criterion {number:>2}: {title}"
        if detail:
            line += f"  ({detail})"
        terminalreporter.write_line(line)
