import pytest

_verdicts = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    failed_setup = report.when == "setup" and report.failed
    if report.when == "call" or failed_setup:
        label, text = marker.args
        detail = ""
        if report.failed:
            detail = str(report.longrepr.reprcrash.message).splitlines()[0] if hasattr(report.longrepr, "reprcrash") else ""
        _verdicts.append((label, text, report.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _verdicts:
        return
    terminalreporter.section("acceptance criteria")
    for label, text, passed, detail in sorted(_verdicts, key=lambda v: v[0]):
        line = f"{'PASS' if passed else 'FAIL'}  {label:<4} {text}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
