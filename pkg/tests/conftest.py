"""Prints one PASS/FAIL line per acceptance criterion after the test run."""

_results = {}


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if hasattr(report, "wasxfail"):
        outcome = "FAIL (expected, see notes)" if report.skipped else "UNEXPECTED PASS"
    elif report.passed:
        outcome = "PASS"
    else:
        outcome = "FAIL"
    _results[name] = outcome


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name in sorted(_results):
        label = name.replace("test_", "").replace("_", " ")
        terminalreporter.write_line(f"{label}: {_results[name]}")
