import re

_criterion_results = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    m = re.search(r"test_criterion_(\d+)", report.nodeid)
    if m:
        num = int(m.group(1))
        # a criterion may be split over several tests; all must pass
        _criterion_results[num] = _criterion_results.get(num, True) and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _criterion_results:
        return
    terminalreporter.write_line("")
    terminalreporter.write_line("acceptance criteria:")
    for num in sorted(_criterion_results):
        verdict = "PASS" if _criterion_results[num] else "FAIL"
        terminalreporter.write_line(f"  criterion {num}: {verdict}")
