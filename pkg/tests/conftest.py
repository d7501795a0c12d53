import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        props = dict(report.user_properties)
        _acceptance[report.nodeid] = (report.outcome, props.get("criterion", report.nodeid),
                                      props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for outcome, label, detail in sorted(_acceptance.values(), key=lambda r: r[1]):
        mark = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{mark}] {label}" + (f" :: {detail}" if detail else ""))
