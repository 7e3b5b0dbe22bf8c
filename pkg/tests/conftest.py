"""Terminal summary: one line per acceptance criterion, every run."""

_OUTCOME_WORDS = {"passed": "PASS", "failed": "FAIL", "error": "ERROR"}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    del exitstatus, config
    rows = {}
    for outcome in ("passed", "failed", "error"):
        for report in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(report, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            if getattr(report, "when", "call") != "call" and outcome == "passed":
                continue
            name = nodeid.split("::")[-1]
            # a failure in setup/teardown must not be masked by "passed"
            if name not in rows or outcome != "passed":
                rows[name] = _OUTCOME_WORDS[outcome]
    if rows:
        terminalreporter.write_sep("=", "acceptance criteria")
        for name in sorted(rows):
            terminalreporter.write_line(f"{name}: {rows[name]}")
