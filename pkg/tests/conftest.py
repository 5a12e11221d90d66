def pytest_terminal_summary(terminalreporter):
    """Re-emit the acceptance gate's one-line verdicts after the test run."""
    try:
        from test_acceptance import RESULTS
    except Exception:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
