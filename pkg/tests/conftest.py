from hypothesis import HealthCheck, settings

settings.register_profile(
    "lab",
    deadline=None,
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("lab")


def pytest_terminal_summary(terminalreporter):
    # Echo the acceptance verdict lines even when capture is on.
    try:
        from test_acceptance import REPORT_LINES
    except ImportError:
        return
    if REPORT_LINES:
        terminalreporter.section("acceptance criteria")
        for line in REPORT_LINES:
            terminalreporter.write_line(line)
