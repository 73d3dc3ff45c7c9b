"""Shared fixtures plus the acceptance-criterion result reporter."""

_ACCEPTANCE_RESULTS = []


def record_criterion(number, description, passed, detail=""):
    """Log one acceptance criterion outcome for the terminal summary."""
    _ACCEPTANCE_RESULTS.append((number, description, bool(passed), detail))
    return passed


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number, description, passed, detail in sorted(_ACCEPTANCE_RESULTS):
        verdict = "PASS" if passed else "FAIL"
        line = f"criterion {number:2d} [{verdict}] {description}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
