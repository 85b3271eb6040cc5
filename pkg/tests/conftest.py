import pytest

# (criterion number, line) pairs filled by test_acceptance.py
ACCEPTANCE_LINES: list[tuple[int, str]] = []


@pytest.fixture
def acceptance_report():
    def report(number: int, title: str, checks) -> bool:
        passed = all(c.passed for c in checks)
        detail = "; ".join(f"{c.name}={c.value:.3g}" + (f" [{c.detail}]" if c.detail else "") for c in checks)
        line = f"criterion {number} {'PASS' if passed else 'FAIL'}: {title} ({detail})"
        ACCEPTANCE_LINES.append((number, line))
        print(line)
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
