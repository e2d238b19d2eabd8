import pytest

# criterion label -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture
def verdict():
    def record(number, passed: bool, detail: str) -> None:
        ACCEPTANCE[str(number)] = (bool(passed), detail)
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")
