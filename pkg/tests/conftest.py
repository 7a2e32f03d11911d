import pytest

# criterion number -> (description, passed, detail); filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture
def criterion():
    def record(number, description, passed, detail=""):
        ACCEPTANCE[number] = (description, bool(passed), detail)
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {description}  {detail}"
        print(line)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        description, passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {description}  {detail}")
