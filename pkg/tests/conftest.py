import pytest

# criterion number -> (passed, detail), filled in by test_acceptance.py
CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    def record(num: int, ok: bool, detail: str) -> bool:
        CRITERIA[num] = (bool(ok), detail)
        return bool(ok)
    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(CRITERIA):
        ok, detail = CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
