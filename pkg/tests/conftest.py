import pytest

# Filled by test_acceptance.py: criterion id -> (passed, detail).
ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE_RESULTS, key=lambda c: int(c.lstrip("C"))):
        ok, detail = ACCEPTANCE_RESULTS[cid]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {cid}: {detail}")


@pytest.fixture
def record_criterion():
    def record(cid: str, ok: bool, detail: str) -> None:
        ACCEPTANCE_RESULTS[cid] = (ok, detail)
        print(f"[{'PASS' if ok else 'FAIL'}] {cid}: {detail}")
        assert ok, detail

    return record
