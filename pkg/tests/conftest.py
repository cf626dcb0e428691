import pytest

from bellfield.modular import ModularParams

REFERENCE = ModularParams(0.01, 0.564058, 0.495456)

# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: dict[int, str] = {}
N_CRITERIA = 10


@pytest.fixture
def ref_params():
    return REFERENCE


@pytest.fixture
def criterion():
    def record(number: int, title: str, ok: bool, detail: str = "") -> bool:
        line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
        ACCEPTANCE[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, N_CRITERIA + 1):
        terminalreporter.write_line(ACCEPTANCE.get(n, f"criterion {n:2d} FAIL: did not report (errored or deselected)"))
