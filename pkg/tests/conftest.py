import pytest

from myopic import NetworkConfig

_CRITERIA: list[str] = []


def record_criterion(number: int, description: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {description}"
    if detail:
        line += f" ({detail})"
    _CRITERIA.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)


@pytest.fixture
def line5():
    return NetworkConfig([0, 1, 2, 3, 4], [1.0] * 4, [1.0] * 4, kappa=1.0, eta=2.0)
