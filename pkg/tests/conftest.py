import pytest

# lines recorded by the acceptance suite, echoed at the end of the run
ACCEPTANCE_LINES = []


def record(number, passed, detail):
    line = f"ACCEPTANCE {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def cache_env(tmp_path, monkeypatch):
    monkeypatch.setenv("CUSPDECAY_CACHE", str(tmp_path / "cache"))
    return tmp_path / "cache"
