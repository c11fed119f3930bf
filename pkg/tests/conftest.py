import pytest

acceptance_key = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[acceptance_key] = []


@pytest.fixture
def acceptance_log(request):
    """Append ``(criterion, passed, detail)``; shown in the terminal summary."""
    return request.config.stash[acceptance_key]


def pytest_terminal_summary(terminalreporter, config):
    lines = sorted(config.stash.get(acceptance_key, []))
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in lines:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {num}: {detail}")
