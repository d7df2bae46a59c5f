import pytest

from hybridsec.link import SystemParams

_ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_ACCEPTANCE] = []


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_ACCEPTANCE, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def acceptance_log(pytestconfig):
    """Call with (criterion, ok, detail); one line per criterion in the summary."""
    log = pytestconfig.stash[_ACCEPTANCE]

    def record(name: str, ok: bool, detail: str = "") -> bool:
        line = f"criterion {name:<4} {'PASS' if ok else 'FAIL'}  {detail}"
        log.append(line)
        print(line)
        return ok

    return record


@pytest.fixture(scope="session")
def params():
    return SystemParams()

