import numpy as np
import pytest

from elastic_purcell.core import Params

_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def params():
    return Params(0.5)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it.

    ``checks`` is a list of (description, passed) pairs.
    """

    def record(number, title, checks):
        ok = all(passed for _, passed in checks)
        detail = "; ".join(f"{'ok' if p else 'FAILED'} {text}" for text, p in checks)
        lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])
        lines.append(f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}")
        print(lines[-1])
        failed = [text for text, p in checks if not p]
        assert ok, f"criterion {number} failed: " + "; ".join(failed)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(s.split()[1])):
        terminalreporter.write_line(line)
