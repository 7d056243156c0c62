from pathlib import Path

import numpy as np
import pytest

from sprify import reference_systems as refs

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture(params=sorted(refs.ALL))
def reference_system(request):
    return request.param, refs.ALL[request.param]()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def multiset_close(a, b, tol):
    """Greedy matching of two complex multisets within `tol`."""
    a = list(np.asarray(a, dtype=complex).ravel())
    b = list(np.asarray(b, dtype=complex).ravel())
    if len(a) != len(b):
        return False
    for x in a:
        if not b:
            return False
        j = int(np.argmin([abs(x - y) for y in b]))
        if abs(x - b[j]) > tol:
            return False
        b.pop(j)
    return True


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
