import pytest

from erwlab.coeffs import build_coeffs
from erwlab.exact import exact_pmf
from erwlab.model import ERWParams

SEED = 12345


@pytest.fixture(scope="session")
def exact_cache():
    """Exact laws are O(n^2); share them across test modules."""
    store = {}

    def get(p, q, n):
        key = (p, q, n)
        if key not in store:
            store[key] = exact_pmf(ERWParams(p, q, n), build_coeffs(p, n))
        return store[key]

    return get


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
