"""Shared fixtures and the acceptance-verdict summary hook."""

import re

import pytest

from bcsa import parse_distribution

#: one-line titles printed as ACCEPTANCE <n>: PASS/FAIL at the end of a run
ACCEPTANCE_TITLES = {
    1: "toy instance exact (1/4, 1/2) and Monte Carlo within 4 sigma",
    2: "verify mode: zero impossible outcomes over >= 1e8 ordered pairs",
    3: "tight failure bound holds within +3 sigma and is tight to 20%",
    4: "detected-failure ratio in [0.15, 0.45] for both distributions",
    5: "induced degree distribution: normalization, k=0 identity, TV < 0.005",
    6: "failure-correlation conjecture and conditional check at 3 sigma",
    7: "confluence, count identities, containment, fast==verify, CSV bytes",
    8: "per-degree loss ordering (higher degree => lower loss) at 3 sigma",
}

_NODE_RE = re.compile(r"test_acceptance\.py::test_c(\d+)_")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    verdicts = {}
    for status, ok in (("passed", True), ("failed", False), ("error", False)):
        for rep in terminalreporter.stats.get(status, []):
            m = _NODE_RE.search(rep.nodeid)
            if m:
                num = int(m.group(1))
                verdicts[num] = verdicts.get(num, True) and ok
    if not verdicts:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for num in sorted(verdicts):
        word = "PASS" if verdicts[num] else "FAIL"
        title = ACCEPTANCE_TITLES.get(num, "")
        terminalreporter.write_line(f"ACCEPTANCE {num}: {word} - {title}")


@pytest.fixture(scope="session")
def dist_mixed():
    """Three-degree mix used throughout: 0.25x^2 + 0.6x^3 + 0.15x^8."""
    return parse_distribution("0.25x^2+0.6x^3+0.15x^8")


@pytest.fixture(scope="session")
def dist_two():
    """Two-degree mix used throughout: 0.86x^3 + 0.14x^8."""
    return parse_distribution("0.86x^3+0.14x^8")
