from __future__ import annotations

import numpy as np
import pytest

from casmon import liealg as la


@pytest.fixture(scope="session")
def V1():
    return la.sl2_irrep(1)


@pytest.fixture(scope="session")
def A2V():
    return la.sln_defining(3)


@pytest.fixture(scope="session")
def A3V():
    return la.sln_defining(4)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line per acceptance criterion and assert it."""

    def record(label: str, checks: list[tuple[str, float, float]]) -> None:
        failed = [(n, r, t) for n, r, t in checks if not (np.isfinite(r) and r < t)]
        worst = max(checks, key=lambda c: c[1] / c[2] if np.isfinite(c[1]) else np.inf)
        status = "PASS" if not failed else "FAIL"
        line = f"{status} {label} ({len(checks)} checks; worst {worst[0]} = {worst[1]:.2e}, tol {worst[2]:.0e})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert not failed, failed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
