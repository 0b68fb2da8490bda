import sys

import numpy as np
import pytest

from polybox import Box, new_polynomial

EXAMPLE_POWERS = [[1, 0, 2], [0, 3, 0]]
EXAMPLE_COEFS = [1.0, 2.0]
EXAMPLE_POINTS = [[1, 1, 1], [-1, 2, 3], [0, 1, 0]]


@pytest.fixture
def example_pol():
    """x1*x3^2 + 2*x2^3."""
    return new_polynomial(EXAMPLE_POWERS, EXAMPLE_COEFS)


@pytest.fixture
def example_box():
    return Box(-np.ones(3), 2 * np.ones(3))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get(f"{__package__}.test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n, (ok, detail) in sorted(module.RESULTS.items()):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
