import math

import pytest

from density_lab.funcmodel import ScalarField, make_phi, preset_weight
from density_lab.numerics import Domain, build_quadrature


@pytest.fixture(scope="session")
def gaussian():
    return preset_weight("gaussian")


@pytest.fixture(scope="session")
def identity():
    return make_phi("identity")


@pytest.fixture(scope="session")
def whole_line_rule():
    return build_quadrature(Domain.interval(), "tanh-sinh", 100)


def field(text, n=None):
    return ScalarField.parse(text, n=n)


@pytest.fixture
def parse():
    return field


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


SQRT_PI = math.sqrt(math.pi)


ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record ``(criterion, passed, detail, seconds, budget)`` for the terminal summary."""

    def record(number, title, passed, detail, seconds, budget):
        ok = bool(passed) and seconds < budget
        line = (f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail} "
                f"[{seconds:.2f} s / {budget:g} s]")
        ACCEPTANCE.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE):
        terminalreporter.write_line(line)
