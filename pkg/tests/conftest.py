import math
import sys

import pytest

from isomartin import elliptic as el
from isomartin import graph as gr


@pytest.fixture(scope="session")
def square():
    return gr.build_square(math.pi / 4, 10)


@pytest.fixture(scope="session")
def square_skew():
    return gr.build_square(math.pi / 6, 10)


@pytest.fixture(scope="session")
def triangular():
    return gr.build_triangular(8)


@pytest.fixture(scope="session")
def demo():
    return gr.build_periodic_demo(8)


@pytest.fixture(scope="session", params=[0.3, 0.6])
def ctx(request):
    return el.make_context(request.param)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
