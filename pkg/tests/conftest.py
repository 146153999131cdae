import numpy as np
import pytest

from otdiag.kernels import available_backends


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(params=available_backends())
def backend(request):
    return request.param


def random_tensor(rng, n):
    return np.asfortranarray(rng.standard_normal((n, n, n)))


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
