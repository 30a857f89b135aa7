import sys

import numpy as np
import pytest

from l1ae import kernels


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def nonneg_sparse(rng, d, k):
    x = np.zeros(d)
    x[rng.choice(d, size=k, replace=False)] = 1.0 - rng.random(k)
    return x


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
