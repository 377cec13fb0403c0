import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from firmmono import catalog, kernels  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session", autouse=True)
def _compiled_kernels():
    kernels.warmup()


@pytest.fixture(scope="session")
def instances():
    return catalog.catalog_instances()


@pytest.fixture(scope="session")
def ops(instances):
    return {name: catalog.make_operator(spec) for name, spec in instances.items()}


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
