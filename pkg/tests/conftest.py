from importlib import resources

import numpy as np
import pytest

from pfroots.netmodel import load_case


def data_path(name: str):
    return resources.files("pfroots") / "data" / f"{name}.json"


@pytest.fixture
def case2w():
    return load_case(data_path("case2w"))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
