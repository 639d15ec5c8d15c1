from __future__ import annotations

import pytest

from helpers import example_space, line_space, ultrametric_corpus


@pytest.fixture(scope="session")
def example78():
    return example_space()


@pytest.fixture(scope="session")
def line3():
    return line_space()


@pytest.fixture(scope="session")
def corpus():
    return ultrametric_corpus()
