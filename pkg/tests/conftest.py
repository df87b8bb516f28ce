from __future__ import annotations

import random

import pytest

from ptrgraph.model import (
    build_start_graph,
    build_type_graph,
    demo_declarations,
    rule_catalog,
)


@pytest.fixture(scope="session")
def type_graph():
    return build_type_graph()


@pytest.fixture(scope="session")
def catalog():
    return rule_catalog()


@pytest.fixture()
def start_graph():
    """The running example's start state with a two-address free pool."""
    g, env = build_start_graph(demo_declarations(), 2)
    return g, env


@pytest.fixture()
def rng():
    return random.Random(0xC0FFEE)
