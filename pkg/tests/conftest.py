"""
Pytest configuration file for the tests.
"""

import pytest

from tests.experiment import (
    GRAPH_DOCUMENT,
    build_experiment_database,
    build_experiment_idb,
)
from uniprov.questions.model import Context
from uniprov.workflow.graph import ProvGraph


@pytest.fixture
def database():
    """Experiment database at t2 (r2 corrected)."""
    return build_experiment_database()


@pytest.fixture
def state(database):
    """Live state of the experiment database."""
    return database.state


@pytest.fixture
def graph():
    return ProvGraph.deserialize(GRAPH_DOCUMENT)


@pytest.fixture
def idb():
    return build_experiment_idb()


@pytest.fixture
def context(database, graph, idb):
    return Context(database=database, graph=graph, idb=idb)
