import numpy as np
import pytest

from graphon_interference.graphons import network_from_edges


@pytest.fixture
def five_node_network():
    """Five-node demo graph: edges 1-2, 2-3, 2-4, 2-5, 3-4, 4-5 (1-based)."""
    return network_from_edges(5, [(0, 1), (1, 2), (1, 3), (1, 4), (2, 3), (3, 4)])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
