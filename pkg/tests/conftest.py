import numpy as np
import pytest
import torch

from graphforge import Graph


@pytest.fixture(autouse=True)
def _single_thread():
    # keeps tiny-tensor tests fast and reductions reproducible
    torch.set_num_threads(1)


@pytest.fixture
def triangle_graph():
    return Graph(3, edges=[(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def path4_graph():
    return Graph(4, edges=[(0, 1), (1, 2), (2, 3)])


@pytest.fixture
def k4_graph():
    return Graph(4, edges=[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])


@pytest.fixture
def star_graph():
    return Graph(4, edges=[(0, 1), (0, 2), (0, 3)])


def random_graph(n, p, seed):
    rng = np.random.default_rng(seed)
    g = Graph(n)
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                g.add_edge(u, v)
    return g


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
