import networkx as nx
import numpy as np
import pytest

from modtune import Graph, load_fixture


def graph_of(edges, n=None):
    n = n if n is not None else max(max(e) for e in edges) + 1
    return Graph(n, edges)


def random_connected(rng, n_lo=2, n_hi=12, p_lo=0.2, p_hi=0.7):
    """Connected G(n, p) sample from ``rng`` (networkx, rejection)."""
    while True:
        n = int(rng.integers(n_lo, n_hi + 1))
        p = float(rng.uniform(p_lo, p_hi))
        h = nx.gnp_random_graph(n, p, seed=int(rng.integers(2**31)))
        if h.number_of_edges() and nx.is_connected(h):
            return Graph(n, list(h.edges()))


def dense_bc(g, members):
    """Community modularity matrix built entry by entry."""
    A = g.to_dense()
    k = g.degrees.astype(float)
    two_m = 2.0 * g.edge_count
    members = np.asarray(members)
    B = A[np.ix_(members, members)] - np.outer(k[members], k[members]) / two_m
    k_in = A[np.ix_(members, members)].sum(axis=1)
    B -= np.diag(k_in - k[members] * k[members].sum() / two_m)
    return B


@pytest.fixture(scope="session")
def path9():
    return load_fixture("path9")


@pytest.fixture(scope="session")
def karate():
    return load_fixture("karate")


@pytest.fixture(scope="session")
def triangle():
    return graph_of([(0, 1), (1, 2), (0, 2)])


@pytest.fixture(scope="session")
def two_triangles():
    return graph_of([(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
