import numpy as np
import pytest

from gradate import AttributedGraph, LabeledGraphDataset


def random_graph(rng, n_nodes=None, edge_prob=0.4, feature_dim=3):
    """A random undirected 0/1 graph with Gaussian features."""
    if n_nodes is None:
        n_nodes = int(rng.integers(4, 9))
    A = (rng.random((n_nodes, n_nodes)) < edge_prob).astype(float)
    A = np.triu(A, 1)
    A = A + A.T
    feats = rng.standard_normal((n_nodes, feature_dim)) if feature_dim else None
    return AttributedGraph(A, feats)


def random_dataset(rng, n_graphs, n_classes=2, feature_dim=3, edge_prob=0.4,
                   size_range=(4, 9)):
    graphs = [
        random_graph(rng, n_nodes=int(rng.integers(*size_range)),
                     edge_prob=edge_prob, feature_dim=feature_dim)
        for _ in range(n_graphs)
    ]
    labels = [int(rng.integers(0, n_classes)) for _ in range(n_graphs)]
    return LabeledGraphDataset(graphs, labels, label_set=range(n_classes))


def heterogeneous_graphs(seed, n_graphs, size_range=(5, 10), feature_dim=3):
    """Graphs that genuinely differ: varied density and feature location.

    An i.i.d.-feature ensemble makes every pairwise distance noise-driven;
    rank-correlation checks need real between-graph variation.
    """
    rng = np.random.default_rng(seed)
    graphs = []
    for _ in range(n_graphs):
        n = int(rng.integers(*size_range))
        prob = rng.uniform(0.15, 0.85)
        A = (rng.random((n, n)) < prob).astype(float)
        A = np.triu(A, 1)
        A = A + A.T
        mu = rng.uniform(-2, 2, size=feature_dim)
        X = mu + 0.3 * rng.standard_normal((n, feature_dim))
        graphs.append(AttributedGraph(A, X))
    return graphs


def path_graph(n, feature_dim=0):
    g = AttributedGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])
    if feature_dim:
        feats = np.arange(n * feature_dim, dtype=float).reshape(n, feature_dim)
        g = AttributedGraph(g.adjacency, feats)
    return g


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
