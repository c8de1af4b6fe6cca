"""Attributed graphs and labeled graph datasets.

Graphs are stored dense: the sets this package targets are small (a few
hundred nodes at most) and every distance kernel downstream is dense anyway.
All containers are immutable after construction and safe to share across
workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import AsymmetryError, DimensionMismatch, InfeasibleMarginals

SYMMETRY_TOL = 1e-9
SIMPLEX_TOL = 1e-9


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class AttributedGraph:
    """An undirected attributed graph: adjacency, node features, node weights.

    adjacency : (n, n) symmetric matrix of nonnegative reals. Weighted
        symmetric adjacencies are accepted as-is; asymmetric input is
        rejected rather than silently symmetrized.
    features : (n, d) real matrix; d may be 0 for featureless graphs.
    node_weights : probability vector over nodes. Defaults to uniform.
    """

    adjacency: np.ndarray
    features: np.ndarray
    node_weights: np.ndarray

    def __init__(self, adjacency, features=None, node_weights=None):
        adjacency = np.asarray(adjacency, dtype=np.float64)
        if adjacency.ndim != 2 or adjacency.shape[0] != adjacency.shape[1]:
            raise DimensionMismatch(f"adjacency must be square, got {adjacency.shape}")
        n = adjacency.shape[0]
        if n < 1:
            raise DimensionMismatch("a graph needs at least one node")
        if not np.all(np.isfinite(adjacency)) or np.any(adjacency < 0):
            raise ValueError("adjacency entries must be finite and nonnegative")
        if np.abs(adjacency - adjacency.T).max() > SYMMETRY_TOL:
            raise AsymmetryError("adjacency is not symmetric; directed graphs are out of scope")

        if features is None:
            features = np.zeros((n, 0))
        features = np.asarray(features, dtype=np.float64)
        if features.ndim == 1:
            features = features[:, None]
        if features.shape[0] != n:
            raise DimensionMismatch(
                f"features has {features.shape[0]} rows for {n} nodes"
            )

        if node_weights is None:
            node_weights = np.full(n, 1.0 / n)
        node_weights = np.asarray(node_weights, dtype=np.float64)
        if node_weights.shape != (n,):
            raise DimensionMismatch("node_weights length must equal node count")
        if np.any(node_weights < -SIMPLEX_TOL) or abs(node_weights.sum() - 1.0) > SIMPLEX_TOL:
            raise InfeasibleMarginals("node_weights must be a probability vector")
        node_weights = np.maximum(node_weights, 0.0)

        object.__setattr__(self, "adjacency", _freeze(adjacency))
        object.__setattr__(self, "features", _freeze(features))
        object.__setattr__(self, "node_weights", _freeze(node_weights))

    @classmethod
    def from_edges(cls, n_nodes: int, edges: Iterable[tuple[int, int]],
                   features=None, node_weights=None) -> "AttributedGraph":
        """Build a 0/1 graph from an undirected edge list over nodes 0..n-1."""
        adj = np.zeros((n_nodes, n_nodes))
        for i, j in edges:
            adj[i, j] = 1.0
            adj[j, i] = 1.0
        return cls(adj, features=features, node_weights=node_weights)

    @property
    def n_nodes(self) -> int:
        return self.adjacency.shape[0]

    @property
    def feature_dim(self) -> int:
        return self.features.shape[1]

    def degrees(self) -> np.ndarray:
        """Integer degree per node: the number of adjacent nonzero entries."""
        return np.count_nonzero(self.adjacency, axis=1)


@dataclass(frozen=True)
class LabeledGraphDataset:
    """An ordered collection of (graph, class-label) pairs sharing a label set.

    Ordering is significant: selection results index into it by position.
    `label_names` optionally records the original label values per class id
    when labels were remapped at load time.
    """

    graphs: tuple[AttributedGraph, ...]
    labels: tuple[int, ...]
    label_set: tuple[int, ...]
    label_names: tuple | None = field(default=None, compare=False)

    def __init__(self, graphs: Sequence[AttributedGraph], labels: Sequence[int],
                 label_set: Sequence[int] | None = None, label_names=None):
        graphs = tuple(graphs)
        labels = tuple(int(y) for y in labels)
        if len(graphs) != len(labels):
            raise DimensionMismatch("graphs and labels must have equal length")
        if label_set is None:
            label_set = sorted(set(labels))
        label_set = tuple(label_set)
        missing = set(labels) - set(label_set)
        if missing:
            raise ValueError(f"labels {sorted(missing)} not in label_set")
        dims = {g.feature_dim for g in graphs}
        if len(dims) > 1:
            raise DimensionMismatch(f"graphs disagree on feature dimension: {sorted(dims)}")
        object.__setattr__(self, "graphs", graphs)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "label_set", label_set)
        object.__setattr__(self, "label_names",
                           tuple(label_names) if label_names is not None else None)

    def __len__(self) -> int:
        return len(self.graphs)

    @property
    def feature_dim(self) -> int:
        return self.graphs[0].feature_dim if self.graphs else 0

    def subset(self, indices: Sequence[int]) -> "LabeledGraphDataset":
        """Dataset restricted to `indices`, in the given order."""
        idx = [int(i) for i in indices]
        return LabeledGraphDataset(
            [self.graphs[i] for i in idx],
            [self.labels[i] for i in idx],
            label_set=self.label_set,
            label_names=self.label_names,
        )

    def indices_with_label(self, label) -> list[int]:
        return [i for i, y in enumerate(self.labels) if y == label]


def concat_datasets(first: LabeledGraphDataset, second: LabeledGraphDataset) -> LabeledGraphDataset:
    """Concatenate two datasets, unioning their label sets."""
    label_set = tuple(sorted(set(first.label_set) | set(second.label_set)))
    return LabeledGraphDataset(
        first.graphs + second.graphs,
        first.labels + second.labels,
        label_set=label_set,
    )


def degree_one_hot_features(dataset: LabeledGraphDataset) -> LabeledGraphDataset:
    """Synthesize degree one-hot node features for a featureless dataset.

    The feature dimension is (max degree over the whole dataset) + 1 and node
    v receives the indicator of its integer degree, so embeddings remain
    comparable across any split of the same dataset. Datasets that already
    carry features are returned unchanged.
    """
    if dataset.feature_dim > 0:
        return dataset
    degs = [g.degrees() for g in dataset.graphs]
    dim = int(max((d.max() for d in degs if d.size), default=0)) + 1
    new_graphs = []
    for g, d in zip(dataset.graphs, degs):
        feats = np.zeros((g.n_nodes, dim))
        feats[np.arange(g.n_nodes), d] = 1.0
        new_graphs.append(AttributedGraph(g.adjacency, feats, g.node_weights))
    return LabeledGraphDataset(new_graphs, dataset.labels,
                               label_set=dataset.label_set,
                               label_names=dataset.label_names)


def graph_density(g: AttributedGraph) -> float:
    """Simple-graph density 2|E| / (n(n-1)); 0 for a single node.

    |E| counts nonzero entries strictly above the diagonal, so weighted
    adjacencies contribute by support, not weight.
    """
    n = g.n_nodes
    if n < 2:
        return 0.0
    edges = np.count_nonzero(np.triu(g.adjacency, k=1))
    return 2.0 * edges / (n * (n - 1))
