"""Dataset ingestion, covariate-shift splitting and persistence.

Supports TUDataset-style flat files and a native JSON graph format, plus
content-addressed binary caches for distance matrices and JSON round-trips
for splits and selection results. Writers are atomic (write to a sibling
temp file, then rename) and deterministic byte for byte.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import os
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    ConfigInvalid,
    DanglingEdge,
    DatasetTooSmall,
    HashMismatch,
    ParseError,
    SchemaError,
)
from .graphs import AttributedGraph, LabeledGraphDataset, graph_density

CACHE_MAGIC = b"GDD1"


# ---------------------------------------------------------------------------
# hashing

def dataset_hash(dataset: LabeledGraphDataset) -> str:
    """Content hash of a dataset: graphs, order, labels and label set."""
    h = hashlib.sha256()
    h.update(struct.pack("<q", len(dataset)))
    for g, y in zip(dataset.graphs, dataset.labels):
        h.update(struct.pack("<qqq", g.n_nodes, g.feature_dim, int(y)))
        h.update(np.ascontiguousarray(g.adjacency).tobytes())
        h.update(np.ascontiguousarray(g.features).tobytes())
        h.update(np.ascontiguousarray(g.node_weights).tobytes())
    h.update(json.dumps(list(dataset.label_set)).encode())
    return h.hexdigest()


def config_hash(key: dict) -> str:
    """Hash of a cache key dict, canonicalized."""
    return hashlib.sha256(
        json.dumps(key, sort_keys=True, separators=(",", ":")).encode()
    ).hexdigest()


def _atomic_write_bytes(path: Path, data: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _dump_json(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, separators=(", ", ": ")) + "\n").encode()


# ---------------------------------------------------------------------------
# TUDataset flat files

def _read_lines(path: Path) -> list[str]:
    return path.read_text().splitlines()


def load_tudataset(dir_path) -> LabeledGraphDataset:
    """Load a TUDataset-style directory of flat files.

    Expects DS_A.txt (1-indexed edge list), DS_graph_indicator.txt and
    DS_graph_labels.txt; DS_node_attributes.txt adds real-valued features
    and DS_node_labels.txt is tolerated but not turned into features.
    Edge lists are symmetrized by construction: TU files list both
    directions and a missing reverse direction is simply added. Original
    graph labels are remapped to contiguous 0-based ids; the mapping is
    recorded on the dataset as `label_names`.
    """
    root = Path(dir_path)
    candidates = sorted(root.glob("*_A.txt"))
    if not candidates:
        raise ParseError(root, 0, "no *_A.txt edge file found")
    prefix = candidates[0].name[: -len("_A.txt")]

    def path_for(suffix):
        return root / f"{prefix}_{suffix}.txt"

    indicator_path = path_for("graph_indicator")
    labels_path = path_for("graph_labels")
    for required in (indicator_path, labels_path):
        if not required.exists():
            raise ParseError(required, 0, "required file missing")

    node_graph: list[int] = []
    for ln, raw in enumerate(_read_lines(indicator_path), start=1):
        raw = raw.strip()
        if not raw:
            continue
        try:
            node_graph.append(int(raw) - 1)
        except ValueError:
            raise ParseError(indicator_path, ln, f"bad graph id {raw!r}") from None
    n_nodes_total = len(node_graph)
    if n_nodes_total == 0:
        raise ParseError(indicator_path, 0, "no nodes")
    n_graphs = max(node_graph) + 1

    # Global node id -> (graph, local index), following indicator order.
    local_index = np.empty(n_nodes_total, dtype=np.int64)
    sizes = np.zeros(n_graphs, dtype=np.int64)
    for v, gid in enumerate(node_graph):
        local_index[v] = sizes[gid]
        sizes[gid] += 1

    adjacencies = [np.zeros((s, s)) for s in sizes]
    for ln, raw in enumerate(_read_lines(path_for("A")), start=1):
        raw = raw.strip()
        if not raw:
            continue
        parts = raw.replace(",", " ").split()
        if len(parts) != 2:
            raise ParseError(path_for("A"), ln, f"expected 'i, j', got {raw!r}")
        try:
            u, v = int(parts[0]) - 1, int(parts[1]) - 1
        except ValueError:
            raise ParseError(path_for("A"), ln, f"non-integer endpoint in {raw!r}") from None
        if not (0 <= u < n_nodes_total and 0 <= v < n_nodes_total):
            raise DanglingEdge(f"{path_for('A')}:{ln}: node id out of range in {raw!r}")
        if node_graph[u] != node_graph[v]:
            raise ParseError(path_for("A"), ln,
                             f"edge {raw!r} crosses graphs {node_graph[u] + 1} and {node_graph[v] + 1}")
        gid = node_graph[u]
        a, b = local_index[u], local_index[v]
        adjacencies[gid][a, b] = 1.0
        adjacencies[gid][b, a] = 1.0

    raw_labels: list[int] = []
    for ln, raw in enumerate(_read_lines(labels_path), start=1):
        raw = raw.strip()
        if not raw:
            continue
        try:
            raw_labels.append(int(raw))
        except ValueError:
            raise ParseError(labels_path, ln, f"bad graph label {raw!r}") from None
    if len(raw_labels) != n_graphs:
        raise ParseError(labels_path, len(raw_labels),
                         f"{len(raw_labels)} labels for {n_graphs} graphs")

    attr_path = path_for("node_attributes")
    features = [None] * n_graphs
    if attr_path.exists():
        rows = []
        for ln, raw in enumerate(_read_lines(attr_path), start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                rows.append([float(x) for x in raw.split(",")])
            except ValueError:
                raise ParseError(attr_path, ln, f"bad attribute row {raw!r}") from None
        if len(rows) != n_nodes_total:
            raise ParseError(attr_path, len(rows),
                             f"{len(rows)} attribute rows for {n_nodes_total} nodes")
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            raise ParseError(attr_path, 0, f"ragged attribute rows: widths {sorted(widths)}")
        width = widths.pop()
        feats = [np.zeros((s, width)) for s in sizes]
        for v, row in enumerate(rows):
            feats[node_graph[v]][local_index[v]] = row
        features = feats

    label_names = sorted(set(raw_labels))
    remap = {orig: i for i, orig in enumerate(label_names)}
    graphs = [AttributedGraph(adjacencies[i], features[i]) for i in range(n_graphs)]
    return LabeledGraphDataset(
        graphs,
        [remap[y] for y in raw_labels],
        label_set=range(len(label_names)),
        label_names=label_names,
    )


# ---------------------------------------------------------------------------
# native JSON graph format

def save_dataset_json(dataset: LabeledGraphDataset, path) -> None:
    """Write the native JSON graph format.

    Schema: {"graphs": [{"n", "edges", "features", "label"}], "label_set"}.
    Edges are the 0-indexed strictly-upper-triangle support of the
    adjacency, so only 0/1 graphs round-trip exactly.
    """
    payload = {
        "graphs": [
            {
                "n": g.n_nodes,
                "edges": [[int(i), int(j)] for i, j in zip(*np.nonzero(np.triu(g.adjacency, k=1)))],
                "features": [list(map(float, row)) for row in g.features],
                "label": int(y),
            }
            for g, y in zip(dataset.graphs, dataset.labels)
        ],
        "label_set": list(dataset.label_set),
    }
    _atomic_write_bytes(Path(path), _dump_json(payload))


def load_dataset_json(path) -> LabeledGraphDataset:
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, exc.msg) from None
    try:
        graphs = []
        labels = []
        for entry in payload["graphs"]:
            feats = np.array(entry["features"], dtype=np.float64)
            if feats.size == 0:
                feats = np.zeros((entry["n"], 0))
            graphs.append(AttributedGraph.from_edges(entry["n"], entry["edges"], features=feats))
            labels.append(entry["label"])
        return LabeledGraphDataset(graphs, labels, label_set=payload["label_set"])
    except (KeyError, TypeError, IndexError) as exc:
        raise SchemaError(f"{path}: malformed dataset JSON ({exc})") from None


def load_dataset(path) -> LabeledGraphDataset:
    """Dispatch on path type: directory = TU flat files, file = native JSON."""
    path = Path(path)
    if path.is_dir():
        return load_tudataset(path)
    if path.suffix == ".json":
        return load_dataset_json(path)
    raise ParseError(path, 0, "expected a TUDataset directory or a .json dataset")


# ---------------------------------------------------------------------------
# covariate-shift splitting

@dataclass(frozen=True)
class DomainSplit:
    """Disjoint train/val/test index lists covering a dataset."""

    train_idx: tuple[int, ...]
    val_idx: tuple[int, ...]
    test_idx: tuple[int, ...]
    by: str = "density"

    def __post_init__(self):
        all_idx = self.train_idx + self.val_idx + self.test_idx
        if len(set(all_idx)) != len(all_idx):
            raise SchemaError("split index lists overlap")
        if sorted(all_idx) != list(range(len(all_idx))):
            raise SchemaError("split index lists do not cover the dataset")


def covariate_split(dataset: LabeledGraphDataset, property_name: str) -> DomainSplit:
    """Sort graphs ascending by a property and split 60/20/20.

    Ties keep original order, so the split is a deterministic function of
    the (property, index) pairs. Train gets floor(0.6 N), val floor(0.2 N),
    test the remainder.
    """
    if property_name == "density":
        keys = [graph_density(g) for g in dataset.graphs]
    elif property_name == "size":
        keys = [g.n_nodes for g in dataset.graphs]
    else:
        raise ConfigInvalid(f"unknown shift property {property_name!r}")
    n = len(dataset)
    if n < 5:
        raise DatasetTooSmall(f"need at least 5 graphs to split, got {n}")
    order = np.argsort(np.asarray(keys, dtype=np.float64), kind="stable")
    n_train = 6 * n // 10
    n_val = 2 * n // 10
    return DomainSplit(
        train_idx=tuple(int(i) for i in order[:n_train]),
        val_idx=tuple(int(i) for i in order[n_train:n_train + n_val]),
        test_idx=tuple(int(i) for i in order[n_train + n_val:]),
        by=property_name,
    )


def save_split(split: DomainSplit, path, dataset_digest: str | None = None) -> None:
    payload = {
        "by": split.by,
        "train": list(split.train_idx),
        "val": list(split.val_idx),
        "test": list(split.test_idx),
    }
    if dataset_digest is not None:
        payload["dataset_hash"] = dataset_digest
    _atomic_write_bytes(Path(path), _dump_json(payload))


def load_split(path) -> DomainSplit:
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
        return DomainSplit(
            train_idx=tuple(payload["train"]),
            val_idx=tuple(payload["val"]),
            test_idx=tuple(payload["test"]),
            by=payload.get("by", "density"),
        )
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, exc.msg) from None
    except (KeyError, TypeError) as exc:
        raise SchemaError(f"{path}: malformed split JSON ({exc})") from None


# ---------------------------------------------------------------------------
# selection results

def save_selection(result, path, created_at: str | None = None) -> None:
    """Persist a selection result as JSON.

    `created_at` defaults to the current UTC time; callers that need
    byte-reproducible outputs (the CLI does) pass a deterministic stamp.
    """
    if created_at is None:
        created_at = _dt.datetime.now(_dt.timezone.utc).isoformat()
    payload = {
        "method": result.method,
        "indices": [int(i) for i in result.indices],
        "weights": [float(x) for x in result.weights],
        "config": result.provenance.get("config", {}),
        "dataset_hash": result.provenance.get("dataset_hash", ""),
        "created_at": created_at,
    }
    _validate_selection_payload(payload)
    _atomic_write_bytes(Path(path), _dump_json(payload))


def _validate_selection_payload(payload) -> None:
    required = {"method", "indices", "weights", "config", "dataset_hash", "created_at"}
    missing = required - set(payload)
    if missing:
        raise SchemaError(f"selection JSON missing fields {sorted(missing)}")
    indices = payload["indices"]
    weights = payload["weights"]
    if len(set(indices)) != len(indices):
        raise SchemaError("selection indices contain duplicates")
    if any(i < 0 for i in indices):
        raise SchemaError("selection indices must be nonnegative")
    if sorted(indices) != list(indices):
        raise SchemaError("selection indices must be sorted ascending")
    if len(weights) != len(indices):
        raise SchemaError("weights and indices differ in length")
    if any(x < 0 for x in weights) or abs(sum(weights) - 1.0) > 1e-9:
        raise SchemaError("selection weights must be a probability vector")


def load_selection(path, expected_hash: str | None = None, force: bool = False):
    """Load and validate a selection result.

    When `expected_hash` is given and disagrees with the stored one, raises
    HashMismatch unless `force` is set, in which case a warning is emitted.
    """
    from .pipeline import SelectionResult  # local import to avoid a cycle

    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(path, exc.lineno, exc.msg) from None
    if not isinstance(payload, dict):
        raise SchemaError(f"{path}: selection JSON must be an object")
    _validate_selection_payload(payload)
    stored = payload["dataset_hash"]
    if expected_hash is not None and stored != expected_hash:
        if not force:
            raise HashMismatch(
                f"{path}: selection was computed on dataset {stored[:12]}..., "
                f"expected {expected_hash[:12]}..."
            )
        warnings.warn(f"{path}: dataset hash mismatch ignored by force", RuntimeWarning)
    return SelectionResult(
        indices=tuple(payload["indices"]),
        weights=tuple(payload["weights"]),
        method=payload["method"],
        trace=None,
        provenance={
            "config": payload["config"],
            "dataset_hash": stored,
            "created_at": payload["created_at"],
        },
    )


# ---------------------------------------------------------------------------
# binary matrix cache

def cache_file_name(kind: str, key: dict) -> str:
    return f"{kind}-{config_hash(key)[:20]}.gdd"


def save_matrix_cache(path, matrix: np.ndarray, key: dict) -> None:
    """Write a distance matrix to the binary cache format.

    Layout: magic "GDD1", little-endian uint32 header length, JSON header
    (dims + config hash + the key itself), then the row-major float64
    little-endian payload. Files are written once and never mutated.
    """
    matrix = np.ascontiguousarray(matrix, dtype="<f8")
    header = {
        "rows": int(matrix.shape[0]),
        "cols": int(matrix.shape[1]),
        "config_hash": config_hash(key),
        "key": key,
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    blob = (CACHE_MAGIC + struct.pack("<I", len(header_bytes))
            + header_bytes + matrix.tobytes(order="C"))
    _atomic_write_bytes(Path(path), blob)


def load_matrix_cache(path, key: dict) -> np.ndarray:
    """Read a cached matrix, verifying magic and exact key agreement."""
    blob = Path(path).read_bytes()
    if blob[:4] != CACHE_MAGIC:
        raise SchemaError(f"{path}: bad cache magic {blob[:4]!r}")
    (header_len,) = struct.unpack("<I", blob[4:8])
    header = json.loads(blob[8:8 + header_len].decode())
    if header["config_hash"] != config_hash(key):
        raise HashMismatch(f"{path}: cache key disagrees with the request")
    rows, cols = header["rows"], header["cols"]
    data = np.frombuffer(blob[8 + header_len:], dtype="<f8", count=rows * cols)
    return data.reshape(rows, cols).copy()
