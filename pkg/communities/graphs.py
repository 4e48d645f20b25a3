"""Graph and partition types shared by every module, plus dataset I/O.

Node ids are contiguous integers ``0..n-1``; the original labels read from a
file are kept in a :class:`NodeIndex` so results can be written back with
the labels the user supplied.
"""
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import IncompleteGroundTruthError, ParseError, ValidationError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class NodeIndex:
    """Bidirectional map between original node labels and contiguous ids"""

    def __init__(self, labels: Iterable = ()):
        self._labels: List[str] = []
        self._ids: Dict[str, int] = {}
        for label in labels:
            self.add(label)

    @classmethod
    def identity(cls, node_count: int) -> 'NodeIndex':
        return cls(str(i) for i in range(node_count))

    def add(self, label) -> int:
        label = str(label)
        node = self._ids.get(label)
        if node is None:
            node = len(self._labels)
            self._ids[label] = node
            self._labels.append(label)
        return node

    def id_of(self, label) -> int:
        return self._ids[str(label)]

    def get(self, label, default: Optional[int] = None) -> Optional[int]:
        return self._ids.get(str(label), default)

    def label_of(self, node: int) -> str:
        return self._labels[node]

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(self._labels)

    def __contains__(self, label) -> bool:
        return str(label) in self._ids

    def __len__(self) -> int:
        return len(self._labels)

    def __repr__(self) -> str:
        return f"NodeIndex({len(self)} labels)"


def _frozen(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


class Graph:
    """Undirected weighted simple graph on nodes ``0..n-1``.

    Edges are kept once in canonical ``u < v`` order (sorted) and mirrored
    into a CSR adjacency so neighbor iteration is O(deg).
    """

    def __init__(self, node_count: int, heads: np.ndarray, tails: np.ndarray,
                 weights: np.ndarray, index: Optional[NodeIndex] = None):
        self.node_count = int(node_count)
        self.heads = _frozen(np.asarray(heads, dtype=np.int64))
        self.tails = _frozen(np.asarray(tails, dtype=np.int64))
        self.weights = _frozen(np.asarray(weights, dtype=float))
        self.index = index

        src = np.concatenate([self.heads, self.tails])
        dst = np.concatenate([self.tails, self.heads])
        both = np.concatenate([self.weights, self.weights])
        order = np.lexsort((dst, src))
        counts = np.bincount(src, minlength=self.node_count)
        self._indptr = _frozen(np.concatenate([[0], np.cumsum(counts)]).astype(np.int64))
        self._indices = _frozen(dst[order])
        self._adj_weights = _frozen(both[order])

    @classmethod
    def from_edges(cls, node_count: int, edges: Iterable[Sequence], index: Optional[NodeIndex] = None,
                   warn_duplicates: bool = True) -> 'Graph':
        """Build a graph from ``(u, v)`` or ``(u, v, w)`` tuples.

        Duplicate pairs (in either orientation) are merged by summing weights.
        """
        rows = [tuple(edge) for edge in edges]
        heads = np.array([row[0] for row in rows], dtype=np.int64)
        tails = np.array([row[1] for row in rows], dtype=np.int64)
        weights = np.array([row[2] if len(row) > 2 else 1.0 for row in rows], dtype=float)
        return cls.from_arrays(node_count, heads, tails, weights, index=index,
                               warn_duplicates=warn_duplicates)

    @classmethod
    def from_arrays(cls, node_count: int, heads: np.ndarray, tails: np.ndarray,
                    weights: Optional[np.ndarray] = None, index: Optional[NodeIndex] = None,
                    warn_duplicates: bool = True) -> 'Graph':
        heads = np.asarray(heads, dtype=np.int64).ravel()
        tails = np.asarray(tails, dtype=np.int64).ravel()
        if weights is None:
            weights = np.ones(len(heads))
        weights = np.asarray(weights, dtype=float).ravel()
        if not len(heads) == len(tails) == len(weights):
            raise ValidationError("edge arrays must have equal length")
        if node_count < 0:
            raise ValidationError("node_count must be nonnegative")
        if len(heads):
            if heads.min() < 0 or tails.min() < 0 or max(heads.max(), tails.max()) >= node_count:
                raise ValidationError(f"edge endpoint outside [0, {node_count})")
            if np.any(heads == tails):
                raise ValidationError("self-loops are not allowed")
            if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
                raise ValidationError("edge weights must be positive and finite")

        span = max(node_count, 1)
        keys = np.minimum(heads, tails) * span + np.maximum(heads, tails)
        unique_keys, inverse = np.unique(keys, return_inverse=True)
        if len(unique_keys) < len(keys) and warn_duplicates:
            logger.warning("Merged %d duplicate edges by summing weights", len(keys) - len(unique_keys))
        weights = np.bincount(inverse.ravel(), weights=weights, minlength=len(unique_keys))
        return cls(node_count, unique_keys // span, unique_keys % span, weights, index=index)

    @classmethod
    def from_networkx(cls, nx_graph, weight: str = 'weight') -> 'Graph':
        index = NodeIndex(nx_graph.nodes())
        edges = [
            (index.id_of(u), index.id_of(v), data.get(weight, 1.0))
            for u, v, data in nx_graph.edges(data=True) if u != v
        ]
        return cls.from_edges(len(index), edges, index=index)

    def to_networkx(self):
        import networkx as nx

        graph = nx.Graph()
        graph.add_nodes_from(range(self.node_count))
        graph.add_weighted_edges_from(self.edges())
        return graph

    @property
    def edge_count(self) -> int:
        return len(self.heads)

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())

    def edges(self) -> Iterator[Tuple[int, int, float]]:
        for u, v, w in zip(self.heads.tolist(), self.tails.tolist(), self.weights.tolist()):
            yield u, v, w

    def neighbors(self, node: int) -> Tuple[np.ndarray, np.ndarray]:
        start, stop = self._indptr[node], self._indptr[node + 1]
        return self._indices[start:stop], self._adj_weights[start:stop]

    def has_edge(self, u: int, v: int) -> bool:
        nbrs, _ = self.neighbors(u)
        pos = np.searchsorted(nbrs, v)
        return bool(pos < len(nbrs) and nbrs[pos] == v)

    def degrees(self) -> np.ndarray:
        return np.diff(self._indptr)

    def weighted_degrees(self) -> np.ndarray:
        return np.bincount(
            np.concatenate([self.heads, self.tails]),
            weights=np.concatenate([self.weights, self.weights]),
            minlength=self.node_count,
        )

    def label_of(self, node: int) -> str:
        return self.index.label_of(node) if self.index is not None else str(node)

    def __repr__(self) -> str:
        return f"Graph(n={self.node_count}, m={self.edge_count}, W={self.total_weight:g})"


def _normalize_labels(raw: np.ndarray) -> np.ndarray:
    """Relabel to ``0..k-1`` in order of first appearance."""
    if len(raw) == 0:
        return np.zeros(0, dtype=np.int64)
    _, first, inverse = np.unique(raw, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind='stable')] = np.arange(len(first))
    return rank[inverse.ravel()]


class Partition:
    """Disjoint communities covering ``nodes``, labelled ``0..k-1``.

    A partition of a whole graph has ``nodes == arange(n)``; a partition of
    the observed nodes V_0 lists just those ids (always sorted).
    """

    def __init__(self, labels: Sequence, nodes: Optional[Sequence[int]] = None):
        raw = np.asarray(labels)
        if nodes is None:
            node_ids = np.arange(len(raw), dtype=np.int64)
        else:
            node_ids = np.asarray(nodes, dtype=np.int64).ravel()
            if len(node_ids) != len(raw):
                raise ValidationError("nodes and labels must have equal length")
            order = np.argsort(node_ids, kind='stable')
            node_ids, raw = node_ids[order], raw[order]
            if len(node_ids) > 1 and np.any(node_ids[1:] == node_ids[:-1]):
                raise ValidationError("a node cannot belong to two communities")
        self.nodes = _frozen(node_ids)
        self.labels = _frozen(_normalize_labels(raw))

    @classmethod
    def from_labels(cls, labels: Sequence, nodes: Optional[Sequence[int]] = None) -> 'Partition':
        return cls(labels, nodes)

    @classmethod
    def from_dict(cls, assignment: Dict[int, object]) -> 'Partition':
        nodes = list(assignment)
        return cls([assignment[node] for node in nodes], nodes)

    @classmethod
    def singletons(cls, nodes: Sequence[int]) -> 'Partition':
        nodes = np.asarray(nodes, dtype=np.int64)
        return cls(np.arange(len(nodes)), nodes)

    @property
    def k(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    def __len__(self) -> int:
        return len(self.nodes)

    def _positions(self, nodes: np.ndarray) -> np.ndarray:
        pos = np.searchsorted(self.nodes, nodes)
        pos = np.minimum(pos, max(len(self.nodes) - 1, 0))
        if len(nodes) and (len(self.nodes) == 0 or np.any(self.nodes[pos] != nodes)):
            raise ValidationError("node set is not contained in the partition")
        return pos

    def labels_for(self, nodes: Sequence[int]) -> np.ndarray:
        nodes = np.asarray(nodes, dtype=np.int64)
        return self.labels[self._positions(nodes)]

    def label_of(self, node: int) -> int:
        return int(self.labels_for([node])[0])

    def restrict(self, nodes: Iterable[int]) -> 'Partition':
        nodes = np.unique(np.asarray(nodes if isinstance(nodes, np.ndarray) else list(nodes), dtype=np.int64))
        return Partition(self.labels[self._positions(nodes)], nodes)

    def communities(self) -> List[np.ndarray]:
        return [self.nodes[self.labels == c] for c in range(self.k)]

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.k)

    def as_dict(self) -> Dict[int, int]:
        return dict(zip(self.nodes.tolist(), self.labels.tolist()))

    def same_as(self, other: 'Partition') -> bool:
        """Equal node sets and equal communities up to label renaming."""
        return (np.array_equal(self.nodes, other.nodes)
                and np.array_equal(self.labels, other.labels))

    def __repr__(self) -> str:
        return f"Partition(nodes={len(self)}, k={self.k})"


def restrict_partition(partition: Partition, nodes: Iterable[int]) -> Partition:
    return partition.restrict(nodes)


@dataclass(frozen=True)
class DatasetBundle:
    graph: Graph
    ground_truth: Partition
    name: str

    def __post_init__(self):
        if len(self.ground_truth) != self.graph.node_count:
            raise ValidationError(
                f"{self.name}: ground truth covers {len(self.ground_truth)} nodes, "
                f"graph has {self.graph.node_count}"
            )


def _split(line: str) -> List[str]:
    return line.split('\t') if '\t' in line else line.split()


def _data_lines(path: PathLike) -> Iterator[Tuple[int, List[str]]]:
    with open(path, 'r', encoding='utf-8') as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith('#'):
                continue
            yield line_no, [part.strip() for part in _split(line)]


def load_edge_list(path: PathLike) -> Graph:
    """Read ``u<TAB>v`` or ``u<TAB>v<TAB>w`` lines into a graph."""
    index = NodeIndex()
    edges = []
    for line_no, parts in _data_lines(path):
        if len(parts) not in (2, 3):
            raise ParseError("expected 'u<TAB>v' or 'u<TAB>v<TAB>w'", line_no)
        weight = 1.0
        if len(parts) == 3:
            try:
                weight = float(parts[2])
            except ValueError:
                raise ParseError(f"weight {parts[2]!r} is not a number", line_no)
            if not math.isfinite(weight):
                raise ParseError("weight must be finite", line_no)
            if weight < 0:
                raise ValidationError(f"line {line_no}: negative weight {weight}")
        u, v = index.add(parts[0]), index.add(parts[1])
        if u == v:
            logger.warning("Skipping self-loop on %s (line %d)", parts[0], line_no)
            continue
        if weight == 0:
            logger.warning("Skipping zero-weight edge on line %d", line_no)
            continue
        edges.append((u, v, weight))
    return Graph.from_edges(len(index), edges, index=index)


def write_edge_list(graph: Graph, path: PathLike) -> None:
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        for u, v, w in graph.edges():
            handle.write(f"{graph.label_of(u)}\t{graph.label_of(v)}\t{w:.17g}\n")


def load_communities(path: PathLike, graph: Graph) -> Partition:
    """Read ``node<TAB>label`` lines; every node of ``graph`` must appear once."""
    index = graph.index if graph.index is not None else NodeIndex.identity(graph.node_count)
    raw: List[Optional[str]] = [None] * graph.node_count
    for line_no, parts in _data_lines(path):
        if len(parts) != 2:
            raise ParseError("expected 'node<TAB>label'", line_no)
        node = index.get(parts[0])
        if node is None:
            raise ValidationError(f"line {line_no}: unknown node {parts[0]!r}")
        if raw[node] is not None:
            raise ValidationError(f"line {line_no}: node {parts[0]!r} appears twice")
        raw[node] = parts[1]
    missing = [index.label_of(node) for node, label in enumerate(raw) if label is None]
    if missing:
        raise IncompleteGroundTruthError(
            f"{len(missing)} nodes have no community (first: {missing[0]!r})"
        )
    return Partition(np.array(raw, dtype=str))


def load_partition_labels(path: PathLike, index: Optional[NodeIndex] = None,
                          extend: bool = True) -> Tuple[NodeIndex, Partition]:
    """Read a community file without a graph.

    Nodes are looked up in ``index`` (created when missing). With
    ``extend=False`` an unknown node is a validation error.
    """
    index = index if index is not None else NodeIndex()
    nodes, raw = [], []
    seen = set()
    for line_no, parts in _data_lines(path):
        if len(parts) != 2:
            raise ParseError("expected 'node<TAB>label'", line_no)
        if parts[0] not in index and not extend:
            raise ValidationError(f"line {line_no}: unknown node {parts[0]!r}")
        node = index.add(parts[0])
        if node in seen:
            raise ValidationError(f"line {line_no}: node {parts[0]!r} appears twice")
        seen.add(node)
        nodes.append(node)
        raw.append(parts[1])
    return index, Partition(np.array(raw, dtype=str), nodes)


def write_communities(partition: Partition, path: PathLike, index: Optional[NodeIndex] = None) -> None:
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        for node, label in zip(partition.nodes.tolist(), partition.labels.tolist()):
            name = index.label_of(node) if index is not None else str(node)
            handle.write(f"{name}\t{label}\n")


def load_dataset(name: str, edges_path: PathLike, communities_path: PathLike) -> DatasetBundle:
    graph = load_edge_list(edges_path)
    return DatasetBundle(graph=graph, ground_truth=load_communities(communities_path, graph), name=name)
