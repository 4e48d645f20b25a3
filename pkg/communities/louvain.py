"""Weighted Louvain with a pluggable node-move objective.

:func:`louvain_with_objective` performs sweeps of single-node moves for any
:class:`Objective`; :func:`louvain_modularity` adds the aggregation phase on
top of it for plain modularity.
"""
import logging
from abc import ABC, abstractmethod
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .conf import get_setting
from .exceptions import UndefinedModularityError
from .graphs import Graph, Partition

logger = logging.getLogger(__name__)

Seed = Union[int, np.random.Generator, None]


class Network:
    """Weighted graph with self-loops, the working form of an aggregation level"""

    def __init__(self, node_count: int, heads: np.ndarray, tails: np.ndarray,
                 weights: np.ndarray, loops: Optional[np.ndarray] = None):
        self.node_count = node_count
        self.heads, self.tails, self.weights = heads, tails, weights
        self.loops = np.zeros(node_count) if loops is None else loops

        src = np.concatenate([heads, tails])
        dst = np.concatenate([tails, heads])
        both = np.concatenate([weights, weights])
        order = np.argsort(src, kind='stable')
        self.indptr = np.concatenate([[0], np.cumsum(np.bincount(src, minlength=node_count))]).astype(np.int64)
        self.indices = dst[order]
        self.adj_weights = both[order]
        self.strength = np.bincount(src, weights=both, minlength=node_count) + 2 * self.loops
        self.total_weight = float(weights.sum() + self.loops.sum())

    @classmethod
    def from_graph(cls, graph: Graph) -> 'Network':
        return cls(graph.node_count, np.asarray(graph.heads), np.asarray(graph.tails), np.asarray(graph.weights))

    def neighbors(self, node: int) -> Tuple[np.ndarray, np.ndarray]:
        start, stop = self.indptr[node], self.indptr[node + 1]
        return self.indices[start:stop], self.adj_weights[start:stop]

    def aggregate(self, labels: np.ndarray) -> 'Network':
        """Collapse every community into one node; internal edges become loops."""
        k = int(labels.max()) + 1
        lh, lt = labels[self.heads], labels[self.tails]
        internal = lh == lt
        loops = (np.bincount(labels, weights=self.loops, minlength=k)
                 + np.bincount(lh[internal], weights=self.weights[internal], minlength=k))
        lo = np.minimum(lh[~internal], lt[~internal])
        hi = np.maximum(lh[~internal], lt[~internal])
        keys, inverse = np.unique(lo * k + hi, return_inverse=True)
        weights = np.bincount(inverse.ravel(), weights=self.weights[~internal], minlength=len(keys))
        return Network(k, keys // k, keys % k, weights, loops)


class Objective(ABC):
    """Gain evaluator for moving one node between communities.

    Nodes are addressed by position ``0..N-1`` in the node array handed to
    :meth:`bind`; community labels are integers in ``0..N-1``.
    """

    def bind(self, nodes: np.ndarray, labels: np.ndarray) -> None:
        self.nodes = np.asarray(nodes, dtype=np.int64)
        self.membership = np.array(labels, dtype=np.int64)

    def community(self, position: int) -> int:
        return int(self.membership[position])

    @abstractmethod
    def candidates(self, position: int) -> np.ndarray:
        """Communities worth trying for this node, excluding its own."""

    @abstractmethod
    def gain(self, position: int, target: int) -> float:
        """Objective change if the node moves to ``target``."""

    def gains(self, position: int) -> Tuple[np.ndarray, np.ndarray]:
        targets = np.unique(self.candidates(position))
        targets = targets[targets != self.membership[position]]
        return targets, np.array([self.gain(position, int(t)) for t in targets], dtype=float)

    def move(self, position: int, target: int) -> None:
        self.membership[position] = target

    @abstractmethod
    def value(self) -> float:
        """The full objective recomputed from scratch."""

    def partition(self) -> Partition:
        return Partition(self.membership, self.nodes)


class ModularityObjective(Objective):
    def __init__(self, network: Union[Network, Graph]):
        self.network = network if isinstance(network, Network) else Network.from_graph(network)

    def bind(self, nodes: np.ndarray, labels: np.ndarray) -> None:
        super().bind(nodes, labels)
        net = self.network
        self.totals = np.bincount(self.membership, weights=net.strength, minlength=net.node_count)

    def _links(self, position: int) -> Tuple[np.ndarray, np.ndarray, float]:
        nbrs, weights = self.network.neighbors(position)
        targets, inverse = np.unique(self.membership[nbrs], return_inverse=True)
        to = np.bincount(inverse.ravel(), weights=weights, minlength=len(targets))
        own = self.membership[position]
        inside = float(to[targets == own].sum())
        others = targets != own
        return targets[others], to[others], inside

    def candidates(self, position: int) -> np.ndarray:
        return self._links(position)[0]

    def _delta(self, position: int, to_target: np.ndarray, target_totals: np.ndarray, inside: float):
        w = self.network.total_weight
        strength = self.network.strength[position]
        own_rest = self.totals[self.membership[position]] - strength
        return (to_target - inside) / w + strength * (own_rest - target_totals) / (2 * w * w)

    def gain(self, position: int, target: int) -> float:
        if target == self.membership[position]:
            return 0.0
        targets, to, inside = self._links(position)
        link = float(to[targets == target].sum())
        return float(self._delta(position, np.array([link]), self.totals[[target]], inside)[0])

    def gains(self, position: int) -> Tuple[np.ndarray, np.ndarray]:
        targets, to, inside = self._links(position)
        return targets, self._delta(position, to, self.totals[targets], inside)

    def move(self, position: int, target: int) -> None:
        strength = self.network.strength[position]
        self.totals[self.membership[position]] -= strength
        self.totals[target] += strength
        super().move(position, target)

    def value(self) -> float:
        net = self.network
        if net.total_weight == 0:
            raise UndefinedModularityError("modularity is undefined for a graph without edges")
        labels = self.membership
        k = len(net.strength)
        same = labels[net.heads] == labels[net.tails]
        inner = (np.bincount(labels[net.heads][same], weights=net.weights[same], minlength=k)
                 + np.bincount(labels, weights=net.loops, minlength=k))
        totals = np.bincount(labels, weights=net.strength, minlength=k)
        w = net.total_weight
        return float((inner / w - (totals / (2 * w)) ** 2).sum())


def louvain_with_objective(nodes: Sequence[int], objective: Objective, init: Partition,
                           seed: Seed = None, min_gain: Optional[float] = None) -> Partition:
    """Sweep single-node moves until a full sweep moves nothing.

    Each node goes to the candidate with the largest gain above ``min_gain``;
    equal gains go to the lowest community label. The sweep order is drawn
    once from ``seed``.
    """
    nodes = np.asarray(nodes, dtype=np.int64)
    min_gain = get_setting('LOUVAIN_MIN_GAIN') if min_gain is None else min_gain
    objective.bind(nodes, init.labels_for(nodes))
    order = np.random.default_rng(seed).permutation(len(nodes))
    sweeps = 0
    while True:
        sweeps += 1
        moved = 0
        for position in order.tolist():
            targets, gains = objective.gains(position)
            if len(targets) == 0:
                continue
            best = int(np.argmax(gains))
            if gains[best] > min_gain:
                objective.move(position, int(targets[best]))
                moved += 1
        if not moved:
            break
    logger.debug("Local moves converged after %d sweeps", sweeps)
    return objective.partition()


def louvain_modularity(graph: Graph, seed: Seed = None) -> Partition:
    """Two-phase Louvain: local moves, aggregation, repeat until nothing merges."""
    rng = np.random.default_rng(seed)
    network = Network.from_graph(graph)
    membership = np.arange(graph.node_count, dtype=np.int64)
    if network.total_weight == 0:
        return Partition(membership)
    level = 0
    while True:
        positions = np.arange(network.node_count)
        local = louvain_with_objective(positions, ModularityObjective(network),
                                       Partition.singletons(positions), seed=rng)
        membership = local.labels[membership]
        logger.debug("Louvain level %d: %d -> %d communities", level, network.node_count, local.k)
        if local.k == network.node_count:
            break
        network = network.aggregate(local.labels)
        level += 1
    return Partition(membership)


def modularity(graph: Graph, partition: Partition) -> float:
    """Weighted Newman modularity of ``partition`` on ``graph``."""
    w = graph.total_weight
    if w == 0:
        raise UndefinedModularityError("modularity is undefined for a graph without edges")
    labels = partition.labels_for(np.arange(graph.node_count))
    k = int(labels.max()) + 1
    same = labels[graph.heads] == labels[graph.tails]
    inner = np.bincount(labels[graph.heads][same], weights=graph.weights[same], minlength=k)
    totals = np.bincount(labels, weights=graph.weighted_degrees(), minlength=k)
    return float((inner / w - (totals / (2 * w)) ** 2).sum())
