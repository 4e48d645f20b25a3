"""LFR benchmark graphs with planted communities.

Follows the usual LFR recipe: a truncated power-law degree sequence, a
power-law community size sequence summing to ``n``, node assignment so that
each node's intra-community degree fits its community, then configuration
model wiring of intra and inter stubs repaired by edge swaps.
"""
import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Set, Tuple

import numpy as np
from scipy.optimize import brentq

from .conf import get_setting
from .exceptions import GenerationError, UndefinedMixingError, ValidationError
from .graphs import DatasetBundle, Graph, NodeIndex, Partition

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LfrConfig:
    n: int
    tau1: float = 2.5
    tau2: float = 1.5
    mu: float = 0.1
    avg_degree: float = 5.0
    max_degree: float = 100.0
    min_community: int = 100
    max_community: int = 600
    seed: Optional[int] = None

    def validate(self) -> 'LfrConfig':
        if self.n < 2:
            raise ValidationError("n must be at least 2")
        if not (self.tau1 > 1 and self.tau2 > 1):
            raise ValidationError("tau1 and tau2 must exceed 1")
        if not 0 <= self.mu < 1:
            raise ValidationError("mu must lie in [0, 1)")
        if not 1 <= self.min_community <= self.max_community <= self.n:
            raise ValidationError("need 1 <= min_community <= max_community <= n")
        if not 0 < self.avg_degree <= self.max_degree:
            raise ValidationError("need 0 < avg_degree <= max_degree")
        if self.max_degree >= self.n:
            raise ValidationError("max_degree must be below n")
        return self


def _power_law_mean(exponent: float, low: float, high: float) -> float:
    def moment(power: float) -> float:
        if abs(power + 1) < 1e-12:
            return np.log(high / low)
        return (high ** (power + 1) - low ** (power + 1)) / (power + 1)
    return moment(1 - exponent) / moment(-exponent)


def sample_power_law(rng: np.random.Generator, exponent: float, low: float, high: float, size: int) -> np.ndarray:
    """Inverse-CDF draws from a density proportional to x**-exponent on [low, high]."""
    u = rng.random(size)
    power = 1 - exponent
    return (low ** power + u * (high ** power - low ** power)) ** (1 / power)


def degree_sequence(config: LfrConfig, rng: np.random.Generator) -> np.ndarray:
    """Integer degrees with mean near ``avg_degree``, none above ``max_degree``, even sum."""
    high = float(config.max_degree)
    target = float(config.avg_degree)
    floor_mean = _power_law_mean(config.tau1, 1.0, high)
    if floor_mean > target:
        raise GenerationError("avg_degree is too low for this exponent and max_degree")
    if target >= high:
        low = high
    elif floor_mean == target:
        low = 1.0
    else:
        # the mean exceeds its lower cutoff, so ``target`` brackets the root
        low = brentq(lambda x: _power_law_mean(config.tau1, x, high) - target, 1.0, target)
    degrees = np.clip(np.rint(sample_power_law(rng, config.tau1, low, high, config.n)), 1, int(high)).astype(np.int64)
    if degrees.sum() % 2:
        growable = np.flatnonzero(degrees < int(high))
        if len(growable):
            degrees[rng.choice(growable)] += 1
        else:
            degrees[0] -= 1
    return degrees


def community_sizes(config: LfrConfig, rng: np.random.Generator) -> np.ndarray:
    """Power-law community sizes in [min_community, max_community] summing to ``n``."""
    low, high = config.min_community, config.max_community
    for _ in range(get_setting('LFR_MAX_RETRIES')):
        sizes: List[int] = []
        while sum(sizes) < config.n:
            draw = sample_power_law(rng, config.tau2, low, high + 1, 1)[0]
            sizes.append(min(int(draw), high))
        sizes = np.array(sizes, dtype=np.int64)
        excess = int(sizes.sum()) - config.n
        for c in rng.permutation(len(sizes)):
            if excess == 0:
                break
            cut = min(excess, int(sizes[c]) - low)
            sizes[c] -= cut
            excess -= cut
        if excess == 0:
            return sizes
    raise GenerationError("could not draw community sizes summing to n")


def intra_degrees(degrees: np.ndarray, mu: float, rng: np.random.Generator) -> np.ndarray:
    """Stochastically rounded ``(1 - mu) * degree``."""
    target = (1 - mu) * degrees
    base = np.floor(target)
    return (base + (rng.random(len(degrees)) < target - base)).astype(np.int64)


def assign_communities(intra: np.ndarray, sizes: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Place nodes (largest intra-degree first) into communities that can hold them.

    A full community evicts a random member back to the queue.
    """
    n = len(intra)
    free = list(np.argsort(intra, kind='stable'))
    members: List[List[int]] = [[] for _ in sizes]
    membership = np.full(n, -1, dtype=np.int64)
    for _ in range(get_setting('LFR_MAX_ASSIGN_ITERS') * n):
        if not free:
            return membership
        node = int(free.pop())
        eligible = np.flatnonzero(sizes > intra[node])
        if len(eligible) == 0:
            raise GenerationError(f"no community can hold a node with intra-degree {intra[node]}")
        c = int(rng.choice(eligible))
        members[c].append(node)
        membership[node] = c
        if len(members[c]) > sizes[c]:
            evicted = members[c].pop(int(rng.integers(len(members[c]))))
            membership[evicted] = -1
            free.append(evicted)
    if free:
        raise GenerationError("could not assign nodes to communities")
    return membership


def _repair_parity(intra: np.ndarray, degrees: np.ndarray, membership: np.ndarray, sizes: np.ndarray,
                   max_degree: int, rng: np.random.Generator) -> None:
    """Make every community's intra stub count even, in place.

    A node first trades an inter stub for an intra one; failing that it
    grows by one intra stub, and only then loses one.
    """
    for c in range(len(sizes)):
        nodes = np.flatnonzero(membership == c)
        if intra[nodes].sum() % 2 == 0:
            continue
        room = intra[nodes] < sizes[c] - 1
        up = nodes[room & (intra[nodes] < degrees[nodes])]
        if len(up):
            intra[rng.choice(up)] += 1
            continue
        grow = nodes[room & (degrees[nodes] < max_degree)]
        if len(grow):
            node = rng.choice(grow)
            degrees[node] += 1
            intra[node] += 1
            continue
        down = nodes[intra[nodes] > 0]
        intra[rng.choice(down)] -= 1
    if (degrees - intra).sum() % 2:
        raise GenerationError("inter-community stubs do not pair up")


class _StubMatching:
    """Random stub pairing plus swap repair of loops, multi-edges and forbidden pairs"""

    def __init__(self, stubs: np.ndarray, allowed: Callable[[int, int], bool], rng: np.random.Generator):
        self.rng = rng
        self.allowed = allowed
        paired = rng.permutation(stubs).reshape(-1, 2)
        self.edges: List[List[int]] = paired.tolist()
        self.by_key: Dict[Tuple[int, int], Set[int]] = defaultdict(set)
        for i, (u, v) in enumerate(self.edges):
            self.by_key[self._key(u, v)].add(i)
        self.bad: Set[int] = {i for i in range(len(self.edges)) if self._is_bad(i)}

    @staticmethod
    def _key(u: int, v: int) -> Tuple[int, int]:
        return (u, v) if u < v else (v, u)

    def _is_bad(self, i: int) -> bool:
        u, v = self.edges[i]
        return u == v or len(self.by_key[self._key(u, v)]) > 1 or not self.allowed(u, v)

    def _fits(self, u: int, v: int) -> bool:
        return u != v and self.allowed(u, v) and not self.by_key.get(self._key(u, v))

    def _replace(self, i: int, u: int, v: int) -> Set[int]:
        old = self._key(*self.edges[i])
        self.by_key[old].discard(i)
        self.edges[i] = [u, v]
        self.by_key[self._key(u, v)].add(i)
        return self.by_key[old] | {i}

    def repair(self, budget: int) -> bool:
        count = len(self.edges)
        for _ in range(budget):
            if not self.bad:
                return True
            i = int(self.rng.choice(sorted(self.bad)))
            j = int(self.rng.integers(count))
            if i == j:
                continue
            a, b = self.edges[i]
            c, d = self.edges[j]
            if self.rng.random() < 0.5:
                c, d = d, c
            if not (self._fits(a, c) and self._fits(b, d)) or self._key(a, c) == self._key(b, d):
                continue
            touched = self._replace(i, a, c) | self._replace(j, b, d)
            for k in touched:
                if self._is_bad(k):
                    self.bad.add(k)
                else:
                    self.bad.discard(k)
        return not self.bad


def _stubs(nodes: np.ndarray, counts: np.ndarray) -> np.ndarray:
    return np.repeat(nodes, counts)


def wire(degrees: np.ndarray, intra: np.ndarray, membership: np.ndarray, rng: np.random.Generator) -> Graph:
    """Configuration-model wiring of intra stubs per community and inter stubs globally."""
    factor = get_setting('LFR_REWIRE_FACTOR')
    edges: List[List[int]] = []
    for c in np.unique(membership):
        nodes = np.flatnonzero(membership == c)
        stubs = _stubs(nodes, intra[nodes])
        if len(stubs) == 0:
            continue
        matching = _StubMatching(stubs, lambda u, v: True, rng)
        if not matching.repair(factor * len(matching.edges)):
            raise GenerationError(f"could not wire community {c} without loops or multi-edges")
        edges.extend(matching.edges)
    inter = degrees - intra
    stubs = _stubs(np.arange(len(degrees)), inter)
    if len(stubs):
        matching = _StubMatching(stubs, lambda u, v: membership[u] != membership[v], rng)
        if not matching.repair(factor * len(matching.edges)):
            raise GenerationError("could not wire inter-community edges")
        edges.extend(matching.edges)
    return Graph.from_edges(len(degrees), edges, warn_duplicates=False)


def generate_lfr(config: LfrConfig) -> DatasetBundle:
    """Draw an LFR graph and its planted partition, retrying failed draws."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    retries = get_setting('LFR_MAX_RETRIES')
    for attempt in range(1, retries + 1):
        try:
            degrees = degree_sequence(config, rng)
            sizes = community_sizes(config, rng)
            intra = np.minimum(intra_degrees(degrees, config.mu, rng), degrees)
            membership = assign_communities(intra, sizes, rng)
            _repair_parity(intra, degrees, membership, sizes, int(config.max_degree), rng)
            graph = wire(degrees, intra, membership, rng)
        except GenerationError as exc:
            logger.warning("LFR attempt %d/%d failed: %s", attempt, retries, exc)
            continue
        graph = Graph(graph.node_count, graph.heads, graph.tails, graph.weights,
                      index=NodeIndex.identity(config.n))
        return DatasetBundle(graph=graph, ground_truth=Partition(membership),
                             name=f"lfr-n{config.n}-mu{config.mu:g}")
    raise GenerationError(f"LFR generation failed after {retries} attempts")


def realized_mixing(graph: Graph, partition: Partition) -> float:
    """Fraction of edges whose endpoints lie in different communities."""
    if graph.edge_count == 0:
        raise UndefinedMixingError("mixing is undefined for a graph without edges")
    labels = partition.labels_for(np.arange(graph.node_count))
    return float((labels[graph.heads] != labels[graph.tails]).mean())


def planted_partition(sizes: Sequence[int], p_in: float, p_out: float, seed: Optional[int] = None,
                      name: str = 'planted') -> DatasetBundle:
    """Random partition graph: edge probability ``p_in`` inside blocks, ``p_out`` across."""
    import networkx as nx

    if not sizes or min(sizes) < 1:
        raise ValidationError("planted partition needs positive block sizes")
    if not (0 <= p_in <= 1 and 0 <= p_out <= 1):
        raise ValidationError("edge probabilities must lie in [0, 1]")
    nx_graph = nx.random_partition_graph(list(sizes), p_in, p_out, seed=seed)
    graph = Graph.from_networkx(nx_graph)
    labels = np.repeat(np.arange(len(sizes)), sizes)
    return DatasetBundle(graph=graph, ground_truth=Partition(labels), name=name)
