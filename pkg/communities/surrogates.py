"""Surrogate graphs built from cascades, clustered with Louvain.

Every builder returns a weighted undirected graph over the full node id
space; only nodes observed in some cascade (V_0) carry weight, and
:func:`detect` reports the partition restricted to V_0.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Union

import numpy as np
from scipy import sparse

from .cascades import Cascade, CascadeSet, pairwise_gap_sum
from .conf import get_setting
from .exceptions import EmptyInputError, OracleUnavailableError, ValidationError
from .graphs import Graph, Partition
from .louvain import louvain_modularity

logger = logging.getLogger(__name__)


class SurrogateMethod(str, Enum):
    PATH = 'path'
    CLIQUE = 'clique'
    CLIQUE0 = 'clique0'
    COSINE = 'cosine'
    ORACLE = 'oracle'


class CliqueMode(str, Enum):
    AUTO = 'auto'
    ZERO = 'zero'
    EXPLICIT = 'explicit'


@dataclass(frozen=True)
class SurrogateGraph:
    graph: Graph
    observed: np.ndarray
    method: SurrogateMethod
    params: Dict[str, float] = field(default_factory=dict)

    def __repr__(self) -> str:
        return f"SurrogateGraph({self.method.value}, |V_0|={len(self.observed)}, {self.graph!r})"


def _require_cascades(cascade_set: CascadeSet) -> None:
    if len(cascade_set) == 0:
        raise EmptyInputError("no cascades to build a surrogate graph from")


def _assemble(cascade_set: CascadeSet, heads: List[np.ndarray], tails: List[np.ndarray],
              weights: List[np.ndarray], method: SurrogateMethod, **params) -> SurrogateGraph:
    n = cascade_set.node_count
    heads = np.concatenate(heads) if heads else np.zeros(0, dtype=np.int64)
    tails = np.concatenate(tails) if tails else np.zeros(0, dtype=np.int64)
    weights = np.concatenate(weights) if weights else np.zeros(0)
    positive = weights > 0
    merged = Graph.from_arrays(n, heads[positive], tails[positive], weights[positive],
                               index=cascade_set.index, warn_duplicates=False)
    keep = merged.weights >= get_setting('SURROGATE_MIN_WEIGHT')
    graph = Graph(n, merged.heads[keep], merged.tails[keep], merged.weights[keep], index=cascade_set.index)
    return SurrogateGraph(graph, cascade_set.observed_nodes(), method, params)


def build_path(cascade_set: CascadeSet) -> SurrogateGraph:
    """Weight 1 between every pair of consecutively activated nodes."""
    _require_cascades(cascade_set)
    heads = [c.nodes[:-1] for c in cascade_set]
    tails = [c.nodes[1:] for c in cascade_set]
    weights = [np.ones(len(c) - 1) for c in cascade_set]
    return _assemble(cascade_set, heads, tails, weights, SurrogateMethod.PATH)


def _predecessor_probabilities(times: np.ndarray, position: int, a: float) -> np.ndarray:
    """Normalized exp(-a * gap) weights of the events sorted before ``position``."""
    gaps = times[position] - times[:position]
    scores = np.exp(-a * (gaps - gaps.min()))
    return scores / scores.sum()


def clique_prob(cascade: Cascade, i: int, j: int, a: float) -> float:
    """Probability that ``j`` was infected by ``i`` given decay ``a``.

    Nodes sharing a timestamp follow the sorted event order: the earlier
    sorted node counts as a predecessor of the later one.
    """
    if a < 0:
        raise ValidationError("decay a must be nonnegative")
    nodes = cascade.nodes.tolist()
    if i not in nodes or j not in nodes:
        raise ValidationError("both nodes must belong to the cascade")
    pi, pj = nodes.index(i), nodes.index(j)
    if pi >= pj:
        return 0.0
    return float(_predecessor_probabilities(cascade.times, pj, a)[pi])


def mean_pairwise_gap(cascade_set: CascadeSet) -> float:
    """Mean |t_i - t_j| over infected pairs sharing a cascade (0 without pairs)."""
    total = sum(pairwise_gap_sum(c.times) for c in cascade_set)
    pairs = sum(len(c) * (len(c) - 1) // 2 for c in cascade_set)
    return total / pairs if pairs else 0.0


def resolve_clique_decay(cascade_set: CascadeSet, mode: Union[CliqueMode, str] = CliqueMode.AUTO,
                         a: Optional[float] = None) -> float:
    mode = CliqueMode(mode)
    if mode is CliqueMode.ZERO:
        return 0.0
    if mode is CliqueMode.EXPLICIT:
        if a is None or not a >= 0:
            raise ValidationError("explicit Clique mode needs a nonnegative a")
        return float(a)
    gap = mean_pairwise_gap(cascade_set)
    if gap == 0:
        logger.warning("All infection times coincide, falling back to Clique(0)")
        return 0.0
    return 1.0 / gap


def build_clique(cascade_set: CascadeSet, mode: Union[CliqueMode, str] = CliqueMode.AUTO,
                 a: Optional[float] = None) -> SurrogateGraph:
    """Expected number of transmissions along each pair of co-infected nodes."""
    _require_cascades(cascade_set)
    decay = resolve_clique_decay(cascade_set, mode, a)
    heads, tails, weights = [], [], []
    for cascade in cascade_set:
        for position in range(1, len(cascade)):
            heads.append(cascade.nodes[:position])
            tails.append(np.full(position, cascade.nodes[position]))
            weights.append(_predecessor_probabilities(cascade.times, position, decay))
    method = SurrogateMethod.CLIQUE0 if decay == 0 else SurrogateMethod.CLIQUE
    return _assemble(cascade_set, heads, tails, weights, method, a=decay)


def _participation(cascade_set: CascadeSet) -> sparse.csr_matrix:
    rows = np.concatenate([np.full(len(c), k) for k, c in enumerate(cascade_set)])
    cols = np.concatenate([c.nodes for c in cascade_set])
    return sparse.csr_matrix((np.ones(len(rows)), (rows, cols)),
                             shape=(len(cascade_set), cascade_set.node_count))


def build_cosine_sim(cascade_set: CascadeSet) -> SurrogateGraph:
    """Cosine similarity of the nodes' cascade participation vectors."""
    _require_cascades(cascade_set)
    participation = _participation(cascade_set)
    overlap = (participation.T @ participation).tocoo()
    norms = np.sqrt(np.asarray(participation.sum(axis=0)).ravel())
    upper = overlap.row < overlap.col
    rows, cols = overlap.row[upper], overlap.col[upper]
    weights = overlap.data[upper] / (norms[rows] * norms[cols])
    return _assemble(cascade_set, [rows.astype(np.int64)], [cols.astype(np.int64)],
                     [np.minimum(weights, 1.0)], SurrogateMethod.COSINE)


def build_oracle(cascade_set: CascadeSet) -> SurrogateGraph:
    """Count of recorded transmissions between each pair."""
    if cascade_set.transmissions is None:
        raise OracleUnavailableError("these cascades carry no transmission record")
    _require_cascades(cascade_set)
    trees = [tree for tree in cascade_set.transmissions if len(tree)]
    return _assemble(cascade_set, [t[:, 0] for t in trees], [t[:, 1] for t in trees],
                     [np.ones(len(t)) for t in trees], SurrogateMethod.ORACLE)


def build_surrogate(cascade_set: CascadeSet, method: Union[SurrogateMethod, str],
                    a: Optional[float] = None) -> SurrogateGraph:
    method = SurrogateMethod(method)
    if method is SurrogateMethod.PATH:
        return build_path(cascade_set)
    if method is SurrogateMethod.CLIQUE:
        mode = CliqueMode.AUTO if a is None else CliqueMode.EXPLICIT
        return build_clique(cascade_set, mode, a)
    if method is SurrogateMethod.CLIQUE0:
        return build_clique(cascade_set, CliqueMode.ZERO)
    if method is SurrogateMethod.COSINE:
        return build_cosine_sim(cascade_set)
    return build_oracle(cascade_set)


def cluster_surrogate(surrogate: SurrogateGraph, seed=None) -> Partition:
    return louvain_modularity(surrogate.graph, seed).restrict(surrogate.observed)


def detect(cascade_set: CascadeSet, method: Union[SurrogateMethod, str], seed=None,
           a: Optional[float] = None) -> Partition:
    """Build the surrogate for ``method`` and return its Louvain partition of V_0."""
    return cluster_surrogate(build_surrogate(cascade_set, method, a), seed)
