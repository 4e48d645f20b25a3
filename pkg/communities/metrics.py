"""Partition similarity under partial observation.

``pred`` always covers the observed nodes V_0 only; ``truth`` covers every
node. The ``sub`` variants compare on V_0. The ``all`` variants extend
``pred`` to every node: pairs of two unseen nodes count as 0.5 for Pearson,
unseen nodes share one extra cluster for NMI, and each unseen node is its
own singleton for Jaccard and F-measure.

Undefined values are returned as ``None``.
"""
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, Iterable, Optional, Sequence, Union

import numpy as np
from sklearn.metrics import normalized_mutual_info_score, pair_confusion_matrix

from .exceptions import ValidationError
from .graphs import Partition


class Variant(str, Enum):
    SUB = 'sub'
    ALL = 'all'


@dataclass(frozen=True)
class IncidenceSummary:
    """Pair counts: n11 same in both, n10 same in pred only, n01 same in truth only.

    ``half`` counts pairs whose pred entry is 0.5, ``half_same`` those of
    them that share a truth community; neither is part of n11..n00.
    """
    n11: int
    n10: int
    n01: int
    n00: int
    half: int = 0
    half_same: int = 0

    @property
    def pairs(self) -> int:
        return self.n11 + self.n10 + self.n01 + self.n00 + self.half


def _pairs(count) -> int:
    return int(count) * (int(count) - 1) // 2


def _same_pairs(labels: np.ndarray) -> int:
    return sum(_pairs(size) for size in np.bincount(labels)) if len(labels) else 0


def _pair_counts(truth_labels: np.ndarray, pred_labels: np.ndarray) -> IncidenceSummary:
    if len(truth_labels) < 2:
        return IncidenceSummary(0, 0, 0, 0)
    matrix = pair_confusion_matrix(truth_labels, pred_labels) // 2
    return IncidenceSummary(
        n11=int(matrix[1, 1]), n10=int(matrix[0, 1]), n01=int(matrix[1, 0]), n00=int(matrix[0, 0]),
    )


def _observed(pred: Partition, truth: Partition, v0: Optional[Iterable[int]] = None) -> np.ndarray:
    nodes = pred.nodes if v0 is None else np.unique(np.asarray(list(v0), dtype=np.int64))
    truth.labels_for(nodes)
    return nodes


def _unseen(pred: Partition, truth: Partition) -> np.ndarray:
    truth.labels_for(pred.nodes)
    return truth.nodes[~np.isin(truth.nodes, pred.nodes)]


def incidence_summary(pred: Partition, truth: Partition,
                      variant: Union[Variant, str] = Variant.SUB, v0: Optional[Iterable[int]] = None,
                      half_pairs: bool = False) -> IncidenceSummary:
    """Pair counts of ``pred`` against ``truth``.

    For the ``all`` variant unseen nodes are singletons of ``pred``; with
    ``half_pairs`` the pairs of two unseen nodes are split off into
    ``half``/``half_same`` instead.
    """
    variant = Variant(variant)
    if variant is Variant.SUB:
        nodes = _observed(pred, truth, v0)
        return _pair_counts(truth.labels_for(nodes), pred.labels_for(nodes))

    unseen = _unseen(pred, truth)
    nodes = np.concatenate([pred.nodes, unseen])
    pred_labels = np.concatenate([pred.labels, pred.k + np.arange(len(unseen))])
    counts = _pair_counts(truth.labels_for(nodes), pred_labels)
    if not half_pairs:
        return counts
    half = _pairs(len(unseen))
    half_same = _same_pairs(truth.labels_for(unseen))
    return IncidenceSummary(counts.n11, counts.n10, counts.n01 - half_same,
                            counts.n00 - (half - half_same), half, half_same)


def pearson_from_summary(summary: IncidenceSummary) -> Optional[float]:
    """Correlation of the incidence vectors, exact in integer arithmetic.

    Pred entries are doubled to {0, 1, 2} so that half-valued pairs stay
    integral; the correlation is scale-free.
    """
    total = summary.pairs
    pred_sum = 2 * (summary.n11 + summary.n10) + summary.half
    pred_squares = 4 * (summary.n11 + summary.n10) + summary.half
    truth_sum = summary.n11 + summary.n01 + summary.half_same
    joint = 2 * summary.n11 + summary.half_same
    pred_var = total * pred_squares - pred_sum * pred_sum
    truth_var = total * truth_sum - truth_sum * truth_sum
    if total < 1 or pred_var <= 0 or truth_var <= 0:
        return None
    value = (total * joint - pred_sum * truth_sum) / math.sqrt(pred_var * truth_var)
    return float(min(1.0, max(-1.0, value)))


def pearson_sub(pred: Partition, truth: Partition, v0: Optional[Iterable[int]] = None) -> Optional[float]:
    nodes = _observed(pred, truth, v0)
    if len(nodes) < 2:
        return None
    return pearson_from_summary(incidence_summary(pred, truth, Variant.SUB, v0=nodes))


def pearson_all(pred: Partition, truth: Partition) -> Optional[float]:
    return pearson_from_summary(incidence_summary(pred, truth, Variant.ALL, half_pairs=True))


def pearson(pred: Partition, truth: Partition, variant: Union[Variant, str] = Variant.SUB) -> Optional[float]:
    return pearson_sub(pred, truth) if Variant(variant) is Variant.SUB else pearson_all(pred, truth)


def nmi(pred: Partition, truth: Partition, variant: Union[Variant, str] = Variant.SUB) -> Optional[float]:
    """Arithmetic-mean NMI; unseen nodes form one extra ``unknown`` cluster in ``all``."""
    if Variant(variant) is Variant.SUB:
        nodes = _observed(pred, truth)
        pred_labels = pred.labels
    else:
        unseen = _unseen(pred, truth)
        nodes = np.concatenate([pred.nodes, unseen])
        pred_labels = np.concatenate([pred.labels, np.full(len(unseen), pred.k)])
    if len(nodes) == 0:
        return None
    truth_labels = truth.labels_for(nodes)
    if len(np.unique(truth_labels)) == 1 and len(np.unique(pred_labels)) == 1:
        return 1.0
    return float(normalized_mutual_info_score(truth_labels, pred_labels, average_method='arithmetic'))


def jaccard(pred: Partition, truth: Partition, variant: Union[Variant, str] = Variant.SUB) -> float:
    counts = incidence_summary(pred, truth, variant)
    denominator = counts.n11 + counts.n10 + counts.n01
    return counts.n11 / denominator if denominator else 1.0


def f_measure(pred: Partition, truth: Partition, variant: Union[Variant, str] = Variant.SUB) -> float:
    """Harmonic mean of pair precision and pair recall."""
    counts = incidence_summary(pred, truth, variant)
    if counts.n11 == 0:
        return 0.0
    precision = counts.n11 / (counts.n11 + counts.n10)
    recall = counts.n11 / (counts.n11 + counts.n01)
    return 2 * precision * recall / (precision + recall)


METRICS: Dict[str, Callable[[Partition, Partition], Optional[float]]] = {
    'pearson-sub': pearson_sub,
    'pearson-all': pearson_all,
    'nmi-sub': lambda pred, truth: nmi(pred, truth, Variant.SUB),
    'nmi-all': lambda pred, truth: nmi(pred, truth, Variant.ALL),
    'jaccard-sub': lambda pred, truth: jaccard(pred, truth, Variant.SUB),
    'jaccard-all': lambda pred, truth: jaccard(pred, truth, Variant.ALL),
    'f-sub': lambda pred, truth: f_measure(pred, truth, Variant.SUB),
    'f-all': lambda pred, truth: f_measure(pred, truth, Variant.ALL),
}


def evaluate(pred: Partition, truth: Partition, metrics: Sequence[str] = tuple(METRICS)) -> Dict[str, Optional[float]]:
    unknown = [name for name in metrics if name not in METRICS]
    if unknown:
        raise ValidationError(f"unknown metric(s): {', '.join(unknown)}")
    return {name: METRICS[name](pred, truth) for name in metrics}
