"""ClustOpt: community detection by maximizing the C-SI-BD likelihood.

The pipeline starts from the Clique(0) partition, fits the two infection
rates on it once, then improves the partition with single-node moves whose
gain is the exact change of the log-likelihood at those fixed rates.

Rates are parameterized as ``alpha_in = (delta + 1) * alpha_out``; for a
given ``delta`` the best ``alpha_out`` has a closed form, which leaves a
one-dimensional search over ``delta``.
"""
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize_scalar

from .cascades import CascadeSet, pairwise_gap_sum
from .conf import get_setting
from .exceptions import DegenerateInputError, DomainError, FitError, MalformedCascadeError
from .graphs import Partition
from .louvain import Objective, louvain_with_objective
from .surrogates import SurrogateMethod, detect

logger = logging.getLogger(__name__)


def _same_community_counts(labels: np.ndarray, times: np.ndarray) -> np.ndarray:
    """For each event, earlier events of the same community (strictly earlier times)."""
    counts = np.empty(len(times), dtype=np.int64)
    for label in np.unique(labels):
        members = np.flatnonzero(labels == label)
        counts[members] = np.searchsorted(times[members], times[members], side='left')
    return counts


class LikelihoodContext:
    """Per-cascade quantities of the C-SI-BD likelihood under one partition.

    Observed nodes missing from a cascade join its pair sums at ``t = T_max``;
    with ``include_unobserved=False`` the sums run over infected nodes only.
    ``T_max`` is always the per-cascade estimate.
    """

    def __init__(self, cascade_set: CascadeSet, partition: Partition, include_unobserved: bool = True):
        self.cascade_set = cascade_set
        self.include_unobserved = include_unobserved
        self.observed = cascade_set.observed_nodes()
        self.tmax = np.asarray(cascade_set.tmax_estimates, dtype=float)
        self.positions: List[np.ndarray] = [np.searchsorted(self.observed, c.nodes) for c in cascade_set]
        self.times: List[np.ndarray] = [np.asarray(c.times) for c in cascade_set]
        self.n_total: List[np.ndarray] = [np.searchsorted(t, t, side='left') for t in self.times]
        self.qualifies: List[np.ndarray] = [
            (t > 0) & (t < tmax) for t, tmax in zip(self.times, self.tmax)
        ]
        # remaining time of every infected event, the gap to an uninfected node
        self.remaining: List[np.ndarray] = [tmax - t for t, tmax in zip(self.times, self.tmax)]
        for count, mask in zip(self.n_total, self.qualifies):
            if np.any(count[mask] == 0):
                raise MalformedCascadeError("an infected non-source event has no earlier event")

        pair_all = np.array([pairwise_gap_sum(t) for t in self.times], dtype=float)
        if include_unobserved:
            uninfected = len(self.observed) - np.array([len(t) for t in self.times])
            pair_all = pair_all + uninfected * np.array([r.sum() for r in self.remaining])
        self.pair_all = pair_all
        self.event_count = int(sum(mask.sum() for mask in self.qualifies))
        self.labels = partition.labels_for(self.observed)
        self.pair_same, self.n_same = self.partition_terms(self.labels)

    def __len__(self) -> int:
        return len(self.times)

    def partition_terms(self, labels: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
        """Same-community pair sums per cascade and same-community predecessor counts per event."""
        sizes = np.bincount(labels, minlength=int(labels.max()) + 1 if len(labels) else 0)
        pair_same = np.zeros(len(self.times))
        n_same = []
        for c, (positions, times) in enumerate(zip(self.positions, self.times)):
            local = labels[positions]
            total = 0.0
            for label in np.unique(local):
                members = local == label
                total += pairwise_gap_sum(times[members])
                if self.include_unobserved:
                    total += (sizes[label] - members.sum()) * self.remaining[c][members].sum()
            pair_same[c] = total
            n_same.append(_same_community_counts(local, times))
        return pair_same, n_same

    def log_likelihood(self, alpha_in: float, alpha_out: float, labels: Optional[np.ndarray] = None) -> float:
        if not alpha_out > 0:
            raise DomainError("alpha_out must be positive")
        if alpha_in < alpha_out:
            raise DomainError("alpha_in must be at least alpha_out")
        if labels is None:
            pair_same, n_same = self.pair_same, self.n_same
        else:
            pair_same, n_same = self.partition_terms(labels)
        gamma = alpha_in - alpha_out
        value = -gamma * pair_same.sum() - alpha_out * self.pair_all.sum()
        for same, total, mask in zip(n_same, self.n_total, self.qualifies):
            value += np.log(gamma * same[mask] + alpha_out * total[mask]).sum()
        return float(value)

    def optimal_alpha_out(self, delta: float) -> float:
        if delta < 0:
            raise DomainError("delta must be nonnegative")
        denominator = delta * self.pair_same.sum() + self.pair_all.sum()
        if denominator <= 0:
            raise DegenerateInputError("cascades carry no timing information to fit rates on")
        return self.event_count / denominator

    def profile(self, delta: float) -> float:
        """Log-likelihood at ``delta`` with alpha_out at its optimum."""
        alpha_out = self.optimal_alpha_out(delta)
        return self.log_likelihood((delta + 1) * alpha_out, alpha_out)


def log_likelihood(cascade_set: CascadeSet, partition: Partition, alpha_in: float, alpha_out: float,
                   include_unobserved: bool = True) -> float:
    if not alpha_out > 0:
        raise DomainError("alpha_out must be positive")
    return LikelihoodContext(cascade_set, partition, include_unobserved).log_likelihood(alpha_in, alpha_out)


def optimal_alpha_out(cascade_set: CascadeSet, partition: Partition, delta: float,
                      include_unobserved: bool = True) -> float:
    return LikelihoodContext(cascade_set, partition, include_unobserved).optimal_alpha_out(delta)


@dataclass(frozen=True)
class RateEstimate:
    alpha_in: float
    alpha_out: float
    delta: float
    log_likelihood: float

    def as_dict(self) -> Dict[str, float]:
        return {
            'alpha_in': self.alpha_in,
            'alpha_out': self.alpha_out,
            'delta': self.delta,
            'log_likelihood': self.log_likelihood,
        }

    def report(self) -> str:
        return ' '.join(f"{key}={value:.9g}" for key, value in self.as_dict().items())


def _fit_context(context: LikelihoodContext) -> RateEstimate:
    if len(context) == 0:
        raise FitError("no cascades to fit rates on")

    def profile(delta: float) -> float:
        if delta < 0:
            return -np.inf
        try:
            value = context.profile(delta)
        except (DomainError, DegenerateInputError):
            return -np.inf
        return value if np.isfinite(value) else -np.inf

    grid = np.asarray(get_setting('DELTA_GRID'), dtype=float)
    values = np.array([profile(delta) for delta in grid])
    if not np.any(np.isfinite(values)):
        raise FitError("log-likelihood is not finite anywhere on the delta grid")
    best = int(np.argmax(values))
    xtol = get_setting('DELTA_XTOL')

    def negative(delta: float) -> float:
        return -profile(delta)

    if 0 < best < len(grid) - 1 and values[best] > max(values[best - 1], values[best + 1]):
        result = minimize_scalar(negative, bracket=(grid[best - 1], grid[best], grid[best + 1]),
                                 method='golden', tol=xtol)
    else:
        lo, hi = grid[max(best - 1, 0)], grid[min(best + 1, len(grid) - 1)]
        result = minimize_scalar(negative, bounds=(lo, hi), method='bounded',
                                 options={'xatol': xtol * max(grid[best], grid[1])})
    delta = float(result.x)
    if not profile(delta) >= values[best]:
        delta = float(grid[best])
    if best == len(grid) - 1 or delta >= get_setting('DELTA_UPPER_WARN'):
        logger.warning("Fitted delta %.6g sits at the upper end of the search range", delta)

    alpha_out = context.optimal_alpha_out(delta)
    return RateEstimate(
        alpha_in=(delta + 1) * alpha_out,
        alpha_out=alpha_out,
        delta=delta,
        log_likelihood=context.log_likelihood((delta + 1) * alpha_out, alpha_out),
    )


def fit_rates(cascade_set: CascadeSet, partition: Partition, include_unobserved: bool = True) -> RateEstimate:
    """Maximize the profile likelihood over delta: coarse grid, then golden-section refinement."""
    if len(cascade_set) == 0:
        raise FitError("no cascades to fit rates on")
    return _fit_context(LikelihoodContext(cascade_set, partition, include_unobserved))


class LikelihoodObjective(Objective):
    """Exact log-likelihood change of single-node moves at fixed rates.

    Candidate communities of a node are those of the nodes it shares a
    cascade with. Per-community sizes and remaining-time totals support the
    unobserved-node terms.
    """

    def __init__(self, context: LikelihoodContext, alpha_in: float, alpha_out: float):
        if not alpha_out > 0 or alpha_in < alpha_out:
            raise DomainError("rates need alpha_in >= alpha_out > 0")
        self.context = context
        self.alpha_in = alpha_in
        self.alpha_out = alpha_out
        self.gamma = alpha_in - alpha_out

        positions = np.concatenate(context.positions) if len(context) else np.zeros(0, dtype=np.int64)
        cascade_ids = np.repeat(np.arange(len(context)), [len(p) for p in context.positions])
        local_ids = np.concatenate([np.arange(len(p)) for p in context.positions]) if len(context) else positions
        order = np.argsort(positions, kind='stable')
        bounds = np.searchsorted(positions[order], np.arange(len(context.observed) + 1))
        self._incidence = [
            list(zip(cascade_ids[order[lo:hi]].tolist(), local_ids[order[lo:hi]].tolist()))
            for lo, hi in zip(bounds[:-1], bounds[1:])
        ]
        self._remaining_by_node = np.bincount(
            positions, weights=np.concatenate(context.remaining) if len(context) else None,
            minlength=len(context.observed),
        )

    def bind(self, nodes: np.ndarray, labels: np.ndarray) -> None:
        if not np.array_equal(np.asarray(nodes), self.context.observed):
            raise DomainError("the likelihood objective moves exactly the observed nodes")
        super().bind(nodes, labels)
        size = len(self.membership)
        _, self.n_same = self.context.partition_terms(self.membership)
        self.sizes = np.bincount(self.membership, minlength=size)
        self.remaining_totals = np.bincount(self.membership, weights=self._remaining_by_node, minlength=size)

    def candidates(self, position: int) -> np.ndarray:
        members = [self.context.positions[c] for c, _ in self._incidence[position]]
        if not members:
            return np.zeros(0, dtype=np.int64)
        found = np.unique(self.membership[np.concatenate(members)])
        return found[found != self.membership[position]]

    def _log_rate(self, same, total):
        return np.log(self.gamma * same + self.alpha_out * total)

    def gains(self, position: int) -> Tuple[np.ndarray, np.ndarray]:
        targets = self.candidates(position)
        if len(targets) == 0:
            return targets, np.zeros(0)
        ctx, gamma, own = self.context, self.gamma, self.membership[position]
        width = len(targets)
        gain = np.zeros(width)
        constant = 0.0
        remaining_own = 0.0
        remaining_to = np.zeros(width)

        for c, i in self._incidence[position]:
            times = ctx.times[c]
            labels = self.membership[ctx.positions[c]]
            slot = np.searchsorted(targets, labels)
            is_own = labels == own
            others = ~is_own
            here = times[i]
            gaps = np.abs(times - here)
            not_self = np.ones(len(times), dtype=bool)
            not_self[i] = False

            constant += gamma * gaps[is_own & not_self].sum()
            gain -= gamma * np.bincount(slot[others], weights=gaps[others], minlength=width)

            same, total = self.n_same[c], ctx.n_total[c]
            later = (times > here) & ctx.qualifies[c]
            losing = later & is_own
            if np.any(losing):
                constant += (self._log_rate(same[losing] - 1, total[losing])
                             - self._log_rate(same[losing], total[losing])).sum()
            gaining = later & others
            if np.any(gaining):
                change = self._log_rate(same[gaining] + 1, total[gaining]) - self._log_rate(same[gaining], total[gaining])
                gain += np.bincount(slot[gaining], weights=change, minlength=width)

            if ctx.qualifies[c][i]:
                earlier = (times < here) & others
                counts = np.bincount(slot[earlier], minlength=width)
                gain += self._log_rate(counts, total[i]) - self._log_rate(same[i], total[i])

            if ctx.include_unobserved:
                remaining = ctx.remaining[c]
                uninfected_own = self.sizes[own] - is_own.sum()
                uninfected_to = self.sizes[targets] - np.bincount(slot[others], minlength=width)
                gain -= gamma * (uninfected_to - uninfected_own) * remaining[i]
                remaining_own += remaining[is_own].sum()
                remaining_to += np.bincount(slot[others], weights=remaining[others], minlength=width)

        if ctx.include_unobserved:
            elsewhere_to = self.remaining_totals[targets] - remaining_to
            elsewhere_own = self.remaining_totals[own] - remaining_own
            gain -= gamma * (elsewhere_to - elsewhere_own)
        return targets, gain + constant

    def gain(self, position: int, target: int) -> float:
        if target == self.membership[position]:
            return 0.0
        targets, gains = self.gains(position)
        hit = np.flatnonzero(targets == target)
        if len(hit):
            return float(gains[hit[0]])
        return self._gain_outside(position, target)

    def _gain_outside(self, position: int, target: int) -> float:
        """Gain towards a community sharing no cascade with the node."""
        saved = self.membership[position]
        before = self.value()
        self.membership[position] = target
        after = self.value()
        self.membership[position] = saved
        return after - before

    def move(self, position: int, target: int) -> None:
        own = self.membership[position]
        ctx = self.context
        for c, i in self._incidence[position]:
            times = ctx.times[c]
            labels = self.membership[ctx.positions[c]]
            later = times > times[i]
            same = self.n_same[c]
            same[later & (labels == own)] -= 1
            same[later & (labels == target)] += 1
            same[i] = int(((times < times[i]) & (labels == target)).sum())
        self.sizes[own] -= 1
        self.sizes[target] += 1
        self.remaining_totals[own] -= self._remaining_by_node[position]
        self.remaining_totals[target] += self._remaining_by_node[position]
        super().move(position, target)

    def value(self) -> float:
        return self.context.log_likelihood(self.alpha_in, self.alpha_out, labels=self.membership)


def likelihood_gain(state: LikelihoodObjective, node: int, source: int, target: int) -> float:
    """Log-likelihood change of moving observed node ``node`` from ``source`` to ``target``."""
    position = int(np.searchsorted(state.nodes, node))
    if position >= len(state.nodes) or state.nodes[position] != node:
        raise DomainError(f"node {node} is not observed")
    if source == target:
        return 0.0
    if state.community(position) != source:
        raise DomainError(f"node {node} is not in community {source}")
    return state.gain(position, target)


class ClustOpt:
    """Clique(0) start, one rate fit, one likelihood-driven move phase"""

    def __init__(self, cascade_set: CascadeSet, seed=None, include_unobserved: bool = True):
        self.cascade_set = cascade_set
        self.seed = seed
        self.include_unobserved = include_unobserved
        self.initial: Optional[Partition] = None
        self.rates: Optional[RateEstimate] = None

    def run(self) -> Partition:
        init_seed, move_seed = np.random.SeedSequence(self.seed).spawn(2)
        self.initial = detect(self.cascade_set, SurrogateMethod.CLIQUE0, seed=init_seed)
        context = LikelihoodContext(self.cascade_set, self.initial, self.include_unobserved)
        self.rates = _fit_context(context)
        logger.info("ClustOpt rates: %s", self.rates.report())
        objective = LikelihoodObjective(context, self.rates.alpha_in, self.rates.alpha_out)
        return louvain_with_objective(context.observed, objective, self.initial, seed=move_seed)


def clust_opt(cascade_set: CascadeSet, seed=None, include_unobserved: bool = True) -> Partition:
    return ClustOpt(cascade_set, seed, include_unobserved).run()
