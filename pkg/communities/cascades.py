"""Cascade types, epidemic simulators, calibration and cascade files.

Simulation is event-driven: every newly infected node draws its exponential
transmission clocks at once and the earliest tentative infection of each
susceptible node wins (a Dijkstra-style first-passage run). SIR voids the
clocks that fire after the infector's own recovery; SI-BD and C-SI-BD drop
everything at or after the horizon ``t_max``.

Random streams: cascade ``i`` of a run seeded with ``seed`` always uses
``numpy.random.default_rng([seed, i])``, so cascades can be produced in any
order or process and merged by index.
"""
import heapq
import logging
import math
from collections import Counter, OrderedDict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .conf import get_setting
from .exceptions import CalibrationError, ParseError, UndefinedEstimateError, ValidationError
from .graphs import Graph, NodeIndex, Partition

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
Seed = Union[int, np.random.Generator]


class CascadeModel(str, Enum):
    SIR = 'sir'
    SI_BD = 'si-bd'
    C_SI_BD = 'c-si-bd'


class CalibrationGoal(str, Enum):
    MEAN_SIZE_2 = 'mean-size-2'
    SINGLETON_20PCT = 'singleton-20pct'

    @property
    def target(self) -> float:
        return 2.0 if self is CalibrationGoal.MEAN_SIZE_2 else 0.2


# Per-dataset parameters used for the published synthetic epidemics
# (alpha for SIR/SI-BD, alpha_in/alpha_out for C-SI-BD, Lomax shape for SIR).
TABLE_PARAMETERS: Dict[str, Dict[str, float]] = {
    'karate': {'alpha': 0.15, 'alpha_in': 0.09, 'alpha_out': 0.009, 'lomax_shape': 12},
    'dolphins': {'alpha': 0.14, 'alpha_in': 0.047, 'alpha_out': 0.0047, 'lomax_shape': 14},
    'football': {'alpha': 0.07, 'alpha_in': 0.083, 'alpha_out': 0.0083, 'lomax_shape': 32},
    'pol-books': {'alpha': 0.08, 'alpha_in': 0.036, 'alpha_out': 0.0036, 'lomax_shape': 26},
    'eu-core': {'alpha': 0.016, 'alpha_in': 0.012, 'alpha_out': 0.0012, 'lomax_shape': 230},
    'newsgroup': {'alpha': 0.032, 'alpha_in': 0.0058, 'alpha_out': 0.00058, 'lomax_shape': 105},
    'pol-blogs': {'alpha': 0.017, 'alpha_in': 0.0024, 'alpha_out': 0.00024, 'lomax_shape': 216},
    'cora': {'alpha': 0.14, 'alpha_in': 0.0024, 'alpha_out': 0.00024, 'lomax_shape': 23},
    'citeseer': {'alpha': 0.21, 'alpha_in': 0.0019, 'alpha_out': 0.00019, 'lomax_shape': 16},
}


class Cascade:
    """Infected nodes with activation times, sorted by time then node id"""

    __slots__ = ('nodes', 'times')

    def __init__(self, nodes: Sequence[int], times: Sequence[float]):
        nodes = np.asarray(nodes, dtype=np.int64).ravel()
        times = np.asarray(times, dtype=float).ravel()
        if len(nodes) != len(times):
            raise ValidationError("cascade nodes and times must have equal length")
        if len(nodes) == 0:
            raise ValidationError("a cascade has at least one event")
        if not np.all(np.isfinite(times)) or np.any(times < 0):
            raise ValidationError("activation times must be finite and nonnegative")
        if times.min() != 0:
            raise ValidationError("the first event of a cascade is at t = 0")
        order = np.lexsort((nodes, times))
        nodes, times = nodes[order], times[order]
        if len(np.unique(nodes)) != len(nodes):
            raise ValidationError("a node appears twice in one cascade")
        nodes.flags.writeable = False
        times.flags.writeable = False
        self.nodes = nodes
        self.times = times

    @classmethod
    def from_events(cls, events: Sequence[Tuple[int, float]]) -> 'Cascade':
        return cls([node for node, _ in events], [t for _, t in events])

    @property
    def source(self) -> int:
        return int(self.nodes[0])

    @property
    def last_time(self) -> float:
        return float(self.times[-1])

    def events(self) -> List[Tuple[int, float]]:
        return list(zip(self.nodes.tolist(), self.times.tolist()))

    def __len__(self) -> int:
        return len(self.nodes)

    def __eq__(self, other) -> bool:
        return (isinstance(other, Cascade) and np.array_equal(self.nodes, other.nodes)
                and np.array_equal(self.times, other.times))

    def __hash__(self):
        return hash((self.nodes.tobytes(), self.times.tobytes()))

    def __repr__(self) -> str:
        return f"Cascade(size={len(self)}, last={self.last_time:g})"


def pairwise_gap_sum(times: np.ndarray) -> float:
    """Sum of |t_i - t_j| over unordered pairs of an ascending array."""
    m = len(times)
    return float(np.dot(times, 2 * np.arange(m) - (m - 1)))


def estimate_tmax(cascade: Cascade) -> float:
    """Last infection time plus the mean gap between successive infections."""
    if len(cascade) < 2:
        raise UndefinedEstimateError("T_max needs at least two events")
    times = cascade.times
    return float(times[-1] + np.diff(times).mean())


class CascadeSet:
    """Cascades with optional who-infected-whom records and model metadata"""

    def __init__(self, cascades: Sequence[Cascade], node_count: int,
                 transmissions: Optional[Sequence[np.ndarray]] = None,
                 model_info: Optional[Dict] = None, index: Optional[NodeIndex] = None):
        self.cascades: Tuple[Cascade, ...] = tuple(cascades)
        self.node_count = int(node_count)
        self.index = index
        self.model_info = dict(model_info or {})
        if transmissions is not None:
            transmissions = tuple(np.asarray(t, dtype=np.int64).reshape(-1, 2) for t in transmissions)
            if len(transmissions) != len(self.cascades):
                raise ValidationError("one transmission list per cascade is required")
            for cascade, tree in zip(self.cascades, transmissions):
                _check_tree(cascade, tree)
        self.transmissions: Optional[Tuple[np.ndarray, ...]] = transmissions
        for cascade in self.cascades:
            if cascade.nodes.max() >= self.node_count or cascade.nodes.min() < 0:
                raise ValidationError(f"cascade node outside [0, {self.node_count})")
        self.tmax_estimates: Tuple[float, ...] = tuple(
            estimate_tmax(c) if len(c) >= 2 else c.last_time for c in self.cascades
        )

    @property
    def has_transmissions(self) -> bool:
        return self.transmissions is not None

    def __len__(self) -> int:
        return len(self.cascades)

    def __iter__(self) -> Iterator[Cascade]:
        return iter(self.cascades)

    def __getitem__(self, item: int) -> Cascade:
        return self.cascades[item]

    def _subset(self, keep: Sequence[int]) -> 'CascadeSet':
        return CascadeSet(
            [self.cascades[i] for i in keep],
            self.node_count,
            transmissions=None if self.transmissions is None else [self.transmissions[i] for i in keep],
            model_info=self.model_info,
            index=self.index,
        )

    def take(self, count: int) -> 'CascadeSet':
        return self._subset(range(min(count, len(self))))

    def observed_nodes(self) -> np.ndarray:
        """V_0: every node appearing in at least one cascade."""
        if not self.cascades:
            return np.zeros(0, dtype=np.int64)
        return np.unique(np.concatenate([c.nodes for c in self.cascades]))

    def total_transmissions(self) -> int:
        if self.transmissions is not None:
            return int(sum(len(tree) for tree in self.transmissions))
        return int(sum(len(c) - 1 for c in self.cascades))

    def sizes(self) -> np.ndarray:
        return np.array([len(c) for c in self.cascades], dtype=np.int64)

    def mean_size(self) -> float:
        return float(self.sizes().mean()) if self.cascades else 0.0

    def singleton_fraction(self) -> float:
        return float((self.sizes() == 1).mean()) if self.cascades else 0.0

    def size_histogram(self) -> Dict[int, int]:
        return dict(sorted(Counter(self.sizes().tolist()).items()))

    def log_binned_size_distribution(self, bins_per_decade: int = 5) -> Tuple[np.ndarray, np.ndarray]:
        """Bin centres and densities of the cascade-size distribution on log-spaced bins."""
        sizes = self.sizes()
        if len(sizes) == 0:
            return np.zeros(0), np.zeros(0)
        decades = max(math.log10(sizes.max()), 1e-9)
        edges = np.unique(np.floor(np.logspace(0, decades + 1e-9, int(math.ceil(decades * bins_per_decade)) + 2)))
        edges = np.append(edges, edges[-1] + 1)
        counts, edges = np.histogram(sizes, bins=edges)
        widths = np.diff(edges)
        centres = np.sqrt(edges[:-1] * np.maximum(edges[1:] - 1, edges[:-1]))
        return centres, counts / widths / len(sizes)

    def label_of(self, node: int) -> str:
        return self.index.label_of(node) if self.index is not None else str(node)

    def __repr__(self) -> str:
        return f"CascadeSet({len(self)} cascades, model={self.model_info.get('model', '?')})"


def _check_tree(cascade: Cascade, tree: np.ndarray) -> None:
    if len(tree) != len(cascade) - 1:
        raise ValidationError("transmissions must form a tree over the cascade")
    times = dict(zip(cascade.nodes.tolist(), cascade.times.tolist()))
    infectees = set()
    for infector, infectee in tree.tolist():
        if infector not in times or infectee not in times or infectee == cascade.source:
            raise ValidationError("transmission does not match the cascade")
        if infectee in infectees:
            raise ValidationError(f"node {infectee} is infected twice")
        if times[infector] > times[infectee]:
            raise ValidationError("infector activated after its infectee")
        infectees.add(infectee)


def filter_singletons(cascade_set: CascadeSet) -> CascadeSet:
    return cascade_set._subset([i for i, c in enumerate(cascade_set) if len(c) >= 2])


@dataclass(frozen=True)
class EpidemicParams:
    alpha: Optional[float] = None
    beta: float = 1.0
    alpha_in: Optional[float] = None
    alpha_out: Optional[float] = None
    lomax_shape: Optional[float] = None
    t_max: float = 1.0

    def validate(self, model: CascadeModel) -> 'EpidemicParams':
        model = CascadeModel(model)
        if model in (CascadeModel.SIR, CascadeModel.SI_BD):
            if self.alpha is None or not self.alpha > 0:
                raise ValidationError(f"{model.value} needs a positive alpha")
        if model is CascadeModel.SIR:
            if not self.beta > 0:
                raise ValidationError("beta must be positive")
            if self.lomax_shape is not None and not self.lomax_shape > 0:
                raise ValidationError("lomax_shape must be positive")
        else:
            if not self.t_max > 0:
                raise ValidationError("t_max must be positive")
        if model is CascadeModel.C_SI_BD:
            if self.alpha_in is None or self.alpha_out is None:
                raise ValidationError("c-si-bd needs alpha_in and alpha_out")
            if self.alpha_out < 0 or not self.alpha_out < self.alpha_in:
                raise ValidationError("c-si-bd needs 0 <= alpha_out < alpha_in")
        return self

    def as_dict(self) -> Dict:
        return {key: value for key, value in asdict(self).items() if value is not None}


def preset_params(dataset: str, model: CascadeModel) -> EpidemicParams:
    """Published parameters for ``dataset`` restricted to what ``model`` uses."""
    model = CascadeModel(model)
    preset = TABLE_PARAMETERS.get(dataset)
    if preset is None:
        raise ValidationError(f"no preset parameters for dataset {dataset!r}")
    if model is CascadeModel.C_SI_BD:
        params = EpidemicParams(alpha_in=preset['alpha_in'], alpha_out=preset['alpha_out'])
    elif model is CascadeModel.SIR:
        params = EpidemicParams(alpha=preset['alpha'], lomax_shape=preset['lomax_shape'])
    else:
        params = EpidemicParams(alpha=preset['alpha'])
    return params.validate(model)


class SimulationResult(NamedTuple):
    cascade: Cascade
    transmissions: np.ndarray


def stream_rng(seed: int, index: int) -> np.random.Generator:
    """Generator for cascade ``index`` of a run with master ``seed``."""
    return np.random.default_rng([int(seed), int(index)])


def _as_rng(seed: Seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _first_passage(node_count: int, source: int, clocks, horizon: float = math.inf) -> SimulationResult:
    """Run the event queue; ``clocks(u, t, done)`` returns candidate (targets, arrival times)."""
    best = np.full(node_count, math.inf)
    parent = np.full(node_count, -1, dtype=np.int64)
    done = np.zeros(node_count, dtype=bool)
    best[source] = 0.0
    queue = [(0.0, source)]
    nodes, times, tree = [], [], []
    while queue:
        t, u = heapq.heappop(queue)
        if done[u] or t > best[u]:
            continue
        done[u] = True
        nodes.append(u)
        times.append(t)
        if parent[u] >= 0:
            tree.append((int(parent[u]), u))
        targets, arrivals = clocks(u, t, done)
        if len(targets) == 0:
            continue
        better = (arrivals < best[targets]) & (arrivals < horizon)
        for v, arrival in zip(targets[better].tolist(), arrivals[better].tolist()):
            best[v] = arrival
            parent[v] = u
            heapq.heappush(queue, (arrival, v))
    return SimulationResult(Cascade(nodes, times), np.array(tree, dtype=np.int64).reshape(-1, 2))


def _graph_clocks(graph: Graph, rate: float, rng: np.random.Generator, recovery_rate: Optional[float]):
    def clocks(u, t, done):
        nbrs, weights = graph.neighbors(u)
        if recovery_rate is not None:
            recovery = rng.standard_exponential() / recovery_rate
        if len(nbrs) == 0 or rate <= 0:
            return nbrs[:0], np.zeros(0)
        delays = rng.standard_exponential(len(nbrs)) / (rate * weights)
        if recovery_rate is not None:
            delays[delays >= recovery] = math.inf
        open_ = ~done[nbrs]
        return nbrs[open_], t + delays[open_]
    return clocks


def lomax_factor(shape: Optional[float], rng: np.random.Generator) -> float:
    """Per-cascade rate multiplier drawn from Lomax(shape, scale = (shape + 1) / 2).

    The scale makes the karate preset (alpha 0.15, shape 12) produce SIR
    cascades of mean size about 2, the size its alpha gives under SI-BD.
    Returns 1 when no shape is set.
    """
    if shape is None:
        return 1.0
    return float((shape + 1.0) / 2.0 * rng.pareto(shape))


def simulate_sir(graph: Graph, params: EpidemicParams, seed: Seed) -> SimulationResult:
    rng = _as_rng(seed)
    source = int(rng.integers(graph.node_count))
    rate = params.alpha * lomax_factor(params.lomax_shape, rng)
    return _first_passage(graph.node_count, source, _graph_clocks(graph, rate, rng, params.beta))


def simulate_si_bd(graph: Graph, params: EpidemicParams, seed: Seed) -> SimulationResult:
    rng = _as_rng(seed)
    source = int(rng.integers(graph.node_count))
    return _first_passage(graph.node_count, source, _graph_clocks(graph, params.alpha, rng, None),
                          horizon=params.t_max)


def simulate_c_si_bd(ground_truth: Partition, params: EpidemicParams, seed: Seed) -> SimulationResult:
    """Spread over the community structure alone: rate alpha_in inside, alpha_out across."""
    rng = _as_rng(seed)
    labels = ground_truth.labels
    size = len(labels)
    source = int(rng.integers(size))

    def clocks(u, t, done):
        targets = np.flatnonzero(~done)
        if len(targets) == 0:
            return targets, np.zeros(0)
        rates = np.where(labels[targets] == labels[u], params.alpha_in, params.alpha_out)
        with np.errstate(divide='ignore'):
            delays = rng.standard_exponential(len(targets)) / rates
        return targets, t + delays

    local = _first_passage(size, source, clocks, horizon=params.t_max)
    nodes = ground_truth.nodes
    cascade = Cascade(nodes[local.cascade.nodes], local.cascade.times)
    return SimulationResult(cascade, nodes[local.transmissions].reshape(-1, 2))


def _simulator(model: CascadeModel):
    return {
        CascadeModel.SIR: simulate_sir,
        CascadeModel.SI_BD: simulate_si_bd,
        CascadeModel.C_SI_BD: simulate_c_si_bd,
    }[CascadeModel(model)]


def iter_cascades(target: Union[Graph, Partition], model: CascadeModel, params: EpidemicParams,
                  seed: int, start: int = 0) -> Iterator[SimulationResult]:
    """Endless stream of simulated cascades ``start, start+1, ...``."""
    simulate = _simulator(model)
    index = start
    while True:
        yield simulate(target, params, stream_rng(seed, index))
        index += 1


def _simulate_range(args) -> List[SimulationResult]:
    target, model, params, seed, start, stop = args
    simulate = _simulator(model)
    return [simulate(target, params, stream_rng(seed, i)) for i in range(start, stop)]


def _node_count(target: Union[Graph, Partition]) -> int:
    if isinstance(target, Graph):
        return target.node_count
    return int(target.nodes.max()) + 1 if len(target) else 0


def generate_cascades(target: Union[Graph, Partition], model: CascadeModel, params: EpidemicParams,
                      num_cascades: int, seed: int, workers: int = 1,
                      index: Optional[NodeIndex] = None) -> CascadeSet:
    """Simulate ``num_cascades`` cascades; chunks may run in worker processes."""
    model = CascadeModel(model)
    params.validate(model)
    if isinstance(target, Graph) and index is None:
        index = target.index
    if workers > 1 and num_cascades > workers:
        step = math.ceil(num_cascades / workers)
        chunks = [(target, model, params, seed, lo, min(lo + step, num_cascades))
                  for lo in range(0, num_cascades, step)]
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = [r for chunk in executor.map(_simulate_range, chunks) for r in chunk]
    else:
        results = _simulate_range((target, model, params, seed, 0, num_cascades))
    return CascadeSet(
        [r.cascade for r in results],
        _node_count(target),
        transmissions=[r.transmissions for r in results],
        model_info={'model': model.value, 'seed': seed, **params.as_dict()},
        index=index,
    )


def _max_mean_size(target: Union[Graph, Partition]) -> float:
    """Mean component size seen from a uniformly random source."""
    if isinstance(target, Partition):
        return float(len(target))
    n = target.node_count
    adjacency = csr_matrix((target.weights, (target.heads, target.tails)), shape=(n, n))
    _, labels = connected_components(adjacency, directed=False)
    sizes = np.bincount(labels)
    return float((sizes ** 2).sum() / n)


def _min_singleton_fraction(target: Union[Graph, Partition]) -> float:
    if isinstance(target, Partition):
        return 1.0 if len(target) < 2 else 0.0
    return float((target.degrees() == 0).mean())


def calibrate(target: Union[Graph, Partition], model: CascadeModel,
              goal: Optional[CalibrationGoal] = None, seed: int = 0,
              base: Optional[EpidemicParams] = None, batch_size: Optional[int] = None) -> EpidemicParams:
    """Bisect the free rate until the Monte Carlo statistic hits the goal.

    The free rate is ``alpha`` for SIR and SI-BD and ``alpha_out`` (with
    ``alpha_in = 10 * alpha_out``) for C-SI-BD. Every trial rate reuses the same
    random streams, so the statistic moves monotonically with the rate.
    """
    model = CascadeModel(model)
    if goal is None:
        goal = CalibrationGoal.SINGLETON_20PCT if model is CascadeModel.C_SI_BD else CalibrationGoal.MEAN_SIZE_2
    goal = CalibrationGoal(goal)
    base = base or EpidemicParams()
    batch_size = batch_size or get_setting('CALIBRATION_BATCH_SIZE')
    tolerance = get_setting('CALIBRATION_TOLERANCE')
    rate_min, rate_max = get_setting('CALIBRATION_RATE_BOUNDS')
    wanted = goal.target

    if goal is CalibrationGoal.MEAN_SIZE_2:
        increasing = True
        if wanted >= _max_mean_size(target):
            raise CalibrationError(f"mean cascade size {wanted} is unreachable on this input")
    else:
        increasing = False
        if wanted <= _min_singleton_fraction(target):
            raise CalibrationError(f"singleton fraction {wanted} is unreachable on this input")

    def with_rate(rate: float) -> EpidemicParams:
        if model is CascadeModel.C_SI_BD:
            return replace(base, alpha_in=10 * rate, alpha_out=rate)
        return replace(base, alpha=rate)

    def measure(rate: float) -> float:
        cascades = generate_cascades(target, model, with_rate(rate), batch_size, seed)
        value = cascades.mean_size() if increasing else cascades.singleton_fraction()
        logger.debug("calibration trial rate=%.6g statistic=%.6g", rate, value)
        return value

    def below(value: float) -> bool:
        return value < wanted if increasing else value > wanted

    if isinstance(target, Graph):
        mean_degree = target.weighted_degrees().mean() if target.node_count else 0.0
        guess = 1.0 / max(mean_degree, 1.0)
    else:
        guess = 1.0 / max(len(target), 1)

    lo = hi = guess
    value = measure(guess)
    if abs(value - wanted) <= tolerance * wanted:
        return with_rate(guess)
    if below(value):
        while below(value):
            lo, hi = hi, hi * 4
            if hi > rate_max:
                raise CalibrationError("could not bracket the calibration target from above")
            value = measure(hi)
    else:
        while not below(value):
            hi, lo = lo, lo / 4
            if lo < rate_min:
                raise CalibrationError("could not bracket the calibration target from below")
            value = measure(lo)

    for _ in range(get_setting('CALIBRATION_MAX_ITERS')):
        mid = math.sqrt(lo * hi)
        value = measure(mid)
        if abs(value - wanted) <= tolerance * wanted:
            return with_rate(mid)
        if below(value):
            lo = mid
        else:
            hi = mid
    raise CalibrationError("calibration did not converge")


def _check_label(label: str) -> str:
    if any(ch in label for ch in ':;>\t\n'):
        raise ValidationError(f"node label {label!r} cannot be written to a cascade file")
    return label


def write_cascades(cascade_set: CascadeSet, path: PathLike) -> None:
    """One cascade per line: ``node:time`` events joined by ``;``."""
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        for cascade in cascade_set:
            events = (f"{_check_label(cascade_set.label_of(node))}:{t:.9g}"
                      for node, t in zip(cascade.nodes.tolist(), cascade.times.tolist()))
            handle.write(';'.join(events) + '\n')


def write_transmissions(cascade_set: CascadeSet, path: PathLike) -> None:
    if cascade_set.transmissions is None:
        raise ValidationError("cascade set has no transmissions to write")
    with open(path, 'w', encoding='utf-8', newline='\n') as handle:
        for tree in cascade_set.transmissions:
            pairs = (f"{cascade_set.label_of(a)}>{cascade_set.label_of(b)}" for a, b in tree.tolist())
            handle.write(';'.join(pairs) + '\n')


def _lookup(index: NodeIndex, label: str, strict: bool, line_no: int) -> int:
    if strict and label not in index:
        raise ValidationError(f"line {line_no}: unknown node {label!r}")
    return index.add(label)


def read_cascades(path: PathLike, index: Optional[NodeIndex] = None,
                  transmissions_path: Optional[PathLike] = None) -> CascadeSet:
    """Parse a cascade file; with ``index`` every label must already be known."""
    strict = index is not None
    index = index if index is not None else NodeIndex()
    cascades = []
    with open(path, 'r', encoding='utf-8') as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith('#'):
                continue
            events = []
            for token in line.split(';'):
                label, sep, time = token.rpartition(':')
                if not sep or not label:
                    raise ParseError(f"bad event {token!r}, expected 'node:time'", line_no)
                try:
                    t = float(time)
                except ValueError:
                    raise ParseError(f"bad time {time!r}", line_no)
                events.append((_lookup(index, label.strip(), strict, line_no), t))
            try:
                cascades.append(Cascade.from_events(events))
            except ValidationError as exc:
                raise ParseError(str(exc), line_no)
    trees = None
    if transmissions_path is not None:
        trees = read_transmissions(transmissions_path, index)
        if len(trees) != len(cascades):
            raise ParseError(f"{len(trees)} transmission lines for {len(cascades)} cascades")
    return CascadeSet(cascades, len(index), transmissions=trees,
                      model_info={'model': 'file', 'source': str(path)}, index=index)


def read_transmissions(path: PathLike, index: NodeIndex) -> List[np.ndarray]:
    """Parse ``infector>infectee`` lines; every label must be in ``index``."""
    trees = []
    with open(path, 'r', encoding='utf-8') as handle:
        for line_no, raw in enumerate(handle, start=1):
            pairs = []
            for token in filter(None, raw.rstrip('\n').split(';')):
                infector, sep, infectee = token.partition('>')
                if not sep:
                    raise ParseError(f"bad transmission {token!r}", line_no)
                pairs.append((_lookup(index, infector, True, line_no),
                              _lookup(index, infectee, True, line_no)))
            trees.append(np.array(pairs, dtype=np.int64).reshape(-1, 2))
    return trees


RETWEET_COLUMNS = ('source_user_id', 'retweeter_id', 'timestamp', 'hashtag_list', 'hyperlink_count')


def ingest_retweet_log(path: PathLike, index: Optional[NodeIndex] = None) -> CascadeSet:
    """Extract cascades from a retweet log.

    A cascade is keyed by (hashtags, source user, hyperlink count). The
    source's own post is placed one first-to-second retweet gap before the
    first retweet (gap 0 when there is a single retweet) and times are
    shifted so the source sits at 0. With a given ``index`` users outside it
    are skipped.
    """
    strict = index is not None
    index = index if index is not None else NodeIndex()
    groups: 'OrderedDict[Tuple, List[Tuple[float, str]]]' = OrderedDict()
    with open(path, 'r', encoding='utf-8') as handle:
        for row_no, raw in enumerate(handle, start=1):
            line = raw.rstrip('\n').rstrip('\r')
            if not line.strip() or line.startswith('#'):
                continue
            fields = line.split('\t')
            if fields[0].strip() == RETWEET_COLUMNS[0]:
                continue
            if len(fields) != len(RETWEET_COLUMNS):
                raise ParseError(f"expected {len(RETWEET_COLUMNS)} tab-separated columns", row_no)
            source, retweeter, stamp, hashtags, links = (f.strip() for f in fields)
            try:
                timestamp = float(stamp)
                link_count = int(links)
            except ValueError:
                raise ParseError("timestamp or hyperlink count is not a number", row_no)
            if not source or not retweeter:
                raise ParseError("empty user id", row_no)
            tags = tuple(tag.strip().lower() for tag in hashtags.split(',') if tag.strip())
            groups.setdefault((tags, source, link_count), []).append((timestamp, retweeter))

    cascades, skipped = [], 0
    for (_, source, _), retweets in groups.items():
        retweets.sort()
        first = retweets[0][0]
        gap = retweets[1][0] - first if len(retweets) > 1 else 0.0
        origin = first - gap
        if strict and source not in index:
            skipped += 1
            continue
        events, seen = [(index.add(source), 0.0)], {source}
        for timestamp, user in retweets:
            if user in seen:
                continue
            if strict and user not in index:
                skipped += 1
                continue
            seen.add(user)
            events.append((index.add(user), timestamp - origin))
        cascades.append(Cascade.from_events(events))
    if skipped:
        logger.warning("Skipped %d retweets or cascades with users outside the node index", skipped)
    return CascadeSet(cascades, len(index), model_info={'model': 'retweet-log', 'source': str(path)},
                      index=index)
