"""Benchmark orchestration.

A bench run is a grid of (dataset, seed) jobs. Each job draws or loads its
cascades once, cuts them into budget prefixes and runs every algorithm on
every prefix. Rows go to an append-only ``results.csv`` keyed by
(dataset, model, algorithm, budget, seed), so a rerun skips finished cells.
"""
import csv
import logging
import math
from collections import OrderedDict, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
import yaml
from django.core.cache import cache
from django.template.loader import render_to_string
from scipy.stats import rankdata

from .cascades import (
    TABLE_PARAMETERS, CalibrationGoal, CascadeModel, CascadeSet, EpidemicParams, calibrate, filter_singletons,
    ingest_retweet_log, iter_cascades, preset_params, read_cascades,
)
from .clustopt import clust_opt
from .conf import get_setting
from .exceptions import (
    CascadeCommunitiesError, EmptyInputError, ParseError, UndefinedRelativeSizeError, ValidationError,
)
from .graphs import Graph, Partition, load_communities, load_dataset, load_edge_list, load_partition_labels
from .lfr import LfrConfig, generate_lfr, planted_partition
from .metrics import evaluate
from .surrogates import detect

logger = logging.getLogger(__name__)

RESULT_COLUMNS = ('dataset', 'model', 'algorithm', 'budget', 'S', 'seed', 'metric', 'value')
AGGREGATE_COLUMNS = ('metric', 'bucket', 'algorithm', 'mean_value', 'mean_rank', 'datasets')
FAILED = 'failed'
APPROX = 'approx'
OBSERVED = 'observed'
# Simulated cascades allowed per requested non-singleton cascade or transmission.
MAX_DRAWS_PER_UNIT = 1000


def format_number(value: float) -> str:
    return f"{value:.10g}"


def run_algorithm(algorithm: str, cascade_set: CascadeSet, seed=None, include_unobserved: bool = True) -> Partition:
    """Partition of V_0 found by one surrogate method or by ClustOpt."""
    if algorithm == 'clustopt':
        return clust_opt(cascade_set, seed=seed, include_unobserved=include_unobserved)
    return detect(cascade_set, algorithm, seed=seed)


def relative_size(cascade_set: CascadeSet, graph: Graph) -> float:
    """Average number of transmissions per graph edge.

    Without a transmission record every cascade counts ``|C| - 1``.
    """
    if graph.edge_count == 0:
        raise UndefinedRelativeSizeError("S is undefined for a graph without edges")
    if len(cascade_set) == 0:
        return 0.0
    return cascade_set.total_transmissions() / graph.edge_count


def s_bucket(value: Optional[float], buckets: Optional[Sequence[float]] = None) -> Optional[float]:
    """Nearest bucket on a log scale; ``None`` for missing or nonpositive S."""
    if value is None or not value > 0:
        return None
    buckets = np.asarray(buckets if buckets is not None else get_setting('S_BUCKETS'), dtype=float)
    return float(buckets[np.argmin(np.abs(np.log(buckets) - math.log(value)))])


@dataclass
class ExperimentSpec:
    datasets: List[Dict]
    algorithms: List[str]
    budgets: List[float]
    output: Path
    budget_kind: str = 'count'
    metrics: List[str] = field(default_factory=list)
    seeds: List[int] = field(default_factory=lambda: [0])
    model: Optional[CascadeModel] = None
    params: Optional[Dict] = None
    calibrate: Optional[CalibrationGoal] = None
    preset: bool = False
    workers: int = 1
    plots: bool = False
    include_unobserved: bool = True

    @classmethod
    def from_validated(cls, data: Dict) -> 'ExperimentSpec':
        return cls(
            datasets=[dict(entry) for entry in data['datasets']],
            algorithms=list(data['algorithms']),
            budgets=sorted(set(float(b) for b in data['budgets'])),
            output=Path(data['output']),
            budget_kind=data.get('budget_kind', 'count'),
            metrics=list(data['metrics']),
            seeds=list(data.get('seeds', [0])),
            model=CascadeModel(data['model']) if data.get('model') else None,
            params=dict(data['params']) if data.get('params') else None,
            calibrate=CalibrationGoal(data['calibrate']) if data.get('calibrate') else None,
            preset=bool(data.get('preset', False)),
            workers=int(data.get('workers', 1)),
            plots=bool(data.get('plots', False)),
            include_unobserved=bool(data.get('include_unobserved', True)),
        )


@dataclass
class DatasetSource:
    """A loaded dataset: ground truth plus a graph, observed cascades, or both"""
    name: str
    truth: Partition
    graph: Optional[Graph] = None
    cascades: Optional[CascadeSet] = None

    @property
    def observed(self) -> bool:
        return self.cascades is not None


class DatasetLoader:
    """Turns validated dataset entries into :class:`DatasetSource` objects"""

    def load(self, entry: Dict) -> DatasetSource:
        name = entry['name']
        if 'networkx' in entry:
            return self._networkx(name, entry['networkx'])
        if 'planted' in entry:
            planted = entry['planted']
            bundle = planted_partition(planted['sizes'], planted['p_in'], planted['p_out'],
                                       seed=planted.get('seed', 0), name=name)
            return DatasetSource(name, bundle.ground_truth, graph=bundle.graph)
        if 'lfr' in entry:
            bundle = generate_lfr(LfrConfig(**entry['lfr']))
            return DatasetSource(name, bundle.ground_truth, graph=bundle.graph)
        if 'cascades' in entry or 'retweets' in entry:
            return self._observed(name, entry)
        bundle = load_dataset(name, entry['edges'], entry['communities'])
        return DatasetSource(name, bundle.ground_truth, graph=bundle.graph)

    @staticmethod
    def _networkx(name: str, which: str) -> DatasetSource:
        import networkx as nx

        if which != 'karate':
            raise ValidationError(f"unknown networkx dataset {which!r}")
        nx_graph = nx.karate_club_graph()
        graph = Graph.from_networkx(nx_graph, weight=None)
        truth = Partition([nx_graph.nodes[node]['club'] for node in nx_graph.nodes()])
        return DatasetSource(name, truth, graph=graph)

    @staticmethod
    def _observed(name: str, entry: Dict) -> DatasetSource:
        graph = None
        if 'edges' in entry:
            graph = load_edge_list(entry['edges'])
            index, truth = graph.index, load_communities(entry['communities'], graph)
        else:
            index, truth = load_partition_labels(entry['communities'])
        if 'cascades' in entry:
            cascades = read_cascades(entry['cascades'], index=index,
                                     transmissions_path=entry.get('transmissions'))
        else:
            cascades = ingest_retweet_log(entry['retweets'], index=index)
        logger.info("Loaded %d cascades for %s", len(cascades), name)
        return DatasetSource(name, truth, graph=graph, cascades=cascades)


@dataclass
class ResultRow:
    dataset: str
    model: str
    algorithm: str
    budget: str
    S: str
    seed: str
    metric: str
    value: str

    @property
    def key(self) -> Tuple[str, str, str, str, str]:
        return (self.dataset, self.model, self.algorithm, self.budget, self.seed)

    @property
    def numeric(self) -> Optional[float]:
        if self.value in ('', FAILED):
            return None
        return float(self.value)

    @property
    def s_value(self) -> Optional[float]:
        text = self.S.split()[0] if self.S.strip() else ''
        return float(text) if text else None

    def as_row(self) -> List[str]:
        return [self.dataset, self.model, self.algorithm, self.budget, self.S, self.seed, self.metric, self.value]


class ResultsWriter:
    """Append-only results CSV; the header is written once"""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)

    def read(self) -> List[ResultRow]:
        if not self.path.exists():
            return []
        with open(self.path, 'r', encoding='utf-8', newline='') as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header is None:
                return []
            if tuple(header) != RESULT_COLUMNS:
                raise ParseError(f"{self.path} is not a results file", 1)
            return [ResultRow(*row) for row in reader if len(row) == len(RESULT_COLUMNS)]

    def completed(self) -> Set[Tuple[str, ...]]:
        return {row.key for row in self.read()}

    def append(self, rows: Iterable[ResultRow]) -> None:
        fresh = not self.path.exists() or self.path.stat().st_size == 0
        with open(self.path, 'a', encoding='utf-8', newline='') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            if fresh:
                writer.writerow(RESULT_COLUMNS)
            writer.writerows(row.as_row() for row in rows)


@dataclass
class EvalReport:
    rows: List[ResultRow]

    def metrics(self) -> List[str]:
        return list(OrderedDict.fromkeys(row.metric for row in self.rows))

    def algorithms(self) -> List[str]:
        return list(OrderedDict.fromkeys(row.algorithm for row in self.rows))

    def models(self) -> List[str]:
        return list(OrderedDict.fromkeys(row.model for row in self.rows))

    def buckets(self, metric: str) -> List[float]:
        found = {s_bucket(row.s_value) for row in self.rows if row.metric == metric}
        return sorted(b for b in found if b is not None)

    def __len__(self) -> int:
        return len(self.rows)


@dataclass
class CellJob:
    """All budgets and algorithms for one (dataset, seed)"""
    source: DatasetSource
    model_label: str
    seed: int
    algorithms: List[str]
    budgets: List[float]
    budget_kind: str
    metrics: List[str]
    completed: Set[Tuple[str, ...]]
    model: Optional[CascadeModel] = None
    params: Optional[EpidemicParams] = None
    error: Optional[str] = None
    include_unobserved: bool = True

    def _target(self):
        if self.model is CascadeModel.C_SI_BD:
            return self.source.truth
        return self.source.graph

    def _needed(self) -> Tuple[int, int]:
        """Largest cascade count and transmission count any budget asks for."""
        if self.budget_kind == 'count':
            return int(max(self.budgets)), 0
        return 0, math.ceil(max(self.budgets) * self.source.graph.edge_count)

    def _simulate(self) -> CascadeSet:
        count, transmissions = self._needed()
        max_draws = MAX_DRAWS_PER_UNIT * max(1, count, transmissions)
        cascades, trees, total = [], [], 0
        stream = iter_cascades(self._target(), self.model, self.params, self.seed)
        for drawn, result in enumerate(stream, start=1):
            if len(result.cascade) >= 2:
                cascades.append(result.cascade)
                trees.append(result.transmissions)
                total += len(result.transmissions)
            if len(cascades) >= count and total >= transmissions:
                break
            if drawn >= max_draws:
                logger.warning("%s seed %d: stopped after %d draws with %d non-singleton cascades",
                               self.source.name, self.seed, drawn, len(cascades))
                break
        node_count = self.source.graph.node_count if self.source.graph is not None else len(self.source.truth)
        return CascadeSet(cascades, node_count, transmissions=trees,
                          model_info={'model': self.model.value, 'seed': self.seed, **self.params.as_dict()},
                          index=self.source.graph.index if self.source.graph is not None else None)

    def _pool(self) -> CascadeSet:
        if self.source.observed:
            return filter_singletons(self.source.cascades)
        return self._simulate()

    def _prefix_for(self, pool: CascadeSet, budget: float) -> Optional[CascadeSet]:
        if self.budget_kind == 'count':
            return pool.take(int(budget)) if budget <= len(pool) else None
        if self.source.graph is None:
            return None
        wanted = budget * self.source.graph.edge_count
        if wanted <= 0:
            return pool.take(0)
        if pool.transmissions is not None:
            counts = np.array([len(tree) for tree in pool.transmissions])
        else:
            counts = pool.sizes() - 1
        reached = np.flatnonzero(np.cumsum(counts) >= wanted)
        return pool.take(int(reached[0]) + 1) if len(reached) else None

    def _s_label(self, prefix: Optional[CascadeSet]) -> str:
        if prefix is None or self.source.graph is None or self.source.graph.edge_count == 0:
            return ''
        value = f"{relative_size(prefix, self.source.graph):.6g}"
        if prefix.transmissions is None:
            return f"{value} {APPROX}"
        return value

    def _cell(self, algorithm: str, budget: str, s_label: str, prefix: Optional[CascadeSet],
              reason: Optional[str]) -> List[ResultRow]:
        def row(metric: str, value: str) -> ResultRow:
            return ResultRow(self.source.name, self.model_label, algorithm, budget, s_label,
                             str(self.seed), metric, value)

        try:
            if reason is not None:
                raise EmptyInputError(reason)
            predicted = run_algorithm(algorithm, prefix, seed=self.seed,
                                      include_unobserved=self.include_unobserved)
            values = evaluate(predicted, self.source.truth, self.metrics)
        except CascadeCommunitiesError as exc:
            logger.warning("%s/%s budget %s seed %d failed: %s",
                           self.source.name, algorithm, budget, self.seed, exc)
            return [row(metric, FAILED) for metric in self.metrics]
        return [row(metric, '' if value is None else format_number(value)) for metric, value in values.items()]

    def run(self) -> List[ResultRow]:
        pool, reason = None, self.error
        if reason is None:
            try:
                pool = self._pool()
            except CascadeCommunitiesError as exc:
                reason = str(exc)
        rows = []
        for budget in self.budgets:
            label = format_number(budget)
            prefix = None if pool is None else self._prefix_for(pool, budget)
            cell_reason = reason
            if cell_reason is None and prefix is None:
                cell_reason = f"not enough cascades for budget {label}"
            s_label = self._s_label(prefix)
            for algorithm in self.algorithms:
                key = (self.source.name, self.model_label, algorithm, label, str(self.seed))
                if key in self.completed:
                    continue
                rows.extend(self._cell(algorithm, label, s_label, prefix, cell_reason))
        return rows


def run_job(job: CellJob) -> List[ResultRow]:
    return job.run()


class ExperimentRunner:
    """Runs an :class:`ExperimentSpec` and writes its results, aggregates and plots"""

    def __init__(self, spec: ExperimentSpec, loader: Optional[DatasetLoader] = None,
                 progress: Optional[Callable[[str], None]] = None):
        self.spec = spec
        self.loader = loader or DatasetLoader()
        self.progress = progress or (lambda message: None)

    @property
    def results_path(self) -> Path:
        return Path(self.spec.output) / 'results.csv'

    def _base_params(self, source: DatasetSource) -> EpidemicParams:
        """Parameters calibration starts from; only the free rate gets replaced."""
        spec = self.spec
        if spec.params is not None:
            return EpidemicParams(**spec.params)
        if source.name in TABLE_PARAMETERS:
            return preset_params(source.name, spec.model)
        return EpidemicParams()

    def _params(self, source: DatasetSource) -> EpidemicParams:
        spec = self.spec
        if spec.calibrate is None:
            if spec.preset:
                return preset_params(source.name, spec.model)
            return EpidemicParams(**spec.params).validate(spec.model)
        base = self._base_params(source)
        cache_key = (f"calibration:{source.name}:{spec.model.value}:{spec.calibrate.value}:{spec.seeds[0]}:"
                     f"{base.beta:g}:{base.lomax_shape}:{base.t_max:g}")
        cached = cache.get(cache_key)
        if cached:
            return cached
        target = source.truth if spec.model is CascadeModel.C_SI_BD else source.graph
        params = calibrate(target, spec.model, spec.calibrate, seed=spec.seeds[0], base=base)
        cache.set(cache_key, params, None)
        return params

    def _jobs(self, sources: Sequence[DatasetSource], completed: Set[Tuple[str, ...]]) -> List[CellJob]:
        spec = self.spec
        jobs = []
        for source in sources:
            params, error = None, None
            if not source.observed:
                try:
                    params = self._params(source)
                    self.progress(f"{source.name}: {spec.model.value} {params.as_dict()}")
                except CascadeCommunitiesError as exc:
                    logger.warning("No cascade parameters for %s: %s", source.name, exc)
                    error = str(exc)
            model_label = OBSERVED if source.observed else spec.model.value
            for seed in spec.seeds:
                jobs.append(CellJob(
                    source=source, model_label=model_label, seed=seed, algorithms=spec.algorithms,
                    budgets=spec.budgets, budget_kind=spec.budget_kind, metrics=spec.metrics,
                    completed=completed, model=None if source.observed else spec.model,
                    params=params, error=error, include_unobserved=spec.include_unobserved,
                ))
        return jobs

    def run(self) -> EvalReport:
        spec = self.spec
        output = Path(spec.output)
        output.mkdir(parents=True, exist_ok=True)
        writer = ResultsWriter(self.results_path)
        completed = writer.completed()
        if completed:
            self.progress(f"Resuming: {len(completed)} cells already in {self.results_path}")
        sources = [self.loader.load(entry) for entry in spec.datasets]
        jobs = self._jobs(sources, completed)

        def record(job: CellJob, rows: List[ResultRow]) -> None:
            writer.append(rows)
            self.progress(f"{job.source.name} seed {job.seed}: {len(rows)} rows")

        if spec.workers > 1 and len(jobs) > 1:
            with ProcessPoolExecutor(max_workers=spec.workers) as executor:
                for job, rows in zip(jobs, executor.map(run_job, jobs)):
                    record(job, rows)
        else:
            for job in jobs:
                record(job, run_job(job))

        report = EvalReport(writer.read())
        write_aggregates(report, output / 'aggregates.csv')
        for axis in ('budget', 'S'):
            emit_plot_data(report, axis, output / 'plots', svg=spec.plots)
        return report


def run_experiment(spec: ExperimentSpec, progress: Optional[Callable[[str], None]] = None) -> EvalReport:
    return ExperimentRunner(spec, progress=progress).run()


@dataclass(frozen=True)
class BucketSummary:
    mean_value: float
    mean_rank: float
    datasets: int


def summarize_bucket(report: EvalReport, metric: str, bucket: Optional[float] = None) -> Dict[str, BucketSummary]:
    """Mean metric and mean rank per algorithm over the datasets of one S bucket.

    Values are first averaged per (dataset, algorithm) over seeds and
    budgets falling into the bucket. A dataset where some algorithm has a
    failed, undefined or missing cell is left out of the bucket.
    ``bucket=None`` takes every row.
    """
    algorithms = report.algorithms()
    cells: Dict[str, Dict[str, List[Optional[float]]]] = OrderedDict()
    for row in report.rows:
        if row.metric != metric:
            continue
        if bucket is not None and s_bucket(row.s_value) != bucket:
            continue
        cells.setdefault(row.dataset, defaultdict(list))[row.algorithm].append(row.numeric)

    values: Dict[str, List[float]] = defaultdict(list)
    ranks: Dict[str, List[float]] = defaultdict(list)
    for dataset, per_algorithm in cells.items():
        missing = [a for a in algorithms if not per_algorithm.get(a) or any(v is None for v in per_algorithm[a])]
        if missing:
            logger.warning("Dropping %s from the %s ranking%s: no usable value for %s", dataset, metric,
                           '' if bucket is None else f" at S~{bucket:g}", ', '.join(missing))
            continue
        means = np.array([np.mean(per_algorithm[a]) for a in algorithms])
        for algorithm, value, rank in zip(algorithms, means, rankdata(-means, method='average')):
            values[algorithm].append(float(value))
            ranks[algorithm].append(float(rank))
    return {
        algorithm: BucketSummary(float(np.mean(values[algorithm])), float(np.mean(ranks[algorithm])),
                                 len(ranks[algorithm]))
        for algorithm in algorithms if ranks[algorithm]
    }


def average_rank(report: EvalReport, metric: str, bucket: Optional[float] = None) -> Dict[str, float]:
    """Rank 1 is best; tied values share the mean of their ranks."""
    return {algorithm: summary.mean_rank for algorithm, summary in summarize_bucket(report, metric, bucket).items()}


def write_aggregates(report: EvalReport, path: Union[str, Path]) -> None:
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(AGGREGATE_COLUMNS)
        for metric in report.metrics():
            for bucket in report.buckets(metric):
                for algorithm, summary in summarize_bucket(report, metric, bucket).items():
                    writer.writerow([metric, format_number(bucket), algorithm, format_number(summary.mean_value),
                                     format_number(summary.mean_rank), summary.datasets])


def _mean_and_stderr(values: List[float]) -> Tuple[str, str]:
    if not values:
        return '', ''
    mean = format_number(float(np.mean(values)))
    if len(values) < 2:
        return mean, ''
    return mean, format_number(float(np.std(values, ddof=1) / math.sqrt(len(values))))


def _x_value(row: ResultRow, axis: str) -> Optional[float]:
    if axis == 'budget':
        return float(row.budget)
    return s_bucket(row.s_value)


def emit_plot_data(report: EvalReport, axis: str, out_dir: Union[str, Path], svg: bool = False) -> List[Path]:
    """One CSV per (model, metric): ``x`` then mean and stderr columns per algorithm.

    Means are over seeds (and datasets); failed or undefined cells are
    skipped and a point with no usable value stays empty.
    """
    if axis not in ('budget', 'S'):
        raise ValidationError("axis must be 'budget' or 'S'")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    algorithms = report.algorithms()
    written = []
    for model in report.models():
        for metric in report.metrics():
            points: Dict[float, Dict[str, List[float]]] = defaultdict(lambda: defaultdict(list))
            for row in report.rows:
                if row.model != model or row.metric != metric:
                    continue
                x = _x_value(row, axis)
                if x is None:
                    continue
                values = points[x]
                if row.numeric is not None:
                    values[row.algorithm].append(row.numeric)
            if not points:
                continue
            xs = sorted(points)
            path = out_dir / f"{model}_{metric}_{axis}.csv"
            series: Dict[str, List[Optional[float]]] = {algorithm: [] for algorithm in algorithms}
            with open(path, 'w', encoding='utf-8', newline='') as handle:
                writer = csv.writer(handle, lineterminator='\n')
                writer.writerow(['x'] + [f"{a}_{suffix}" for a in algorithms for suffix in ('mean', 'stderr')])
                for x in xs:
                    line = [format_number(x)]
                    for algorithm in algorithms:
                        mean, stderr = _mean_and_stderr(points[x][algorithm])
                        line += [mean, stderr]
                        series[algorithm].append(float(mean) if mean else None)
                    writer.writerow(line)
            written.append(path)
            if svg:
                chart = LineChart(title=f"{model} {metric}", x_label=axis, y_label=metric)
                svg_path = path.with_suffix('.svg')
                svg_path.write_text(chart.render(xs, series), encoding='utf-8')
                written.append(svg_path)
    return written


class LineChart:
    """Minimal SVG line chart; x is drawn on a log scale when every x is positive"""

    WIDTH = 640
    HEIGHT = 400
    MARGIN = 60
    COLORS = ('#1f77b4', '#ff7f0e', '#2ca02c', '#d62728', '#9467bd', '#8c564b', '#e377c2')

    def __init__(self, title: str, x_label: str, y_label: str):
        self.title = title
        self.x_label = x_label
        self.y_label = y_label

    def _scale(self, values: np.ndarray, low: float, high: float, start: float, end: float) -> np.ndarray:
        if high == low:
            return np.full(len(values), (start + end) / 2)
        return start + (values - low) / (high - low) * (end - start)

    def render(self, xs: Sequence[float], series: Dict[str, Sequence[Optional[float]]]) -> str:
        xs = np.asarray(xs, dtype=float)
        log_x = len(xs) > 0 and bool(np.all(xs > 0))
        x_plot = np.log10(xs) if log_x else xs
        defined = [v for values in series.values() for v in values if v is not None]
        y_low, y_high = (min(defined), max(defined)) if defined else (0.0, 1.0)
        left, right = self.MARGIN, self.WIDTH - self.MARGIN / 2
        top, bottom = self.MARGIN / 2, self.HEIGHT - self.MARGIN
        x_pos = self._scale(x_plot, float(x_plot.min()) if len(xs) else 0.0,
                            float(x_plot.max()) if len(xs) else 1.0, left, right)
        lines = []
        for number, (name, values) in enumerate(series.items()):
            points = [(float(x_pos[i]), float(self._scale(np.array([v]), y_low, y_high, bottom, top)[0]))
                      for i, v in enumerate(values) if v is not None]
            lines.append({
                'name': name,
                'color': self.COLORS[number % len(self.COLORS)],
                'points': ' '.join(f"{x:.1f},{y:.1f}" for x, y in points),
                'markers': [{'x': f"{x:.1f}", 'y': f"{y:.1f}"} for x, y in points],
                'legend_y': top + 16 * (number + 1),
            })
        context = {
            'width': self.WIDTH,
            'height': self.HEIGHT,
            'left': left,
            'right': right,
            'top': top,
            'bottom': bottom,
            'title': self.title,
            'x_label': self.x_label + (' (log)' if log_x else ''),
            'y_label': self.y_label,
            'x_ticks': [{'x': f"{p:.1f}", 'label': f"{x:g}"} for p, x in zip(x_pos, xs)],
            'y_ticks': [{'y': f"{bottom:.1f}", 'label': f"{y_low:.3g}"}, {'y': f"{top:.1f}", 'label': f"{y_high:.3g}"}],
            'lines': lines,
            'legend_x': right - 120,
        }
        return render_to_string('communities/line_chart.svg', context)


LIST_KEYS = {'algorithms', 'budgets', 'metrics', 'seeds', 'sizes'}


def _parse_flat_config(text: str) -> Dict:
    """``key=value`` lines; dotted keys nest and ``dataset.<name>.<field>`` builds dataset entries."""
    data: Dict = {}
    datasets: 'OrderedDict[str, Dict]' = OrderedDict()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        key, sep, value = line.partition('=')
        if not sep:
            raise ParseError("expected 'key=value'", line_no)
        parts = [part.strip() for part in key.strip().split('.')]
        value = value.strip()
        if parts[0] == 'dataset':
            if len(parts) < 3:
                raise ParseError("dataset keys look like 'dataset.<name>.<field>'", line_no)
            target = datasets.setdefault(parts[1], {'name': parts[1]})
            parts = parts[2:]
        else:
            target = data
        for part in parts[:-1]:
            target = target.setdefault(part, {})
            if not isinstance(target, dict):
                raise ParseError(f"{key.strip()!r} nests under a plain value", line_no)
        leaf = parts[-1]
        target[leaf] = [v.strip() for v in value.split(',') if v.strip()] if leaf in LIST_KEYS else value
    if datasets:
        data['datasets'] = list(datasets.values())
    return data


def load_experiment_config(path: Union[str, Path]) -> Dict:
    """Read a bench config: a YAML mapping, or flat ``key=value`` lines."""
    text = Path(path).read_text(encoding='utf-8')
    try:
        loaded = yaml.safe_load(text)
    except yaml.YAMLError:
        loaded = None
    if isinstance(loaded, dict) and not any('=' in str(key) for key in loaded):
        return loaded
    return _parse_flat_config(text)
