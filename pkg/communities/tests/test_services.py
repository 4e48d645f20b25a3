import csv

import networkx as nx
from django.test import SimpleTestCase, override_settings

from communities.cascades import Cascade, CascadeSet
from communities.exceptions import ParseError, UndefinedRelativeSizeError, ValidationError
from communities.graphs import Graph
from communities.serializers import ExperimentSpecSerializer
from communities.services import (
    FAILED, OBSERVED, EvalReport, ExperimentRunner, ResultRow, ResultsWriter, average_rank, emit_plot_data,
    load_experiment_config, relative_size, run_experiment, s_bucket, summarize_bucket, write_aggregates,
)

from .utils import TempDirMixin


def chain_set(*sizes, node_count=3):
    cascades, trees = [], []
    for size in sizes:
        cascades.append(Cascade(range(size), range(size)))
        trees.append([[i, i + 1] for i in range(size - 1)])
    return CascadeSet(cascades, node_count, transmissions=trees)


def row(dataset, algorithm, value, budget='10', seed='0', metric='pearson-sub', S='1', model='si-bd'):
    return ResultRow(dataset, model, algorithm, budget, S, seed, metric, value)


def read_csv(path):
    with open(path, encoding='utf-8', newline='') as handle:
        return list(csv.reader(handle))


class RelativeSizeTests(SimpleTestCase):
    def setUp(self):
        self.path_graph = Graph.from_edges(3, [(0, 1), (1, 2)])

    def test_karate(self):
        graph = Graph.from_networkx(nx.karate_club_graph(), weight=None)
        cascades = [Cascade([0, 1], [0, 1]) for _ in range(78)]
        cascade_set = CascadeSet(cascades, 34, transmissions=[[[0, 1]]] * 78)
        self.assertEqual(relative_size(cascade_set, graph), 1.0)

    def test_counts(self):
        self.assertEqual(relative_size(CascadeSet([], 3), self.path_graph), 0.0)
        self.assertEqual(relative_size(chain_set(3, 3), self.path_graph), 2.0)
        self.assertEqual(relative_size(chain_set(3, 2), self.path_graph), 1.5)

    def test_without_transmission_record(self):
        cascade_set = CascadeSet([Cascade([0, 1, 2], [0, 1, 2])], 3)
        self.assertEqual(relative_size(cascade_set, self.path_graph), 1.0)

    def test_undefined_without_edges(self):
        with self.assertRaises(UndefinedRelativeSizeError):
            relative_size(chain_set(2), Graph.from_edges(3, []))


class SBucketTests(SimpleTestCase):
    def test_nearest_on_log_scale(self):
        self.assertEqual(s_bucket(0.9), 1.0)
        self.assertEqual(s_bucket(0.3), 0.25)
        self.assertEqual(s_bucket(100.0), 32.0)
        self.assertEqual(s_bucket(3.0, [1.0, 10.0]), 1.0)

    def test_missing(self):
        self.assertIsNone(s_bucket(None))
        self.assertIsNone(s_bucket(0.0))


class RankTests(SimpleTestCase):
    def test_single_dataset(self):
        report = EvalReport([row('d1', 'a', '0.9'), row('d1', 'b', '0.5'), row('d1', 'c', '0.1')])
        self.assertEqual(average_rank(report, 'pearson-sub'), {'a': 1.0, 'b': 2.0, 'c': 3.0})

    def test_reversed_orders(self):
        report = EvalReport([row('d1', 'a', '0.8'), row('d1', 'b', '0.2'),
                             row('d2', 'a', '0.2'), row('d2', 'b', '0.8')])
        self.assertEqual(average_rank(report, 'pearson-sub'), {'a': 1.5, 'b': 1.5})

    def test_ties_share_ranks(self):
        report = EvalReport([row('d1', 'a', '0.7'), row('d1', 'b', '0.7'), row('d1', 'c', '0.2')])
        self.assertEqual(average_rank(report, 'pearson-sub'), {'a': 1.5, 'b': 1.5, 'c': 3.0})

    def test_seeds_are_averaged_first(self):
        report = EvalReport([row('d1', 'a', '0.9', seed='0'), row('d1', 'a', '0.1', seed='1'),
                             row('d1', 'b', '0.6')])
        summary = summarize_bucket(report, 'pearson-sub')
        self.assertAlmostEqual(summary['a'].mean_value, 0.5)
        self.assertEqual(summary['b'].mean_rank, 1.0)
        self.assertEqual(summary['b'].datasets, 1)

    def test_failed_cells_drop_the_dataset(self):
        report = EvalReport([row('d1', 'a', '0.9'), row('d1', 'b', FAILED),
                             row('d2', 'a', '0.1'), row('d2', 'b', '0.4')])
        with self.assertLogs('communities.services', level='WARNING'):
            ranks = average_rank(report, 'pearson-sub')
        self.assertEqual(ranks, {'a': 2.0, 'b': 1.0})

    def test_buckets(self):
        report = EvalReport([row('d1', 'a', '0.9', S='0.5'), row('d1', 'b', '0.1', S='0.5'),
                             row('d1', 'a', '0.1', S='4 approx'), row('d1', 'b', '0.9', S='4 approx')])
        self.assertEqual(report.buckets('pearson-sub'), [0.5, 4.0])
        self.assertEqual(average_rank(report, 'pearson-sub', 0.5), {'a': 1.0, 'b': 2.0})
        self.assertEqual(average_rank(report, 'pearson-sub', 4.0), {'a': 2.0, 'b': 1.0})


class ReportFileTests(TempDirMixin, SimpleTestCase):
    def _report(self, seeds=('0',), undefined=False):
        rows = []
        for seed in seeds:
            for budget in ('10', '100', '1000'):
                rows.append(row('d1', 'path', '' if undefined else '0.5', budget=budget, seed=seed))
                rows.append(row('d1', 'clique', str(0.25 + 0.5 * int(seed)), budget=budget, seed=seed))
        return EvalReport(rows)

    def test_plot_data_shape(self):
        paths = emit_plot_data(self._report(), 'budget', self.tmp)
        self.assertEqual([p.name for p in paths], ['si-bd_pearson-sub_budget.csv'])
        lines = read_csv(paths[0])
        self.assertEqual(lines[0], ['x', 'path_mean', 'path_stderr', 'clique_mean', 'clique_stderr'])
        self.assertEqual(len(lines), 4)
        self.assertEqual([line[0] for line in lines[1:]], ['10', '100', '1000'])
        self.assertEqual(lines[1], ['10', '0.5', '', '0.25', ''])

    def test_stderr_over_seeds(self):
        lines = read_csv(emit_plot_data(self._report(seeds=('0', '1')), 'budget', self.tmp)[0])
        self.assertEqual(lines[1][3:], ['0.5', '0.25'])

    def test_undefined_cells_stay_empty(self):
        lines = read_csv(emit_plot_data(self._report(undefined=True), 'budget', self.tmp)[0])
        self.assertEqual(lines[1][1:3], ['', ''])

    def test_s_axis_and_svg(self):
        paths = emit_plot_data(self._report(), 'S', self.tmp, svg=True)
        self.assertEqual(sorted(p.suffix for p in paths), ['.csv', '.svg'])
        svg = [p for p in paths if p.suffix == '.svg'][0].read_text(encoding='utf-8')
        self.assertIn('<svg', svg)
        self.assertIn('clique', svg)

    def test_bad_axis(self):
        with self.assertRaises(ValidationError):
            emit_plot_data(self._report(), 'time', self.tmp)

    def test_aggregates(self):
        path = self.tmp / 'aggregates.csv'
        write_aggregates(self._report(), path)
        lines = read_csv(path)
        self.assertEqual(lines[0], ['metric', 'bucket', 'algorithm', 'mean_value', 'mean_rank', 'datasets'])
        self.assertEqual(lines[1:], [['pearson-sub', '1', 'path', '0.5', '1', '1'],
                                     ['pearson-sub', '1', 'clique', '0.25', '2', '1']])

    def test_results_writer(self):
        writer = ResultsWriter(self.tmp / 'results.csv')
        self.assertEqual(writer.read(), [])
        writer.append([row('d1', 'path', '0.5')])
        writer.append([row('d1', 'cosine', '0.4')])
        self.assertEqual(read_csv(writer.path)[0][0], 'dataset')
        self.assertEqual(len(writer.read()), 2)
        self.assertEqual(writer.completed(), {('d1', 'si-bd', 'path', '10', '0'), ('d1', 'si-bd', 'cosine', '10', '0')})

    def test_foreign_file_is_rejected(self):
        path = self.write('results.csv', "a,b,c\n1,2,3\n")
        with self.assertRaises(ParseError):
            ResultsWriter(path).read()


class ConfigTests(TempDirMixin, SimpleTestCase):
    def test_flat_config(self):
        path = self.write('bench.conf', "\n".join([
            "# two blocks",
            "algorithms = path, clique0",
            "budgets = 10,20",
            "model = si-bd",
            "params.alpha = 1.0",
            "output = out",
            "dataset.blocks.planted.sizes = 5,5",
            "dataset.blocks.planted.p_in = 1",
            "dataset.blocks.planted.p_out = 0",
        ]))
        data = load_experiment_config(path)
        self.assertEqual(data['algorithms'], ['path', 'clique0'])
        self.assertEqual(data['params'], {'alpha': '1.0'})
        self.assertEqual(data['datasets'], [{'name': 'blocks', 'planted': {'sizes': ['5', '5'], 'p_in': '1',
                                                                          'p_out': '0'}}])
        serializer = ExperimentSpecSerializer(data=data)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        spec = serializer.save()
        self.assertEqual(spec.budgets, [10.0, 20.0])
        self.assertEqual(spec.datasets[0]['planted']['sizes'], [5, 5])

    def test_flat_config_errors(self):
        with self.assertRaises(ParseError) as ctx:
            load_experiment_config(self.write('bad.conf', "model = si-bd\njust words\n"))
        self.assertEqual(ctx.exception.line, 2)
        with self.assertRaises(ParseError):
            load_experiment_config(self.write('bad.conf', "dataset.x = 1\n"))

    def test_yaml_config(self):
        path = self.write('bench.yaml', "algorithms: [path]\nbudgets: [5]\noutput: out\n"
                                        "datasets:\n  - name: karate\n    networkx: karate\n")
        data = load_experiment_config(path)
        self.assertEqual(data['datasets'], [{'name': 'karate', 'networkx': 'karate'}])

    def test_serializer_rejections(self):
        base = {'datasets': [{'name': 'k', 'networkx': 'karate'}], 'algorithms': ['path'],
                'budgets': [10], 'output': 'out'}
        self.assertFalse(ExperimentSpecSerializer(data=base).is_valid())
        both = dict(base, model='si-bd', params={'alpha': 1.0}, preset=True)
        self.assertFalse(ExperimentSpecSerializer(data=both).is_valid())
        fractional = dict(base, model='si-bd', preset=True, budgets=[2.5])
        self.assertFalse(ExperimentSpecSerializer(data=fractional).is_valid())
        ok = dict(base, model='si-bd', preset=True)
        self.assertTrue(ExperimentSpecSerializer(data=ok).is_valid())
        preset_and_goal = dict(base, model='sir', preset=True, calibrate='mean-size-2')
        self.assertFalse(ExperimentSpecSerializer(data=preset_and_goal).is_valid())
        seeded_goal = dict(base, model='sir', params={'lomax_shape': 12}, calibrate='mean-size-2')
        self.assertTrue(ExperimentSpecSerializer(data=seeded_goal).is_valid())


class ExperimentRunnerTests(TempDirMixin, SimpleTestCase):
    def _spec(self, output, **overrides):
        data = {
            'datasets': [{'name': 'blocks', 'planted': {'sizes': [6, 6], 'p_in': 1.0, 'p_out': 0.0}}],
            'model': 'si-bd',
            'params': {'alpha': 1.0, 't_max': 1.0},
            'algorithms': ['path', 'clique0', 'cosine', 'oracle'],
            'budgets': [200],
            'metrics': ['pearson-sub', 'nmi-sub'],
            'seeds': [0],
            'output': str(output),
            **overrides,
        }
        serializer = ExperimentSpecSerializer(data=data)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        return serializer.save()

    def test_planted_blocks_are_recovered(self):
        report = run_experiment(self._spec(self.tmp / 'run'))
        self.assertEqual(len(report), 8)
        for result in report.rows:
            self.assertEqual(result.value, '1', result)
            self.assertGreater(result.s_value, 0)
        self.assertTrue((self.tmp / 'run' / 'aggregates.csv').exists())
        self.assertTrue((self.tmp / 'run' / 'plots' / 'si-bd_pearson-sub_budget.csv').exists())

    def test_runs_are_reproducible(self):
        spec = dict(algorithms=['path', 'clique'], budgets=[5, 20], seeds=[0, 1])
        run_experiment(self._spec(self.tmp / 'a', **spec))
        run_experiment(self._spec(self.tmp / 'b', **spec))
        first = (self.tmp / 'a' / 'results.csv').read_bytes()
        self.assertEqual(first, (self.tmp / 'b' / 'results.csv').read_bytes())

    def test_resume_skips_finished_cells(self):
        spec = self._spec(self.tmp / 'run', algorithms=['path'], budgets=[5])
        run_experiment(spec)
        messages = []
        report = ExperimentRunner(self._spec(self.tmp / 'run', algorithms=['path', 'cosine'], budgets=[5]),
                                  progress=messages.append).run()
        self.assertEqual(sorted({r.algorithm for r in report.rows}), ['cosine', 'path'])
        self.assertEqual(len(report), 4)
        self.assertTrue(any(m.startswith('Resuming') for m in messages))

    def test_budget_beyond_the_pool_fails_the_cell(self):
        path = self.write('c.tsv', "a\t1\nb\t1\nc\t2\n")
        cascades = self.write('cascades.txt', "a:0;b:1\nb:0;c:1\n")
        spec = self._spec(self.tmp / 'run', datasets=[{'name': 'obs', 'cascades': str(cascades),
                                                        'communities': str(path)}],
                          algorithms=['path'], budgets=[1, 5], metrics=['jaccard-sub'])
        with self.assertLogs('communities.services', level='WARNING'):
            report = run_experiment(spec)
        values = {r.budget: r.value for r in report.rows}
        self.assertNotEqual(values['1'], FAILED)
        self.assertEqual(values['5'], FAILED)
        self.assertEqual({r.model for r in report.rows}, {OBSERVED})

    def test_oracle_on_retweets_is_marked_failed(self):
        labels = self.write('labels.tsv', "s\tA\nu1\tA\nu2\tB\n")
        log = self.write('log.tsv', "s\tu1\t10\t#x\t0\ns\tu2\t12\t#x\t0\n")
        spec = self._spec(self.tmp / 'run', datasets=[{'name': 'tw', 'retweets': str(log),
                                                        'communities': str(labels)}],
                          algorithms=['oracle', 'path'], budgets=[1], metrics=['jaccard-sub'])
        with self.assertLogs('communities.services', level='WARNING'):
            report = run_experiment(spec)
        values = {r.algorithm: r.value for r in report.rows}
        self.assertEqual(values['oracle'], FAILED)
        self.assertNotEqual(values['path'], FAILED)
        self.assertTrue(all(r.S == '' for r in report.rows))


@override_settings(CASCADE_COMMUNITIES={'CALIBRATION_BATCH_SIZE': 300})
class BenchCalibrationTests(TempDirMixin, SimpleTestCase):
    def _runner(self, dataset, **overrides):
        data = {'datasets': [dataset], 'model': 'sir', 'calibrate': 'mean-size-2', 'algorithms': ['path'],
                'budgets': [10], 'output': str(self.tmp / 'run'), **overrides}
        serializer = ExperimentSpecSerializer(data=data)
        self.assertTrue(serializer.is_valid(), serializer.errors)
        runner = ExperimentRunner(serializer.save())
        return runner, runner.loader.load(runner.spec.datasets[0])

    def test_preset_shape_survives_calibration(self):
        runner, source = self._runner({'name': 'karate', 'networkx': 'karate'})
        params = runner._params(source)
        self.assertEqual((params.beta, params.lomax_shape), (1.0, 12))
        self.assertGreater(params.alpha, 0)

    def test_given_rates_survive_calibration(self):
        blocks = {'name': 'blocks', 'planted': {'sizes': [10, 10], 'p_in': 0.6, 'p_out': 0.05}}
        runner, source = self._runner(blocks, params={'beta': 2.0, 'lomax_shape': 5.0})
        params = runner._params(source)
        self.assertEqual((params.beta, params.lomax_shape), (2.0, 5.0))
        self.assertGreater(params.alpha, 0)
