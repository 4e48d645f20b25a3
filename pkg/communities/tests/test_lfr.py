import numpy as np
from django.test import SimpleTestCase

from communities.exceptions import GenerationError, UndefinedMixingError, ValidationError
from communities.graphs import Graph, Partition
from communities.lfr import (
    LfrConfig, assign_communities, community_sizes, degree_sequence, generate_lfr, intra_degrees,
    planted_partition, realized_mixing,
)


class LfrConfigTests(SimpleTestCase):
    def test_rejects_bad_values(self):
        for overrides in ({'mu': 1.0}, {'tau1': 1.0}, {'min_community': 50, 'max_community': 20},
                          {'avg_degree': 0}, {'max_degree': 500}, {'n': 1}):
            config = LfrConfig(**{'n': 200, 'min_community': 20, 'max_community': 60, 'max_degree': 30,
                                  **overrides})
            with self.assertRaises(ValidationError, msg=overrides):
                config.validate()


class SequenceTests(SimpleTestCase):
    def test_degree_sequence(self):
        config = LfrConfig(n=2000, avg_degree=8, max_degree=40, min_community=20, max_community=100)
        degrees = degree_sequence(config, np.random.default_rng(0))
        self.assertEqual(degrees.sum() % 2, 0)
        self.assertGreaterEqual(degrees.min(), 1)
        self.assertLessEqual(degrees.max(), 40)
        self.assertAlmostEqual(degrees.mean(), 8, delta=1.0)

    def test_degree_sequence_needs_a_reachable_mean(self):
        config = LfrConfig(n=100, avg_degree=1.0, max_degree=50, min_community=10, max_community=50)
        with self.assertRaises(GenerationError):
            degree_sequence(config, np.random.default_rng(0))

    def test_community_sizes(self):
        config = LfrConfig(n=1000, min_community=50, max_community=200)
        sizes = community_sizes(config, np.random.default_rng(1))
        self.assertEqual(sizes.sum(), 1000)
        self.assertTrue(np.all((sizes >= 50) & (sizes <= 200)))

    def test_intra_degrees_round_stochastically(self):
        degrees = np.full(20000, 5)
        intra = intra_degrees(degrees, 0.1, np.random.default_rng(2))
        self.assertTrue(set(intra.tolist()) <= {4, 5})
        self.assertAlmostEqual(intra.mean(), 4.5, delta=0.03)

    def test_assignment_respects_capacity(self):
        rng = np.random.default_rng(3)
        intra = rng.integers(1, 10, 100)
        sizes = np.array([30, 30, 40])
        membership = assign_communities(intra, sizes, rng)
        self.assertEqual(np.bincount(membership, minlength=3).tolist(), [30, 30, 40])
        self.assertTrue(np.all(intra < sizes[membership]))


class GenerateLfrTests(SimpleTestCase):
    def test_community_sizes_and_mixing(self):
        config = LfrConfig(n=1000, mu=0.1, avg_degree=6, max_degree=50, min_community=100,
                           max_community=300, seed=4)
        bundle = generate_lfr(config)
        self.assertEqual(bundle.graph.node_count, 1000)
        sizes = bundle.ground_truth.sizes()
        self.assertEqual(sizes.sum(), 1000)
        self.assertTrue(np.all((sizes >= 100) & (sizes <= 300)))
        self.assertAlmostEqual(realized_mixing(bundle.graph, bundle.ground_truth), 0.1, delta=0.03)

    def test_zero_mixing_keeps_edges_inside(self):
        config = LfrConfig(n=200, mu=0.0, avg_degree=5, max_degree=20, min_community=20,
                           max_community=60, seed=5)
        bundle = generate_lfr(config)
        self.assertEqual(realized_mixing(bundle.graph, bundle.ground_truth), 0.0)

    def test_two_forced_communities(self):
        mixing = []
        for seed in range(5):
            config = LfrConfig(n=200, mu=0.1, avg_degree=8, max_degree=30, min_community=100,
                               max_community=100, seed=seed)
            bundle = generate_lfr(config)
            self.assertEqual(bundle.ground_truth.sizes().tolist(), [100, 100])
            mixing.append(realized_mixing(bundle.graph, bundle.ground_truth))
        self.assertAlmostEqual(float(np.mean(mixing)), 0.1, delta=0.03)

    def test_same_seed_same_graph(self):
        config = LfrConfig(n=200, avg_degree=5, max_degree=20, min_community=20, max_community=60, seed=6)
        first, second = generate_lfr(config), generate_lfr(config)
        self.assertEqual(list(first.graph.edges()), list(second.graph.edges()))
        self.assertTrue(first.ground_truth.same_as(second.ground_truth))


class MixingTests(SimpleTestCase):
    def test_values(self):
        triangles = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
        self.assertAlmostEqual(realized_mixing(triangles, Partition([0, 0, 0, 1, 1, 1])), 1 / 7)
        self.assertEqual(realized_mixing(triangles, Partition([0] * 6)), 0.0)
        bipartite = Graph.from_edges(4, [(0, 2), (0, 3), (1, 2), (1, 3)])
        self.assertEqual(realized_mixing(bipartite, Partition([0, 0, 1, 1])), 1.0)

    def test_undefined_without_edges(self):
        with self.assertRaises(UndefinedMixingError):
            realized_mixing(Graph.from_edges(3, []), Partition([0, 0, 1]))


class PlantedPartitionTests(SimpleTestCase):
    def test_disconnected_blocks(self):
        bundle = planted_partition([10, 10], 1.0, 0.0, seed=0)
        self.assertEqual(bundle.graph.edge_count, 90)
        self.assertEqual(realized_mixing(bundle.graph, bundle.ground_truth), 0.0)
        self.assertEqual(bundle.ground_truth.sizes().tolist(), [10, 10])

    def test_rejects_bad_probabilities(self):
        with self.assertRaises(ValidationError):
            planted_partition([5, 5], 1.5, 0.0)
        with self.assertRaises(ValidationError):
            planted_partition([], 0.5, 0.1)
