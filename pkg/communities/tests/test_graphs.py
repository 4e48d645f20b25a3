import networkx as nx
import numpy as np
from django.test import SimpleTestCase

from communities.exceptions import IncompleteGroundTruthError, ParseError, ValidationError
from communities.graphs import (
    DatasetBundle, Graph, NodeIndex, Partition, load_communities, load_dataset, load_edge_list,
    load_partition_labels, write_communities, write_edge_list,
)

from .utils import TempDirMixin


class NodeIndexTests(SimpleTestCase):
    def test_add_is_idempotent(self):
        index = NodeIndex()
        self.assertEqual(index.add('alice'), 0)
        self.assertEqual(index.add('bob'), 1)
        self.assertEqual(index.add('alice'), 0)
        self.assertEqual(len(index), 2)
        self.assertEqual(index.label_of(1), 'bob')
        self.assertIn('bob', index)
        self.assertIsNone(index.get('carol'))

    def test_labels_are_strings(self):
        index = NodeIndex([3, 1])
        self.assertEqual(index.labels, ('3', '1'))
        self.assertEqual(index.id_of(1), 1)


class GraphTests(SimpleTestCase):
    def test_duplicate_edges_are_merged_with_a_warning(self):
        with self.assertLogs('communities.graphs', level='WARNING'):
            graph = Graph.from_edges(3, [(0, 1), (1, 0, 2.0), (1, 2)])
        self.assertEqual(graph.edge_count, 2)
        self.assertEqual(list(graph.edges()), [(0, 1, 3.0), (1, 2, 1.0)])
        self.assertEqual(graph.total_weight, 4.0)

    def test_neighbors_and_degrees(self):
        graph = Graph.from_edges(4, [(0, 1), (0, 2, 0.5), (2, 3)])
        nbrs, weights = graph.neighbors(0)
        self.assertEqual(nbrs.tolist(), [1, 2])
        self.assertEqual(weights.tolist(), [1.0, 0.5])
        self.assertEqual(graph.degrees().tolist(), [2, 1, 2, 1])
        self.assertEqual(graph.weighted_degrees().tolist(), [1.5, 1.0, 1.5, 1.0])
        self.assertTrue(graph.has_edge(3, 2))
        self.assertFalse(graph.has_edge(1, 3))

    def test_rejects_self_loops_and_bad_weights(self):
        with self.assertRaises(ValidationError):
            Graph.from_edges(2, [(1, 1)])
        with self.assertRaises(ValidationError):
            Graph.from_edges(2, [(0, 1, -1.0)])
        with self.assertRaises(ValidationError):
            Graph.from_edges(2, [(0, 2)])

    def test_edges_are_read_only(self):
        graph = Graph.from_edges(2, [(0, 1)])
        with self.assertRaises(ValueError):
            graph.weights[0] = 5.0

    def test_networkx_round_trip_keeps_karate_size(self):
        graph = Graph.from_networkx(nx.karate_club_graph(), weight=None)
        self.assertEqual(graph.node_count, 34)
        self.assertEqual(graph.edge_count, 78)
        back = graph.to_networkx()
        self.assertEqual(back.number_of_edges(), 78)


class PartitionTests(SimpleTestCase):
    def test_labels_are_renumbered_by_first_appearance(self):
        partition = Partition(['x', 'y', 'x', 'z'])
        self.assertEqual(partition.labels.tolist(), [0, 1, 0, 2])
        self.assertEqual(partition.k, 3)
        self.assertEqual(partition.sizes().tolist(), [2, 1, 1])

    def test_nodes_are_sorted(self):
        partition = Partition(['b', 'a', 'b'], nodes=[7, 2, 4])
        self.assertEqual(partition.nodes.tolist(), [2, 4, 7])
        self.assertEqual(partition.as_dict(), {2: 0, 4: 1, 7: 1})

    def test_same_as_ignores_label_names(self):
        self.assertTrue(Partition([5, 5, 9]).same_as(Partition(['a', 'a', 'b'])))
        self.assertFalse(Partition([5, 5, 9]).same_as(Partition([1, 2, 2])))

    def test_labels_for_unknown_node(self):
        partition = Partition([0, 1], nodes=[1, 3])
        with self.assertRaises(ValidationError):
            partition.labels_for([2])

    def test_restrict(self):
        partition = Partition([0, 0, 1, 1, 2])
        part = partition.restrict([4, 2, 3])
        self.assertEqual(part.nodes.tolist(), [2, 3, 4])
        self.assertEqual(part.labels.tolist(), [0, 0, 1])

    def test_duplicate_nodes_rejected(self):
        with self.assertRaises(ValidationError):
            Partition([0, 1], nodes=[3, 3])

    def test_communities(self):
        groups = Partition.from_dict({0: 'a', 1: 'b', 2: 'a'}).communities()
        self.assertEqual([g.tolist() for g in groups], [[0, 2], [1]])

    def test_dataset_bundle_checks_coverage(self):
        graph = Graph.from_edges(3, [(0, 1)])
        with self.assertRaises(ValidationError):
            DatasetBundle(graph=graph, ground_truth=Partition([0, 1]), name='short')


class DatasetFileTests(TempDirMixin, SimpleTestCase):
    def test_load_edge_list(self):
        path = self.write('g.tsv', "# comment\na\tb\nb\tc\t2.5\n\nc\tc\n")
        with self.assertLogs('communities.graphs', level='WARNING'):
            graph = load_edge_list(path)
        self.assertEqual(graph.node_count, 3)
        self.assertEqual(graph.edge_count, 2)
        self.assertEqual(graph.index.labels, ('a', 'b', 'c'))
        self.assertEqual(graph.total_weight, 3.5)

    def test_parse_error_carries_the_line(self):
        path = self.write('g.tsv', "a\tb\nlonely\n")
        with self.assertRaises(ParseError) as ctx:
            load_edge_list(path)
        self.assertEqual(ctx.exception.line, 2)

    def test_bad_weight(self):
        path = self.write('g.tsv', "a\tb\theavy\n")
        with self.assertRaises(ParseError):
            load_edge_list(path)

    def test_missing_community_is_an_error(self):
        graph = load_edge_list(self.write('g.tsv', "a\tb\nb\tc\n"))
        path = self.write('c.tsv', "a\t1\nb\t1\n")
        with self.assertRaises(IncompleteGroundTruthError):
            load_communities(path, graph)

    def test_load_dataset(self):
        edges = self.write('g.tsv', "a\tb\nc\td\n")
        labels = self.write('c.tsv', "d\tright\na\tleft\nb\tleft\nc\tright\n")
        bundle = load_dataset('toy', edges, labels)
        self.assertEqual(bundle.name, 'toy')
        self.assertEqual(bundle.ground_truth.labels.tolist(), [0, 0, 1, 1])

    def test_written_files_load_back(self):
        graph = Graph.from_edges(3, [(0, 1, 2.0), (1, 2)], index=NodeIndex(['x', 'y', 'z']))
        partition = Partition([0, 0, 1])
        write_edge_list(graph, self.tmp / 'g.tsv')
        write_communities(partition, self.tmp / 'c.tsv', graph.index)
        loaded = load_edge_list(self.tmp / 'g.tsv')
        self.assertEqual(list(loaded.edges()), list(graph.edges()))
        self.assertTrue(load_communities(self.tmp / 'c.tsv', loaded).same_as(partition))

    def test_partition_labels_without_a_graph(self):
        index = NodeIndex(['u1'])
        path = self.write('c.tsv', "u2\tA\nu1\tB\n")
        index, partition = load_partition_labels(path, index)
        self.assertEqual(index.labels, ('u1', 'u2'))
        self.assertEqual(partition.nodes.tolist(), [0, 1])
        self.assertNotEqual(partition.label_of(0), partition.label_of(1))
        with self.assertRaises(ValidationError):
            load_partition_labels(self.write('p.tsv', "u3\tA\n"), index, extend=False)
        self.assertEqual(np.unique(partition.labels).tolist(), [0, 1])
