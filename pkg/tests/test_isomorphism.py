import io
from itertools import permutations

import numpy as np
import pytest

from app.services.evaluation import random_connected_graph
from app.services.graph_core import GraphDatabase, SubgraphRecord
from app.services.isomorphism import (
    embeds,
    occurrence_matrix,
    read_occurrence_tsv,
    support,
    write_occurrence_tsv,
)
from app.utils.errors import GraphError
from tests.helpers import clique, graph, path, records_of, single


def exhaustive_embeds(pattern, target):
    """Try every injective node map"""
    target_edges = {(e.u, e.v): e.label for e in target.edges}
    for image in permutations(range(target.n_nodes), pattern.n_nodes):
        if any(pattern.labels[i] != target.labels[image[i]] for i in range(pattern.n_nodes)):
            continue
        ok = True
        for u, v, label in pattern.edges:
            key = (min(image[u], image[v]), max(image[u], image[v]))
            if key not in target_edges or target_edges[key] != label:
                ok = False
                break
        if ok:
            return True
    return False


class TestEmbeds:
    def test_single_node(self):
        assert embeds(single("A"), path(3, ["B", "A", "C"]))
        assert not embeds(single("A"), path(3, ["B", "B", "C"]))

    def test_triangle_into_k4(self):
        assert embeds(clique(3), clique(4))

    def test_non_adjacent_labels(self):
        assert not embeds(graph("AB", [(0, 1)]), path(3, ["A", "C", "B"]))

    def test_pattern_larger_than_target(self):
        assert not embeds(clique(4), clique(3))

    def test_edge_labels_must_agree(self):
        labeled = graph("AB", [(0, 1, "1")])
        plain = graph("AB", [(0, 1)])
        assert embeds(labeled, labeled)
        assert not embeds(labeled, plain)
        assert not embeds(plain, labeled)

    def test_identity_and_extension(self):
        g = graph("ABCA", [(0, 1), (1, 2), (2, 3), (0, 3)])
        bigger = graph("ABCAD", [(0, 1), (1, 2), (2, 3), (0, 3), (3, 4), (1, 3)])
        assert embeds(g, g)
        assert embeds(g, bigger)

    def test_agrees_with_exhaustive_enumeration(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            pattern = random_connected_graph(rng, int(rng.integers(1, 6)), 0.3)
            target = random_connected_graph(rng, int(rng.integers(1, 9)), 0.4)
            assert embeds(pattern, target) == exhaustive_embeds(pattern, target)


class TestSupport:
    def test_counts_graphs(self):
        db = GraphDatabase((path(2, ["A", "B"]), single("A")), ("g1", "g2"))
        assert support(single("A"), db) == 2

    def test_empty_db(self):
        assert support(single("A"), GraphDatabase()) == 0

    def test_triangle(self):
        db = GraphDatabase((clique(4), path(3, ["A", "B", "C"])), ("k4", "p3"))
        assert support(clique(3), db) == 1

    def test_anti_monotone(self):
        rng = np.random.default_rng(5)
        db = GraphDatabase(
            tuple(random_connected_graph(rng, 7, 0.3) for _ in range(12)),
            tuple(str(i) for i in range(12)),
        )
        small = path(2, ["C", "N"])
        larger = path(3, ["C", "N", "O"])
        assert support(larger, db) <= support(small, db)


class TestOccurrenceMatrix:
    def test_by_search(self):
        db = GraphDatabase((path(2, ["A", "B"]), single("A")), ("g1", "g2"))
        matrix = occurrence_matrix(records_of([single("A"), single("B")]), db)
        assert matrix.bits.tolist() == [[1, 1], [1, 0]]
        assert matrix.graph_ids == ("g1", "g2")

    def test_empty_pattern_list(self):
        db = GraphDatabase((single("A"),) * 3, ("a", "b", "c"))
        assert occurrence_matrix([], db).shape == (0, 3)

    def test_occurrence_list_used_as_is(self):
        db = GraphDatabase((single("Z"),) * 4, ("a", "b", "c", "d"))
        record = SubgraphRecord(clique(3), 0, 2, (0, 2))
        assert occurrence_matrix([record], db).bits.tolist() == [[1, 0, 1, 0]]

    def test_occurrence_index_out_of_range(self):
        db = GraphDatabase((single("A"),) * 2, ("a", "b"))
        with pytest.raises(GraphError):
            occurrence_matrix([SubgraphRecord(single("A"), 0, 1, (5,))], db)

    def test_row_sums_equal_support(self):
        rng = np.random.default_rng(17)
        db = GraphDatabase(
            tuple(random_connected_graph(rng, 8, 0.3) for _ in range(10)),
            tuple(str(i) for i in range(10)),
        )
        patterns = [random_connected_graph(rng, int(rng.integers(1, 4)), 0.2) for _ in range(15)]
        matrix = occurrence_matrix(records_of(patterns), db, threads=3)
        assert matrix.row_sums().tolist() == [support(p, db) for p in patterns]

    def test_tsv_round_trip(self):
        db = GraphDatabase((path(2, ["A", "B"]), single("A")), ("g1", "g2"))
        matrix = occurrence_matrix(records_of([single("A"), single("B")]), db)
        stream = io.StringIO()
        write_occurrence_tsv(matrix, stream)
        loaded = read_occurrence_tsv(io.StringIO(stream.getvalue()))
        assert loaded.graph_ids == matrix.graph_ids
        assert loaded.pattern_ids == matrix.pattern_ids
        np.testing.assert_array_equal(loaded.bits, matrix.bits)
