import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from chromacomm.channel import SharedRandomStream
from chromacomm.graph import (
    Coloring,
    Graph,
    GraphError,
    PartitionedGraph,
    gen_clique_union,
    gen_random_bounded,
    gen_structured,
    left_degree,
    left_degrees,
    monochromatic_edges,
    partition_edges,
    read_graph,
    read_partition,
    slack_profile,
    verify_coloring,
    write_graph,
    write_partition,
)


class TestGraph:
    def test_from_edges_normalizes(self):
        g = Graph.from_edges(3, [(2, 1), (3, 2)])
        assert g.edges == frozenset({(1, 2), (2, 3)})
        assert g.neighbors(2) == frozenset({1, 3})
        assert g.max_degree == 2

    def test_rejects_self_loop_and_duplicates(self):
        with pytest.raises(GraphError):
            Graph.from_edges(2, [(1, 1)])
        with pytest.raises(GraphError):
            Graph.from_edges(2, [(1, 2), (2, 1)])

    def test_rejects_out_of_range_endpoint(self):
        with pytest.raises(GraphError):
            Graph.from_edges(2, [(1, 3)])

    def test_empty_graph(self):
        g = Graph(4, frozenset())
        assert g.m == 0
        assert g.max_degree == 0


class TestGenerators:
    def test_clique_union(self):
        g = gen_clique_union(2, 3)
        assert g.n == 8
        assert g.m == 12
        assert g.max_degree == 3
        assert all(g.degree(v) == 3 for v in range(1, 9))
        assert (4, 5) not in g.edges

    def test_clique_union_delta_zero(self):
        g = gen_clique_union(5, 0)
        assert g.n == 5 and g.m == 0

    def test_clique_union_rejects_bad_parameters(self):
        with pytest.raises(GraphError):
            gen_clique_union(0, 3)

    @settings(max_examples=40, deadline=None)
    @given(
        n=st.integers(min_value=1, max_value=40),
        delta=st.integers(min_value=0, max_value=6),
        p=st.floats(min_value=0.0, max_value=1.0),
        seed=st.integers(min_value=0, max_value=2 ** 32),
    )
    def test_random_bounded_respects_delta(self, n, delta, p, seed):
        g = gen_random_bounded(n, delta, p, seed)
        assert g.max_degree <= delta

    def test_random_bounded_is_deterministic(self):
        assert gen_random_bounded(30, 4, 0.3, 7) == gen_random_bounded(30, 4, 0.3, 7)

    def test_structured_families(self):
        assert gen_structured("path", 4).m == 3
        cycle = gen_structured("cycle", 5)
        assert cycle.m == 5 and all(cycle.degree(v) == 2 for v in range(1, 6))
        star = gen_structured("star", 5)
        assert star.degree(1) == 4 and star.max_degree == 4
        bipartite = gen_structured("complete-bipartite", 5)
        assert bipartite.m == 6 and bipartite.max_degree == 3

    def test_structured_minimum_sizes(self):
        with pytest.raises(GraphError):
            gen_structured("cycle", 2)
        with pytest.raises(GraphError):
            gen_structured("path", 1)


class TestPartition:
    @pytest.mark.parametrize("mode", ["uniform", "all-alice", "all-bob", "interleave"])
    def test_modes_cover_disjointly(self, mode):
        g = gen_clique_union(3, 4)
        pg = partition_edges(g, mode, seed=3)
        assert pg.edges_a | pg.edges_b == g.edges
        assert pg.is_disjoint
        assert pg.delta == 4

    def test_all_alice(self, triangle):
        pg = partition_edges(triangle, "all_alice")
        assert pg.edges_a == triangle.edges and not pg.edges_b

    def test_interleave_alternates(self, triangle):
        pg = partition_edges(triangle, "interleave")
        assert pg.edges_a == frozenset({(1, 2), (2, 3)})
        assert pg.edges_b == frozenset({(1, 3)})

    def test_overlap_allowed_only_when_flagged(self, triangle):
        pg = partition_edges(gen_clique_union(4, 5), "overlap", seed=1)
        assert pg.allow_overlap
        assert pg.edges_a | pg.edges_b == pg.base.edges
        with pytest.raises(GraphError):
            PartitionedGraph(triangle, triangle.edges, frozenset({(1, 2)}), 2)

    def test_delta_must_match(self, triangle):
        with pytest.raises(GraphError):
            PartitionedGraph(triangle, triangle.edges, frozenset(), 3)

    def test_uniform_is_seeded(self):
        g = gen_clique_union(2, 6)
        assert partition_edges(g, "uniform", 11) == partition_edges(g, "uniform", 11)

    def test_party_adjacency(self, triangle):
        pg = partition_edges(triangle, "interleave")
        assert pg.adjacency_a[2] == frozenset({1, 3})
        assert pg.adjacency_b[1] == frozenset({3})


class TestColoringChecks:
    def test_verify_coloring(self, triangle):
        assert verify_coloring(triangle, (1, 2, 3), 3)
        assert not verify_coloring(triangle, (1, 1, 2), 3)
        assert not verify_coloring(triangle, (1, 2, 4), 3)
        assert not verify_coloring(triangle, (1, 2), 3)
        assert verify_coloring(triangle, Coloring.from_sequence([3, 1, 2]), 3)

    def test_monochromatic_edges(self, path3):
        assert monochromatic_edges(path3.edges, (1, 1, 1)) == [(1, 2), (2, 3)]
        assert monochromatic_edges(path3.edges, (1, 2, 1)) == []

    def test_coloring_indexing(self):
        c = Coloring((2, 0, 1))
        assert c[1] == 2 and len(c) == 3
        assert not c.is_complete

    def test_left_degrees(self, path3):
        pi = [2, 1, 3]
        assert left_degree(path3, pi, 2) == 0
        assert left_degree(path3, pi, 3) == 1
        assert left_degrees(path3, pi) == [0, 1, 0, 1]
        assert slack_profile(path3, pi) == [0, 2, 3, 2]

    def test_left_degrees_sum_to_edge_count(self):
        g = gen_random_bounded(25, 5, 0.4, 2)
        pi = list(range(25, 0, -1))
        assert sum(left_degrees(g, pi)) == g.m
        assert all(k >= 1 for k in slack_profile(g, pi)[1:])

    def test_left_degree_uniform_in_clique(self):
        # in K_5 a vertex has 0..4 earlier neighbors with equal probability
        g = gen_clique_union(1, 4)
        stream = SharedRandomStream(77)
        degrees = [left_degree(g, stream.permutation(5), 1) for _ in range(10_000)]
        counts = np.bincount(degrees, minlength=5)
        assert len(counts) == 5
        assert stats.chisquare(counts).pvalue > 1e-4


class TestFiles:
    def test_graph_file(self, tmp_path):
        g = gen_random_bounded(12, 3, 0.5, 4)
        path = tmp_path / "g.txt"
        write_graph(g, path)
        assert read_graph(path) == g

    def test_partition_file_keeps_owners(self, tmp_path):
        pg = partition_edges(gen_clique_union(2, 3), "overlap", seed=5)
        path = tmp_path / "p.txt"
        write_partition(pg, path)
        loaded = read_partition(path)
        assert loaded.edges_a == pg.edges_a
        assert loaded.edges_b == pg.edges_b

    def test_header_mismatch(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("3 2 2\n1 2\n")
        with pytest.raises(GraphError):
            read_graph(path)

    def test_wrong_delta(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("3 1 2\n1 2\n")
        with pytest.raises(GraphError):
            read_graph(path)

    def test_partition_owner_required(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("2 1 1\n1 2 C\n")
        with pytest.raises(GraphError):
            read_partition(path)
