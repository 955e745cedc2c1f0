import math

import pytest
from hypothesis import given, settings, strategies as st

from chromacomm.graph import Graph, gen_clique_union, gen_random_bounded, gen_structured, partition_edges
from chromacomm.counting import (
    CountingLimitError,
    all_graphs,
    build_cover_set,
    count_colorings_brute_force,
    count_colorings_exact,
    count_report,
    coloring_bound,
    estimate_proper_fraction,
    nondeterministic_protocol,
    verify_cover_set,
)


class TestExactCount:
    def test_triangle(self, triangle):
        assert count_colorings_exact(triangle, 3) == 6

    def test_single_edge(self, single_edge):
        assert count_colorings_exact(single_edge, 2) == 2

    def test_empty(self):
        assert count_colorings_exact(Graph(3, frozenset()), 1) == 1
        assert count_colorings_exact(Graph(0, frozenset()), 5) == 1

    def test_palette_too_small(self, triangle):
        assert count_colorings_exact(triangle, 2) == 0
        assert count_colorings_exact(triangle, 0) == 0

    @pytest.mark.parametrize("n, q, expected", [
        (4, 3, 18),
        (5, 3, 30),
        (6, 2, 2),
    ])
    def test_cycles(self, n, q, expected):
        # (q-1)^n + (-1)^n (q-1)
        assert count_colorings_exact(gen_structured("cycle", n), q) == expected

    def test_path(self):
        assert count_colorings_exact(gen_structured("path", 4), 3) == 24

    def test_large_clique(self):
        assert count_colorings_exact(gen_clique_union(1, 15), 16) == math.factorial(16)

    def test_sixteen_vertex_random_graph(self):
        g = gen_random_bounded(16, 4, 0.3, 5)
        count = count_colorings_exact(g, g.max_degree + 1)
        assert count >= coloring_bound(16, g.max_degree)

    def test_limit(self):
        with pytest.raises(CountingLimitError):
            count_colorings_exact(Graph(17, frozenset()), 2)

    @settings(max_examples=60, deadline=None)
    @given(
        n=st.integers(1, 6),
        p=st.floats(0, 1),
        seed=st.integers(0, 2 ** 32),
        q=st.integers(1, 4),
    )
    def test_matches_brute_force(self, n, p, seed, q):
        g = gen_random_bounded(n, 5, p, seed)
        assert count_colorings_exact(g, q) == count_colorings_brute_force(g, q)

    def test_monotone_in_q(self):
        g = gen_random_bounded(9, 4, 0.5, 1)
        counts = [count_colorings_exact(g, q) for q in range(0, 7)]
        assert counts == sorted(counts)


class TestBound:
    def test_values(self):
        assert coloring_bound(3, 2) == pytest.approx(1.3443, abs=1e-3)
        assert coloring_bound(0, 5) == 1
        assert coloring_bound(2, 1) == pytest.approx(0.5413, abs=1e-4)

    def test_holds_for_all_small_graphs(self):
        for n in range(1, 5):
            for g in all_graphs(n):
                assert count_colorings_exact(g, g.max_degree + 1) >= coloring_bound(n, g.max_degree)


class TestMonteCarlo:
    def test_empty_graph(self):
        fraction, error = estimate_proper_fraction(Graph(4, frozenset()), 3, 100, seed=1)
        assert fraction == 1.0 and error == 0.0

    @pytest.mark.parametrize("edges, n, q, exact", [
        ([(1, 2), (2, 3), (1, 3)], 3, 3, 6 / 27),
        ([(1, 2)], 2, 2, 0.5),
    ])
    def test_within_five_sigma(self, edges, n, q, exact):
        trials = 100_000
        fraction, _ = estimate_proper_fraction(Graph.from_edges(n, edges), q, trials, seed=7)
        sigma = math.sqrt(exact * (1 - exact) / trials)
        assert abs(fraction - exact) <= 5 * sigma

    def test_seeded(self, triangle):
        assert estimate_proper_fraction(triangle, 3, 5000, 3) == estimate_proper_fraction(triangle, 3, 5000, 3)

    def test_batches_do_not_change_trial_count(self, triangle):
        fraction, _ = estimate_proper_fraction(triangle, 3, 1001, seed=2, batch_size=100)
        assert 0 <= fraction <= 1
        assert (fraction * 1001) == pytest.approx(round(fraction * 1001))

    def test_trials_required(self, triangle):
        with pytest.raises(ValueError):
            estimate_proper_fraction(triangle, 3, 0)


def test_count_report(triangle):
    report = count_report(triangle, trials=2000, seed=1)
    assert report.q == 3
    assert report.exact_count == 6
    assert report.bound == pytest.approx(coloring_bound(3, 2))
    assert 0 < report.mc_fraction < 1
    record = report.to_dict()
    assert record["exact_count"] == 6
    assert record["trials"] == 2000
    assert record["estimated_count"] == pytest.approx(report.mc_fraction * 27)


def test_count_report_sections(triangle):
    exact_only = count_report(triangle).to_dict()
    assert exact_only["exact_count"] == 6
    assert "fraction" not in exact_only
    sampled = count_report(triangle, trials=500, seed=2, exact=False, batch_size=64)
    assert sampled.exact_count is None
    assert "exact_count" not in sampled.to_dict()
    assert sampled.to_dict()["fraction"] == estimate_proper_fraction(triangle, 3, 500, 2, 64)[0]


def test_count_report_exact_limit():
    with pytest.raises(CountingLimitError):
        count_report(Graph(17, frozenset()))
    assert count_report(Graph(17, frozenset()), trials=10, exact=False).mc_fraction == 1.0


class TestCoverSet:
    def test_single_vertex(self):
        cover = build_cover_set(1, 0, seed=0)
        assert len(cover.colorings) == 1
        assert cover.certificate_bits == 1

    def test_two_vertices(self):
        cover = build_cover_set(2, 1, seed=3)
        assert len(cover.graphs) == 2
        assert verify_cover_set(cover)

    def test_four_vertices(self):
        cover = build_cover_set(4, 3, seed=1)
        assert len(cover.graphs) == 64
        assert verify_cover_set(cover)
        assert len(cover.colorings) <= cover.draws

    def test_degree_filter(self):
        cover = build_cover_set(4, 1, seed=0)
        # matchings on 4 labeled vertices: empty, 6 single edges, 3 perfect matchings
        assert len(cover.graphs) == 10

    def test_limits(self):
        with pytest.raises(CountingLimitError):
            build_cover_set(6, 2)
        with pytest.raises(CountingLimitError):
            build_cover_set(3, 5)

    def test_nondeterministic_protocol(self, triangle):
        cover = build_cover_set(3, 2, seed=5)
        run = nondeterministic_protocol(partition_edges(triangle, "interleave"), cover)
        assert run.accepted
        assert run.bits == cover.certificate_bits

    def test_nondeterministic_wrong_size(self, triangle):
        cover = build_cover_set(4, 2, seed=5)
        with pytest.raises(CountingLimitError):
            nondeterministic_protocol(partition_edges(triangle), cover)
