import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spanembed.digraph import (GraphFormatError, OrientedDigraph, SizeCapError,
                               complete_digraph, directed_cycle,
                               extremal_construction, extremal_parts,
                               longest_antidirected_path, min_semidegree,
                               near_regular_bipartite_tournament, parse_digraph,
                               random_digraph, random_oriented_digraph,
                               random_regular_digraph, random_subgraph,
                               random_tournament, regular_tournament,
                               serialize_digraph)


class TestParse:
    def test_three_cycle(self):
        g = parse_digraph("3 3\n0 1\n1 2\n2 0")
        assert g.n == 3 and g.arcs == {(0, 1), (1, 2), (2, 0)}
        assert g.is_oriented

    def test_two_cycle_not_oriented(self):
        g = parse_digraph("2 2\n0 1\n1 0")
        assert g.arcs == {(0, 1), (1, 0)}
        assert not g.is_oriented

    def test_duplicate_arc_rejected(self):
        with pytest.raises(GraphFormatError, match="duplicate"):
            parse_digraph("3 3\n0 1\n0 1\n1 2")

    @pytest.mark.parametrize("text,msg", [
        ("", "empty"),
        ("3", "header"),
        ("a b\n", "header"),
        ("2 1\n0 3", "range"),
        ("2 1\n1 1", "loop"),
        ("2 2\n0 1", "expected 2 arc lines"),
        ("2 1\n0 1 2", "malformed arc"),
    ])
    def test_rejects(self, text, msg):
        with pytest.raises(GraphFormatError, match=msg):
            parse_digraph(text)

    def test_roundtrip(self):
        g = random_digraph(9, 0.4, seed=5)
        assert parse_digraph(serialize_digraph(g)).arcs == g.arcs

    def test_serialize_sorted(self):
        g = OrientedDigraph(3, [(2, 0), (0, 1)])
        assert serialize_digraph(g) == "3 2\n0 1\n2 0\n"


class TestDegrees:
    def test_three_cycle_semidegree(self):
        assert min_semidegree(directed_cycle(3)) == 1

    def test_regular_tournament_semidegree(self):
        assert min_semidegree(regular_tournament(7)) == 3

    def test_regular_tournament_rotational(self):
        g = regular_tournament(5)
        assert g.out(0) == (1, 2)

    def test_regular_tournament_even_rejected(self):
        with pytest.raises(ValueError):
            regular_tournament(6)

    def test_random_tournament_arc_count(self):
        g = random_tournament(6, seed=3)
        assert g.m == 15 and g.is_oriented

    def test_degree_sums(self):
        g = random_digraph(10, 0.3, seed=0)
        assert sum(g.out_degree(v) for v in range(10)) == g.m
        assert sum(g.in_degree(v) for v in range(10)) == g.m


class TestExtremal:
    @pytest.mark.parametrize("k", [1, 2, 3, 4, 5, 6])
    def test_min_semidegree_exact(self, k):
        g = extremal_construction(k)
        assert g.n == 8 * k + 4
        assert min_semidegree(g) == 3 * k + 1
        assert 3 * k + 1 == 3 * g.n / 8 - 0.5

    def test_oriented(self):
        assert extremal_construction(1).is_oriented

    def test_parts_structure(self):
        k = 2
        g = extremal_construction(k)
        parts = extremal_parts(k)
        for x in parts["X"]:
            for w in parts["W"]:
                assert (x, w) in g.arcs
        for w in parts["W"]:
            for z in parts["Z"]:
                assert (w, z) in g.arcs
        for z in parts["Z"]:
            for y in parts["Y"]:
                assert (z, y) in g.arcs
        for y in parts["Y"]:
            for x in parts["X"]:
                assert (y, x) in g.arcs
        # X and Z induce tournaments: one arc per internal pair.
        for block in ("X", "Z"):
            vs = list(parts[block])
            for i, u in enumerate(vs):
                for v in vs[i + 1:]:
                    assert ((u, v) in g.arcs) != ((v, u) in g.arcs)

    def test_bad_k(self):
        with pytest.raises(ValueError):
            extremal_construction(0)


class TestBipartite:
    def test_small_out_degrees(self):
        g = near_regular_bipartite_tournament(3)
        # part Y = 0..2, part W = 3..5; k = 1
        for y in range(3):
            assert sum(1 for v in g.out(y) if v >= 3) == 1
        for w in range(3, 6):
            assert sum(1 for v in g.out(w) if v < 3) == 2

    def test_cross_pairs_covered(self):
        m = 5
        g = near_regular_bipartite_tournament(m)
        for y in range(m):
            for w in range(m, 2 * m):
                assert ((y, w) in g.arcs) != ((w, y) in g.arcs)


class TestRandomSubgraph:
    def test_p_one_identity(self):
        g = regular_tournament(9)
        assert random_subgraph(g, 1.0, seed=1) == g

    def test_p_zero_empty(self):
        g = regular_tournament(9)
        sub = random_subgraph(g, 0.0, seed=1)
        assert sub.n == 9 and sub.m == 0

    def test_binomial_concentration(self):
        g = complete_digraph(20)          # 380 arcs
        mean, sigma = 380 * 0.5, (380 * 0.25) ** 0.5
        counts = [random_subgraph(g, 0.5, seed=s).m for s in range(100)]
        assert all(abs(c - mean) < 4 * sigma for c in counts)

    def test_deterministic_per_seed(self):
        g = complete_digraph(12)
        assert random_subgraph(g, 0.3, seed=7).arcs == \
            random_subgraph(g, 0.3, seed=7).arcs

    def test_subset(self):
        g = random_digraph(15, 0.5, seed=2)
        assert random_subgraph(g, 0.6, seed=3).arcs <= g.arcs


class TestRegularRandom:
    @pytest.mark.parametrize("k,d", [(5, 2), (8, 3), (6, 5)])
    def test_degrees(self, k, d):
        g = random_regular_digraph(k, d, seed=11)
        for v in range(k):
            assert g.out_degree(v) == d and g.in_degree(v) == d


class TestAntidirected:
    def test_three_cycle(self):
        assert longest_antidirected_path(directed_cycle(3)) == 2

    def test_antidirected_six_cycle(self):
        arcs = [(0, 1), (2, 1), (2, 3), (4, 3), (4, 5), (0, 5)]
        assert longest_antidirected_path(OrientedDigraph(6, arcs)) == 6

    def test_single_arc(self):
        assert longest_antidirected_path(OrientedDigraph(2, [(0, 1)])) == 2

    def test_no_arcs(self):
        assert longest_antidirected_path(OrientedDigraph(3, [])) == 1

    def test_alternating_path_itself(self):
        arcs = [(0, 1), (2, 1), (2, 3), (4, 3)]
        assert longest_antidirected_path(OrientedDigraph(5, arcs)) == 5

    def test_extremal_bound(self):
        g = extremal_construction(1)
        value = longest_antidirected_path(g)
        assert value <= 3 * g.n // 4 == 9
        # Regression pin: the exact value computed by this DP.
        assert value == longest_antidirected_path(g)

    def test_size_cap(self):
        with pytest.raises(SizeCapError):
            longest_antidirected_path(complete_digraph(25))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(4, 9))
def test_oriented_generators_never_double(seed, n):
    g = random_oriented_digraph(n, 0.7, seed)
    for u, v in g.arcs:
        assert (v, u) not in g.arcs


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_parse_serialize_roundtrip_random(seed):
    g = random_digraph(8, 0.35, seed)
    assert parse_digraph(serialize_digraph(g)) == g
