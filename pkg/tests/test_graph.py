import io

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modtune import (NEW_COMMUNITY, EdgeListError, Graph, Partition, apply_move, modularity,
                     move_delta, parse_edge_list, read_partition_csv, serialize,
                     write_partition_csv)
from modtune.graph import partition_to_csv, scaled_modularity

from conftest import random_connected

P9_FT = [0, 0, 0, 1, 1, 1, 2, 2, 2]      # 53/128, the optimum
P9_NOFT = [0, 0, 0, 1, 1, 2, 2, 2, 2]    # 51/128


class TestParse:
    def test_three_node_path(self):
        g = parse_edge_list("a b\nb c\n")
        assert g.node_count == 3 and g.edge_count == 2
        assert g.degrees.tolist() == [1, 2, 1]

    def test_fixtures(self, path9, karate):
        assert (path9.node_count, path9.edge_count) == (9, 8)
        assert (karate.node_count, karate.edge_count) == (34, 78)
        assert karate.degrees.sum() == 156

    def test_comments_and_blank_lines(self):
        g = parse_edge_list(["# header", "", "  1 2  ", "\t2\t3", "# x y z"])
        assert g.node_labels == ("1", "2", "3")

    @pytest.mark.parametrize("text, line", [
        ("1 2\n2\n", 2),
        ("1 2\n2 3 4\n", 2),
        ("# c\n1 2\n3 3\n", 3),
    ])
    def test_errors_name_the_line(self, text, line):
        with pytest.raises(EdgeListError) as info:
            parse_edge_list(text)
        assert info.value.line == line
        assert f"line {line}" in str(info.value)

    def test_empty(self):
        with pytest.raises(EdgeListError):
            parse_edge_list("# nothing\n\n")

    def test_duplicates_collapse(self, caplog):
        g = parse_edge_list("1 2\n2 1\n1 2\n2 3\n")
        assert g.edge_count == 2 and g.duplicate_edges == 2
        assert "duplicate" in caplog.text

    def test_roundtrip(self, karate):
        assert parse_edge_list(serialize(karate)) == karate

    def test_graph_rejects_self_loop(self):
        with pytest.raises(ValueError):
            Graph(2, [(1, 1)])

    def test_csr_is_read_only(self, path9):
        with pytest.raises(ValueError):
            path9.degrees[0] = 5


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9))
                .filter(lambda e: e[0] != e[1]), min_size=1, max_size=30))
def test_serialize_roundtrip_property(pairs):
    text = "\n".join(f"n{a} n{b}" for a, b in pairs)
    g = parse_edge_list(text)
    assert parse_edge_list(serialize(g)) == g
    assert g.degrees.sum() == 2 * g.edge_count


class TestModularity:
    def test_path9_values(self, path9):
        assert modularity(path9, np.array(P9_NOFT)) == pytest.approx(51 / 128, abs=1e-15)
        assert modularity(path9, np.array(P9_FT)) == pytest.approx(53 / 128, abs=1e-15)
        assert modularity(path9, Partition.whole(path9)) == 0.0

    def test_singletons(self):
        g = parse_edge_list("1 2\n2 3\n")
        assert modularity(g, Partition.singletons(g)) == -0.375

    def test_two_triangles(self, two_triangles):
        assert modularity(two_triangles, np.array([0, 0, 0, 1, 1, 1])) == pytest.approx(5 / 14)

    def test_scaled_is_integer(self, path9):
        assert scaled_modularity(path9, np.array(P9_FT)) == 53 * 2

    def test_ids_need_not_be_compact(self, path9):
        a = np.array(P9_FT)
        assert modularity(path9, a * 7 + 3) == modularity(path9, a)


class TestMoves:
    def test_path9_moves(self, path9):
        p = Partition(path9, P9_NOFT)
        assert move_delta(path9, p, 5, 1) == pytest.approx(1 / 64, abs=1e-15)
        q = Partition(path9, P9_FT)
        assert move_delta(path9, q, 5, 2) == pytest.approx(-1 / 64, abs=1e-15)

    def test_noop_moves(self, path9):
        p = Partition(path9, P9_FT)
        assert move_delta(path9, p, 4, 1) == 0.0
        s = Partition.singletons(path9)
        assert move_delta(path9, s, 4, NEW_COMMUNITY) == 0.0
        with pytest.raises(IndexError):
            move_delta(path9, p, 0, 3)

    def test_apply_compacts(self):
        g = parse_edge_list("1 2\n2 3\n")
        p = Partition(g, [0, 0, 1])
        apply_move(g, p, 2, 0)
        assert p.community_count == 1 and p.assignment.tolist() == [0, 0, 0]
        p.check(g)
        apply_move(g, p, 1, NEW_COMMUNITY)
        assert p.assignment.tolist() == [0, 1, 0]
        p.check(g)

    def test_random_moves_match_recomputation(self, rng):
        for _ in range(300):
            g = random_connected(rng)
            p = Partition(g, rng.integers(0, 4, g.node_count))
            node = int(rng.integers(g.node_count))
            target = int(rng.integers(-1, p.community_count))
            before = modularity(g, p)
            d = move_delta(g, p, node, target)
            apply_move(g, p, node, target)
            p.check(g)
            assert abs(modularity(g, p) - before - d) <= 1e-12


def test_partition_csv_roundtrip(karate):
    p = Partition(karate, np.arange(34) % 5)
    buf = io.StringIO(partition_to_csv(karate, p))
    assert buf.getvalue().startswith("node,community\n")
    assert read_partition_csv(karate, buf) == p
    out = io.StringIO()
    write_partition_csv(karate, p, out)
    assert out.getvalue() == partition_to_csv(karate, p)


def test_from_communities_by_label(path9):
    p = Partition.from_communities(path9, [["1", "2", "3"], ["4", "5", "6"], ["7", "8", "9"]])
    assert p.assignment.tolist() == P9_FT
    with pytest.raises(ValueError):
        Partition.from_communities(path9, [["1"]])
