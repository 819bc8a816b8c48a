import numpy as np
import pytest

from hawe.graph import (GraphFormatError, default_type_names, from_edge_list,
                        gen_ba, gen_er, gen_pinwheel, load_graph, save_graph,
                        read_id_value_tsv, wl_roles, write_roles_tsv)


def test_from_edge_list_builds_sorted_csr():
    g = from_edge_list(4, [(1, 0), (2, 1), (0, 2), (0, 2)], [0, 0, 1, 1], ["A", "B"])
    g.validate()
    assert g.num_edges == 3  # duplicate 0-2 dropped
    assert g.neighbors(0).tolist() == [1, 2]
    assert g.neighbors(3).tolist() == []
    assert g.degrees().tolist() == [2, 2, 2, 0]


def test_from_edge_list_rejects_self_loop_and_range():
    with pytest.raises(ValueError):
        from_edge_list(3, [(0, 0)], [0, 0, 0], ["A"])
    with pytest.raises(ValueError):
        from_edge_list(3, [(0, 5)], [0, 0, 0], ["A"])


def test_load_save_roundtrip(tmp_path):
    g = from_edge_list(4, [(0, 1), (1, 2), (2, 3)], [0, 1, 0, 1], ["A", "B"],
                       raw_ids=["n0", "n1", "n2", "n3"],
                       labels=np.array([0, 1, 0, -1], dtype=np.int32),
                       label_names=["x", "y"])
    save_graph(g, tmp_path / "nodes.tsv", tmp_path / "edges.tsv")
    back = load_graph(tmp_path / "nodes.tsv", tmp_path / "edges.tsv")
    back.validate()
    assert back.raw_ids == g.raw_ids
    assert back.type_names == g.type_names
    assert back.node_types.tolist() == g.node_types.tolist()
    assert back.labels.tolist() == g.labels.tolist()
    assert np.array_equal(back.indptr, g.indptr)
    assert np.array_equal(back.indices, g.indices)


def test_load_graph_accepts_comments_blanks_and_dedups(tmp_path):
    (tmp_path / "nodes.tsv").write_text(
        "# comment\n\na A\nb B\nc A\n", encoding="utf-8")
    (tmp_path / "edges.tsv").write_text(
        "a b\nb a\n# dup below\na c\na c\n", encoding="utf-8")
    g = load_graph(tmp_path / "nodes.tsv", tmp_path / "edges.tsv")
    assert g.num_edges == 2
    assert g.labels is None


def test_load_graph_error_reports_line_numbers(tmp_path):
    nodes = tmp_path / "nodes.tsv"
    edges = tmp_path / "edges.tsv"

    nodes.write_text("a A\nb\n", encoding="utf-8")
    edges.write_text("", encoding="utf-8")
    with pytest.raises(GraphFormatError, match=r"nodes.tsv:2"):
        load_graph(nodes, edges)

    nodes.write_text("a A\nb B\na B\n", encoding="utf-8")
    with pytest.raises(GraphFormatError, match="conflicting"):
        load_graph(nodes, edges)

    nodes.write_text("a A\nb B\n", encoding="utf-8")
    edges.write_text("a z\n", encoding="utf-8")
    with pytest.raises(GraphFormatError, match=r"edges.tsv:1.*'z'"):
        load_graph(nodes, edges)

    edges.write_text("a b\nb b\n", encoding="utf-8")
    with pytest.raises(GraphFormatError, match=r"edges.tsv:2.*self-loop"):
        load_graph(nodes, edges)

    edges.write_text("a b extra\n", encoding="utf-8")
    with pytest.raises(GraphFormatError, match=r"edges.tsv:1"):
        load_graph(nodes, edges)


def test_roles_tsv_roundtrip(tmp_path):
    g = gen_pinwheel(4, 1)
    roles = wl_roles(g).roles
    write_roles_tsv(g, roles, tmp_path / "roles.tsv")
    got = read_id_value_tsv(tmp_path / "roles.tsv")
    assert got == {g.raw_ids[i]: str(int(roles[i])) for i in range(g.num_nodes)}


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------

def test_pinwheel_shape():
    g = gen_pinwheel(8, 2)
    g.validate()
    assert g.num_nodes == 8 * 3
    # ring + hub-to-path + path chain edges
    assert g.num_edges == 8 + 8 + 8
    assert g.num_types == 1
    hub_degrees = [g.degree(i) for i in range(8)]
    assert hub_degrees == [3] * 8


def test_pinwheel_heterogeneous_types_alternate():
    g = gen_pinwheel(6, 3, heterogeneous=True)
    assert g.num_types == 2
    for i in range(6):
        blade = [i] + [6 + i * 3 + j for j in range(3)]
        assert len({int(g.node_types[v]) for v in blade}) == 1
        assert int(g.node_types[i]) == i % 2


def test_pinwheel_validation():
    with pytest.raises(ValueError):
        gen_pinwheel(2, 1)
    with pytest.raises(ValueError):
        gen_pinwheel(4, 0)
    with pytest.raises(ValueError):
        gen_pinwheel(5, 1, heterogeneous=True)  # odd ring cannot alternate


def test_er_determinism_and_edge_count():
    a = gen_er(300, 0.02, 3, seed=9)
    b = gen_er(300, 0.02, 3, seed=9)
    assert np.array_equal(a.indices, b.indices)
    assert np.array_equal(a.node_types, b.node_types)
    c = gen_er(300, 0.02, 3, seed=10)
    assert not np.array_equal(a.indices, c.indices)
    a.validate()
    # mean edge count n(n-1)/2 * p = 897; allow 5 sigma
    sigma = np.sqrt(300 * 299 / 2 * 0.02 * 0.98)
    assert abs(a.num_edges - 897) < 5 * sigma


def test_er_extremes():
    assert gen_er(50, 0.0, 1, seed=1).num_edges == 0
    full = gen_er(12, 1.0, 1, seed=1)
    assert full.num_edges == 12 * 11 // 2
    full.validate()


def test_er_type_assignment_spans_range():
    g = gen_er(500, 0.01, 4, seed=2)
    assert set(np.unique(g.node_types)) == {0, 1, 2, 3}
    assert g.type_names == ["A", "B", "C", "D"]


def test_ba_tree():
    g = gen_ba(200, 1, 2, seed=7)
    g.validate()
    # n-1 edges and connected: a tree
    assert g.num_edges == 199
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in g.neighbors(u):
            if int(v) not in seen:
                seen.add(int(v))
                stack.append(int(v))
    assert len(seen) == 200


def test_ba_multi_attachment():
    g = gen_ba(100, 3, 1, seed=3)
    g.validate()
    assert g.num_edges == (100 - 3) * 3
    assert gen_ba(100, 3, 1, seed=3).indices.tolist() == g.indices.tolist()
    with pytest.raises(ValueError):
        gen_ba(3, 3, 1, seed=0)


def test_default_type_names_overflow():
    assert default_type_names(3) == ["A", "B", "C"]
    names = default_type_names(30)
    assert names[0] == "T0" and len(set(names)) == 30


# ---------------------------------------------------------------------------
# WL roles
# ---------------------------------------------------------------------------

def test_wl_path_untyped():
    # path a-b-c: ends vs middle
    g = from_edge_list(3, [(0, 1), (1, 2)], [0, 0, 0], ["A"])
    r = wl_roles(g)
    assert r.num_roles == 2
    assert r.roles.tolist() == [0, 1, 0]


def test_wl_types_split_identical_structure():
    # same path, typed ends differ from each other only by type
    g = from_edge_list(3, [(0, 1), (1, 2)], [0, 1, 1], ["A", "B"])
    r = wl_roles(g)
    assert r.num_roles == 3  # type seeds keep node 0 and node 2 apart


def test_wl_cycle_untyped_single_role():
    edges = [(i, (i + 1) % 6) for i in range(6)]
    g = from_edge_list(6, edges, [0] * 6, ["A"])
    assert wl_roles(g).num_roles == 1


def test_wl_pinwheel_role_counts():
    hom = gen_pinwheel(8, 2)
    het = gen_pinwheel(8, 2, heterogeneous=True)
    assert wl_roles(hom).num_roles == 3   # hub, mid, tip
    assert wl_roles(het).num_roles == 6   # the 3 positions split by blade type


def test_wl_role_ids_contiguous_first_occurrence():
    g = gen_pinwheel(8, 2, heterogeneous=True)
    roles = wl_roles(g).roles
    seen = []
    for r in roles.tolist():
        if r not in seen:
            seen.append(r)
    assert seen == sorted(seen) == list(range(6))
    # typed nodes never share a role with the other type
    for r in range(6):
        types = {int(g.node_types[i]) for i in np.flatnonzero(roles == r)}
        assert len(types) == 1


def test_wl_max_iters_validation():
    g = gen_pinwheel(4, 1)
    with pytest.raises(ValueError):
        wl_roles(g, max_iters=0)
