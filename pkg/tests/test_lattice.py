import numpy as np
import pytest
from hypothesis import given, strategies as st

from maxlinperc.lattice import (
    Direction,
    LatticeEdge,
    LatticeNode,
    OutOfWindowError,
    Window,
    ancestor_bitsets,
    ancestors,
    ancestors_closed,
    children,
    delta,
    descendants,
    parents,
)
from maxlinperc.percolation import BondConfiguration

from conftest import configurations, nodes_in, windows

N = LatticeNode
E, NO = Direction.EAST, Direction.NORTH


@pytest.mark.parametrize("i, j, d", [((0, 0), (0, 0), 0), ((0, 0), (2, 3), 5), ((-1, 4), (1, 1), 5)])
def test_delta(i, j, d):
    assert delta(i, j) == d


def test_parents_examples():
    w = Window.centered(5)
    assert parents((3, 3), w) == {N(2, 3), N(3, 2)}
    assert parents((3, 3), w, np.zeros(w.n_edges, bool)) == set()
    only = [LatticeEdge(N(2, 3), E)]
    assert parents((3, 3), w, only) == {N(2, 3)}


def test_ancestor_examples():
    w = Window.square(3)
    assert ancestors((0, 0), w) == set()
    assert ancestors((1, 1), w) == {N(0, 0), N(0, 1), N(1, 0)}
    assert ancestors((1, 0), w, [(N(0, 0), "E")]) == {N(0, 0)}


def test_descendant_examples():
    assert descendants((2, 2), Window.square(3)) == set()
    assert descendants((0, 0), Window.square(2)) == {N(0, 1), N(1, 0), N(1, 1)}
    w = Window.square(4)
    assert descendants((1, 1), w, np.zeros(w.n_edges, bool)) == set()


def test_edge_target_and_between():
    e = LatticeEdge(N(2, 3), NO)
    assert e.target == N(2, 4)
    assert LatticeEdge.between((2, 3), (3, 3)) == LatticeEdge(N(2, 3), E)
    with pytest.raises(ValueError):
        LatticeEdge.between((0, 0), (1, 1))


def test_out_of_window():
    w = Window.square(3)
    with pytest.raises(OutOfWindowError):
        ancestors((5, 5), w)
    with pytest.raises(OutOfWindowError):
        w.edge_index(LatticeEdge(N(2, 0), E))


@given(windows(max_side=7))
def test_edge_and_node_index_roundtrip(w):
    assert w.n_edges == (w.width - 1) * w.height + w.width * (w.height - 1)
    assert [w.node_index(n) for n in w.nodes()] == list(range(w.n_nodes))
    assert [w.edge_index(e) for e in w.edges()] == list(range(w.n_edges))
    for k in range(w.n_edges):
        assert w.edge_index(w.edge_at(k)) == k


@given(configurations())
def test_duality(cfg):
    w = cfg.window
    an = {i: ancestors(i, w, cfg) for i in w.nodes()}
    de = {i: descendants(i, w, cfg) for i in w.nodes()}
    for i in w.nodes():
        for j in w.nodes():
            assert (j in an[i]) == (i in de[j])


@given(configurations())
def test_acyclic(cfg):
    for i in cfg.window.nodes():
        assert i not in ancestors(i, cfg.window, cfg)


@given(configurations(), st.data())
def test_monotone_in_open_edges(cfg, data):
    w = cfg.window
    extra = np.array(data.draw(st.lists(st.booleans(), min_size=w.n_edges, max_size=w.n_edges)), bool)
    bigger = cfg.open_edges | extra
    i = data.draw(nodes_in(w))
    assert ancestors(i, w, cfg) <= ancestors(i, w, bigger)
    assert descendants(i, w, cfg) <= descendants(i, w, bigger)


@given(windows(), st.data())
def test_full_lattice_cone_size(w, data):
    i = data.draw(nodes_in(w))
    expected = (i[0] - w.min_corner[0] + 1) * (i[1] - w.min_corner[1] + 1) - 1
    assert len(ancestors(i, w)) == expected


@given(configurations())
def test_children_parents_agree(cfg):
    w = cfg.window
    for i in w.nodes():
        for c in children(i, w, cfg):
            assert i in parents(c, w, cfg)


@given(configurations())
def test_bitsets_match_bfs(cfg):
    w = cfg.window
    sets = ancestor_bitsets(w, cfg)
    for n in range(w.n_nodes):
        got = {w.node_at(k) for k in range(w.n_nodes) if sets[n] >> k & 1}
        assert got == ancestors_closed(w.node_at(n), w, cfg)


def test_mask_accepts_predicate_forms():
    w = Window.square(3)
    edge = LatticeEdge(N(0, 0), E)
    via_list = w.mask([edge])
    assert via_list.sum() == 1 and via_list[w.edge_index(edge)]
    assert np.array_equal(w.mask(lambda e: e == edge), via_list)
    assert np.array_equal(w.mask(BondConfiguration(w, via_list)), via_list)
    assert w.mask(None).all()


def test_window_helpers():
    w = Window.centered(3)
    assert (w.width, w.height, w.center) == (7, 7, N(0, 0))
    assert w.margin((0, 0)) == 3 and w.margin((3, 0)) == 0
    assert Window.bounding([(1, 5), (-2, 0)]) == Window(N(-2, 0), N(1, 5))
