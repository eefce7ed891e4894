import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from maxlinperc.lattice import LatticeNode, Window
from maxlinperc.maxlinear import WeightedDag
from maxlinperc.percolation import BondConfiguration

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@st.composite
def windows(draw, max_side=6, min_side=1):
    w = draw(st.integers(min_side, max_side))
    h = draw(st.integers(min_side, max_side))
    x0 = draw(st.integers(-3, 3))
    y0 = draw(st.integers(-3, 3))
    return Window(LatticeNode(x0, y0), LatticeNode(x0 + w - 1, y0 + h - 1))


@st.composite
def configurations(draw, max_side=6, min_side=1):
    w = draw(windows(max_side, min_side))
    bits = draw(st.lists(st.booleans(), min_size=w.n_edges, max_size=w.n_edges))
    return BondConfiguration(w, np.array(bits, dtype=bool))


def nodes_in(window: Window):
    return st.builds(
        LatticeNode,
        st.integers(window.min_corner[0], window.max_corner[0]),
        st.integers(window.min_corner[1], window.max_corner[1]),
    )


@st.composite
def weighted_dags(draw, max_side=5):
    cfg = draw(configurations(max_side))
    nodes = list(cfg.window.nodes())
    weight = st.floats(0.1, 10.0, allow_nan=False)
    nw = {n: draw(weight) for n in nodes}
    ew = {e: draw(weight) for e in cfg.edges()}
    return WeightedDag(cfg.window, nw, ew)


@pytest.fixture
def chain():
    from maxlinperc.lattice import Direction, LatticeEdge

    a, b, c = LatticeNode(0, 0), LatticeNode(1, 0), LatticeNode(2, 0)
    return WeightedDag(
        Window.bounding([a, c]),
        {a: 1.0, b: 1.0, c: 1.0},
        {LatticeEdge(a, Direction.EAST): 2.0, LatticeEdge(b, Direction.EAST): 3.0},
    )


# -- acceptance summary -----------------------------------------------------------

ACCEPTANCE: dict[int, str] = {}


def record(number: int, ok: bool, detail: str) -> str:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
