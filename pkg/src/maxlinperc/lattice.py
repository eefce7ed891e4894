"""Finite windows of the oriented square lattice and reachability on them.

Nodes are integer points ``(i1, i2)``. Every bond is oriented towards
increasing coordinates, either East ``(1, 0)`` or North ``(0, 1)``, so any
edge subset is acyclic.

Inside a :class:`Window` nodes and edges carry dense integer indices::

    node (x, y)  ->  x * H + y                       (x, y relative to min corner)
    East edge    ->  x * H + y                        for x < W - 1
    North edge   ->  (W - 1) * H + x * (H - 1) + y    for y < H - 1

Edge predicates are boolean masks over these edge indices; anything else
(a callable, a configuration, a collection of edges) is normalised with
:meth:`Window.mask`.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, NamedTuple, Union

import numpy as np


class OutOfWindowError(ValueError):
    """A node or edge lies outside the window it is queried against."""


class DomainError(ValueError):
    """A numeric argument is outside its admissible range."""


class StructuralError(ValueError):
    """A graph operation is impossible for the given node/edge structure."""


class LatticeNode(NamedTuple):
    i1: int
    i2: int


class Direction(enum.Enum):
    EAST = "E"
    NORTH = "N"

    @property
    def step(self) -> tuple[int, int]:
        return (1, 0) if self is Direction.EAST else (0, 1)


class LatticeEdge(NamedTuple):
    origin: LatticeNode
    direction: Direction

    @property
    def target(self) -> LatticeNode:
        d1, d2 = self.direction.step
        return LatticeNode(self.origin[0] + d1, self.origin[1] + d2)

    @classmethod
    def between(cls, a, b) -> "LatticeEdge":
        a, b = LatticeNode(*a), LatticeNode(*b)
        if (b[0] - a[0], b[1] - a[1]) == (1, 0):
            return cls(a, Direction.EAST)
        if (b[0] - a[0], b[1] - a[1]) == (0, 1):
            return cls(a, Direction.NORTH)
        raise StructuralError(f"no oriented lattice edge from {a} to {b}")


def delta(i, j) -> int:
    """Lattice (L1) distance between two nodes."""
    return abs(i[0] - j[0]) + abs(i[1] - j[1])


EdgePredicate = Union[np.ndarray, Callable[[LatticeEdge], bool], Iterable[LatticeEdge], None]


@dataclass(frozen=True)
class Window:
    min_corner: LatticeNode
    max_corner: LatticeNode

    def __post_init__(self):
        lo, hi = LatticeNode(*self.min_corner), LatticeNode(*self.max_corner)
        if lo[0] > hi[0] or lo[1] > hi[1]:
            raise DomainError(f"window corners out of order: {lo} > {hi}")
        object.__setattr__(self, "min_corner", lo)
        object.__setattr__(self, "max_corner", hi)

    @classmethod
    def square(cls, side: int, origin=(0, 0)) -> "Window":
        """``side x side`` window with the given lower-left corner."""
        if side < 1:
            raise DomainError("side must be positive")
        return cls(LatticeNode(*origin), LatticeNode(origin[0] + side - 1, origin[1] + side - 1))

    @classmethod
    def centered(cls, half: int) -> "Window":
        """The box ``B(half) = [-half, half]^2``."""
        if half < 0:
            raise DomainError("half-width must be non-negative")
        return cls(LatticeNode(-half, -half), LatticeNode(half, half))

    @classmethod
    def bounding(cls, nodes: Iterable) -> "Window":
        nodes = list(nodes)
        if not nodes:
            raise StructuralError("cannot bound an empty node set")
        return cls(
            LatticeNode(min(n[0] for n in nodes), min(n[1] for n in nodes)),
            LatticeNode(max(n[0] for n in nodes), max(n[1] for n in nodes)),
        )

    # -- geometry -----------------------------------------------------------
    @property
    def width(self) -> int:
        return self.max_corner[0] - self.min_corner[0] + 1

    @property
    def height(self) -> int:
        return self.max_corner[1] - self.min_corner[1] + 1

    @property
    def n_nodes(self) -> int:
        return self.width * self.height

    @property
    def n_east(self) -> int:
        return (self.width - 1) * self.height

    @property
    def n_edges(self) -> int:
        return self.n_east + self.width * (self.height - 1)

    @property
    def center(self) -> LatticeNode:
        return LatticeNode(
            (self.min_corner[0] + self.max_corner[0]) // 2,
            (self.min_corner[1] + self.max_corner[1]) // 2,
        )

    def contains(self, node) -> bool:
        return (
            self.min_corner[0] <= node[0] <= self.max_corner[0]
            and self.min_corner[1] <= node[1] <= self.max_corner[1]
        )

    def contains_edge(self, edge: LatticeEdge) -> bool:
        return self.contains(edge.origin) and self.contains(edge.target)

    def margin(self, node) -> int:
        """Smallest coordinate distance from ``node`` to the window boundary."""
        self._check(node)
        return min(
            node[0] - self.min_corner[0],
            self.max_corner[0] - node[0],
            node[1] - self.min_corner[1],
            self.max_corner[1] - node[1],
        )

    # -- indexing -----------------------------------------------------------
    def _check(self, node):
        if not self.contains(node):
            raise OutOfWindowError(f"node {tuple(node)} outside window {self}")

    def node_index(self, node) -> int:
        self._check(node)
        return (node[0] - self.min_corner[0]) * self.height + (node[1] - self.min_corner[1])

    def node_at(self, index: int) -> LatticeNode:
        x, y = divmod(int(index), self.height)
        return LatticeNode(self.min_corner[0] + x, self.min_corner[1] + y)

    def edge_index(self, edge: LatticeEdge) -> int:
        if not self.contains_edge(edge):
            raise OutOfWindowError(f"edge {edge} outside window {self}")
        x = edge.origin[0] - self.min_corner[0]
        y = edge.origin[1] - self.min_corner[1]
        if edge.direction is Direction.EAST:
            return x * self.height + y
        return self.n_east + x * (self.height - 1) + y

    def edge_at(self, index: int) -> LatticeEdge:
        index = int(index)
        if index < self.n_east:
            return LatticeEdge(self.node_at(index), Direction.EAST)
        x, y = divmod(index - self.n_east, self.height - 1)
        origin = LatticeNode(self.min_corner[0] + x, self.min_corner[1] + y)
        return LatticeEdge(origin, Direction.NORTH)

    def nodes(self) -> Iterator[LatticeNode]:
        for k in range(self.n_nodes):
            yield self.node_at(k)

    def edges(self) -> Iterator[LatticeEdge]:
        for e in range(self.n_edges):
            yield self.edge_at(e)

    def mask(self, predicate: EdgePredicate = None) -> np.ndarray:
        """Boolean edge mask for ``predicate``.

        ``None`` means the full lattice. Arrays are validated, callables are
        evaluated per edge, anything with an ``open_edges`` attribute (a bond
        configuration) contributes its mask, and other iterables are read as
        collections of open edges.
        """
        if predicate is None:
            return np.ones(self.n_edges, dtype=bool)
        mask = getattr(predicate, "open_edges", None)
        if mask is not None:
            if getattr(predicate, "window", self) != self:
                raise OutOfWindowError("configuration belongs to a different window")
            return np.asarray(mask, dtype=bool)
        if isinstance(predicate, np.ndarray):
            if predicate.shape != (self.n_edges,):
                raise StructuralError(f"mask shape {predicate.shape} != ({self.n_edges},)")
            return predicate.astype(bool, copy=False)
        if callable(predicate):
            return np.fromiter((bool(predicate(e)) for e in self.edges()), dtype=bool, count=self.n_edges)
        out = np.zeros(self.n_edges, dtype=bool)
        for edge in predicate:
            out[self.edge_index(LatticeEdge(LatticeNode(*edge[0]), Direction(edge[1])))] = True
        return out

    def __str__(self) -> str:
        return f"[{self.min_corner[0]},{self.max_corner[0]}]x[{self.min_corner[1]},{self.max_corner[1]}]"


# -- neighbourhoods -----------------------------------------------------------

def _in_edges(window: Window, node) -> list[tuple[LatticeNode, int]]:
    x = node[0] - window.min_corner[0]
    y = node[1] - window.min_corner[1]
    out = []
    if x > 0:
        out.append((LatticeNode(node[0] - 1, node[1]), (x - 1) * window.height + y))
    if y > 0:
        out.append((LatticeNode(node[0], node[1] - 1), window.n_east + x * (window.height - 1) + y - 1))
    return out


def _out_edges(window: Window, node) -> list[tuple[LatticeNode, int]]:
    x = node[0] - window.min_corner[0]
    y = node[1] - window.min_corner[1]
    out = []
    if x < window.width - 1:
        out.append((LatticeNode(node[0] + 1, node[1]), x * window.height + y))
    if y < window.height - 1:
        out.append((LatticeNode(node[0], node[1] + 1), window.n_east + x * (window.height - 1) + y))
    return out


def parents(i, window: Window, predicate: EdgePredicate = None) -> set[LatticeNode]:
    window._check(i)
    mask = window.mask(predicate)
    return {k for k, e in _in_edges(window, i) if mask[e]}


def children(i, window: Window, predicate: EdgePredicate = None) -> set[LatticeNode]:
    window._check(i)
    mask = window.mask(predicate)
    return {k for k, e in _out_edges(window, i) if mask[e]}


def _reach(i, window: Window, predicate, step) -> set[LatticeNode]:
    window._check(i)
    mask = window.mask(predicate)
    visited = np.zeros(window.n_nodes, dtype=bool)
    visited[window.node_index(i)] = True
    queue = deque([LatticeNode(*i)])
    found = set()
    while queue:
        u = queue.popleft()
        for v, e in step(window, u):
            if mask[e]:
                k = window.node_index(v)
                if not visited[k]:
                    visited[k] = True
                    found.add(v)
                    queue.append(v)
    return found


def ancestors(i, window: Window, predicate: EdgePredicate = None) -> set[LatticeNode]:
    """``an(i)``: nodes with an open directed path into ``i``, inside the window."""
    return _reach(i, window, predicate, _in_edges)


def descendants(i, window: Window, predicate: EdgePredicate = None) -> set[LatticeNode]:
    """``de(i)``: nodes reachable from ``i`` along open edges, inside the window."""
    return _reach(i, window, predicate, _out_edges)


def ancestors_closed(i, window: Window, predicate: EdgePredicate = None) -> set[LatticeNode]:
    return ancestors(i, window, predicate) | {LatticeNode(*i)}


def descendants_closed(i, window: Window, predicate: EdgePredicate = None) -> set[LatticeNode]:
    return descendants(i, window, predicate) | {LatticeNode(*i)}


def ancestor_bitsets(window: Window, predicate: EdgePredicate = None) -> list[int]:
    """Closed ancestor sets of every node as Python-int bitsets (full closure).

    Bit ``k`` of entry ``n`` is set iff node ``k`` is in ``An(node n)``. Nodes
    are visited in increasing ``i1 + i2`` so parents are always done first.
    """
    mask = window.mask(predicate)
    W, H = window.width, window.height
    sets = [0] * window.n_nodes
    for s in range(W + H - 1):
        for x in range(max(0, s - H + 1), min(W, s + 1)):
            y = s - x
            n = x * H + y
            bits = 1 << n
            if x > 0 and mask[(x - 1) * H + y]:
                bits |= sets[n - H]
            if y > 0 and mask[window.n_east + x * (H - 1) + y - 1]:
                bits |= sets[n - 1]
            sets[n] = bits
    return sets
