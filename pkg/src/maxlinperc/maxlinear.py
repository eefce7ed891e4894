"""Recursive max-linear models on weighted sub-DAGs of the oriented lattice.

A model on a DAG with node weights ``c_ii > 0`` and edge weights ``c_ki > 0``
is the structural recursion::

    X_i = max( max_{k in pa(i)} c_ki X_k ,  c_ii Z_i )

with independent standard alpha-Frechet noise ``Z``. Unrolled, it reads
``X_i = max_{j in An(i)} b_ji Z_j`` where ``b_ji`` is ``c_jj`` times the
largest edge-weight product over directed paths ``j -> i``. Path products
are handled as sums of logs, so the path analysis is a max-plus dynamic
programme.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .lattice import (
    Direction,
    DomainError,
    LatticeEdge,
    LatticeNode,
    OutOfWindowError,
    StructuralError,
    Window,
)
from .rng import trial_open_uniforms

Weight = Union[float, Mapping, Callable]


def _topo_key(n) -> tuple[int, int, int]:
    return (n[0] + n[1], n[0], n[1])


def _positive(w, what) -> float:
    w = float(w)
    if not (w > 0.0 and math.isfinite(w)):
        raise DomainError(f"{what} must be positive and finite, got {w}")
    return w


def _resolve(weight: Weight, key, default: float = 1.0) -> float:
    if weight is None:
        return default
    if callable(weight):
        return weight(key)
    if isinstance(weight, Mapping):
        return weight.get(key, default)
    return weight


@dataclass(frozen=True, eq=False)
class WeightedDag:
    """Sub-DAG of the lattice with positive node and edge weights.

    The node set is the key set of ``node_weight`` and the edge set the key
    set of ``edge_weight``; ``window`` only bounds them.
    """

    window: Window
    node_weight: Mapping[LatticeNode, float]
    edge_weight: Mapping[LatticeEdge, float]
    _parents: dict = field(init=False, repr=False)
    _children: dict = field(init=False, repr=False)

    def __post_init__(self):
        nodes = {LatticeNode(*n): _positive(w, f"node weight c{tuple(n)}") for n, w in self.node_weight.items()}
        edges = {}
        for e, w in self.edge_weight.items():
            e = LatticeEdge(LatticeNode(*e[0]), Direction(e[1]))
            edges[e] = _positive(w, f"edge weight on {e.origin}->{e.target}")
        for n in nodes:
            if not self.window.contains(n):
                raise OutOfWindowError(f"node {n} outside window {self.window}")
        parents = {n: [] for n in nodes}
        children = {n: [] for n in nodes}
        for e, w in edges.items():
            if e.origin not in nodes or e.target not in nodes:
                raise StructuralError(f"edge {e.origin}->{e.target} leaves the node set")
            parents[e.target].append((e.origin, w))
            children[e.origin].append((e.target, w))
        for lst in (*parents.values(), *children.values()):
            lst.sort()
        object.__setattr__(self, "node_weight", nodes)
        object.__setattr__(self, "edge_weight", edges)
        object.__setattr__(self, "_parents", parents)
        object.__setattr__(self, "_children", children)

    # -- construction ---------------------------------------------------------
    @classmethod
    def from_edges(
        cls,
        edges: Iterable,
        nodes: Optional[Iterable] = None,
        node_weight: Weight = 1.0,
        edge_weight: Weight = 1.0,
        window: Optional[Window] = None,
    ) -> "WeightedDag":
        edges = [e if isinstance(e, LatticeEdge) else LatticeEdge(LatticeNode(*e[0]), Direction(e[1])) for e in edges]
        if nodes is None:
            nodes = {n for e in edges for n in (e.origin, e.target)}
        nodes = sorted({LatticeNode(*n) for n in nodes}, key=_topo_key)
        if window is None:
            window = Window.bounding(nodes)
        return cls(
            window,
            {n: _resolve(node_weight, n) for n in nodes},
            {e: _resolve(edge_weight, e) for e in edges},
        )

    @classmethod
    def from_configuration(cls, cfg, node_weight: Weight = 1.0, edge_weight: Weight = 1.0, nodes=None) -> "WeightedDag":
        """Weighted DAG on the open edges of a bond configuration (all window nodes by default)."""
        w = cfg.window
        nodes = list(w.nodes()) if nodes is None else nodes
        return cls.from_edges(cfg.edges(), nodes, node_weight, edge_weight, window=w)

    # -- structure ------------------------------------------------------------
    @property
    def nodes(self) -> list[LatticeNode]:
        """Nodes in topological (diagonal, then lexicographic) order."""
        return sorted(self.node_weight, key=_topo_key)

    def parents(self, i) -> list[tuple[LatticeNode, float]]:
        return self._parents[LatticeNode(*i)]

    def children(self, i) -> list[tuple[LatticeNode, float]]:
        return self._children[LatticeNode(*i)]

    def ancestors_closed(self, i) -> set[LatticeNode]:
        i = LatticeNode(*i)
        if i not in self.node_weight:
            raise StructuralError(f"{i} is not a node of the DAG")
        seen, stack = {i}, [i]
        while stack:
            for k, _ in self._parents[stack.pop()]:
                if k not in seen:
                    seen.add(k)
                    stack.append(k)
        return seen

    def descendants_closed(self, i) -> set[LatticeNode]:
        i = LatticeNode(*i)
        seen, stack = {i}, [i]
        while stack:
            for k, _ in self._children[stack.pop()]:
                if k not in seen:
                    seen.add(k)
                    stack.append(k)
        return seen

    def with_edge_weight(self, edge: LatticeEdge, weight: float) -> "WeightedDag":
        ew = dict(self.edge_weight)
        if edge not in ew:
            raise StructuralError(f"{edge} is not an edge of the DAG")
        ew[edge] = weight
        return WeightedDag(self.window, self.node_weight, ew)


# -- coefficient matrix ---------------------------------------------------------

@dataclass(frozen=True)
class CoefficientMatrix:
    """Sparse max-linear coefficients ``b_ji`` (``j`` an ancestor of target ``i``).

    ``log_entries[(j, i)]`` is ``log b_ji``; ``successor[(j, i)]`` is the node
    after ``j`` on a maximising path to ``i`` (``None`` when ``j == i``).
    """

    nodes: tuple[LatticeNode, ...]
    targets: tuple[LatticeNode, ...]
    log_entries: Mapping[tuple[LatticeNode, LatticeNode], float]
    successor: Mapping[tuple[LatticeNode, LatticeNode], Optional[LatticeNode]]

    def b(self, j, i) -> float:
        v = self.log_entries.get((LatticeNode(*j), LatticeNode(*i)))
        return 0.0 if v is None else math.exp(v)

    @property
    def entries(self) -> dict[tuple[LatticeNode, LatticeNode], float]:
        return {k: math.exp(v) for k, v in self.log_entries.items()}

    def sources(self, i) -> list[LatticeNode]:
        i = LatticeNode(*i)
        return sorted(j for (j, t) in self.log_entries if t == i)

    def support(self) -> frozenset[tuple[LatticeNode, LatticeNode]]:
        return frozenset(self.log_entries)

    def path(self, j, i) -> list[LatticeNode]:
        """A maximising directed path from ``j`` to ``i``."""
        j, i = LatticeNode(*j), LatticeNode(*i)
        if (j, i) not in self.successor:
            raise StructuralError(f"{j} is not an ancestor of {i}")
        out = [j]
        while out[-1] != i:
            out.append(self.successor[(out[-1], i)])
        return out

    def dense(self, order: Optional[Sequence] = None) -> np.ndarray:
        """Matrix with ``b_ji`` in row ``j``, column ``i`` (zeros off the support)."""
        order = [LatticeNode(*n) for n in (order or self.nodes)]
        pos = {n: k for k, n in enumerate(order)}
        out = np.zeros((len(order), len(order)))
        for (j, i), v in self.log_entries.items():
            if j in pos and i in pos:
                out[pos[j], pos[i]] = math.exp(v)
        return out

    def triplets(self) -> list[tuple[LatticeNode, LatticeNode, float]]:
        keys = sorted(self.log_entries, key=lambda k: (_topo_key(k[1]), _topo_key(k[0])))
        return [(j, i, math.exp(self.log_entries[(j, i)])) for j, i in keys]


def coefficient_matrix(dag: WeightedDag, targets: Optional[Iterable] = None) -> CoefficientMatrix:
    """Path analysis ``b_ji = c_jj * max_paths prod c_kl`` by a backward max-plus DP per target."""
    nodes = tuple(dag.nodes)
    targets = nodes if targets is None else tuple(LatticeNode(*t) for t in targets)
    log_c = {e: math.log(w) for e, w in dag.edge_weight.items()}
    logs, succ = {}, {}
    for i in targets:
        cone = sorted(dag.ancestors_closed(i), key=_topo_key, reverse=True)
        to_i = {i: 0.0}  # best log edge product from a node to i
        nxt = {i: None}
        for k in cone[1:]:
            best, arg = -math.inf, None
            for l, _ in dag.children(k):
                if l in to_i:
                    v = log_c[LatticeEdge.between(k, l)] + to_i[l]
                    if v > best:
                        best, arg = v, l
            to_i[k], nxt[k] = best, arg
        for j in cone:
            logs[(j, i)] = math.log(dag.node_weight[j]) + to_i[j]
            succ[(j, i)] = nxt[j]
    return CoefficientMatrix(nodes, targets, logs, succ)


# -- noise and realisations --------------------------------------------------------

class NoiseKind(enum.Enum):
    STANDARD_FRECHET = "standard_frechet"


@dataclass(frozen=True)
class NoiseSpec:
    alpha: float = 1.0
    kind: NoiseKind = NoiseKind.STANDARD_FRECHET

    def __post_init__(self):
        _positive(self.alpha, "alpha")

    def from_uniforms(self, u: np.ndarray) -> np.ndarray:
        """Inverse transform ``Z = (-log U)^(-1/alpha)`` for ``U`` in (0, 1)."""
        return (-np.log(u)) ** (-1.0 / self.alpha)


@dataclass(frozen=True)
class Realization:
    values: dict[LatticeNode, float]
    noise: dict[LatticeNode, float]
    seed: int

    def replay(self, coeff: CoefficientMatrix) -> dict[LatticeNode, float]:
        """Recompute ``X_i = max_j b_ji Z_j`` from the stored noise."""
        return {i: max(coeff.b(j, i) * self.noise[j] for j in coeff.sources(i)) for i in coeff.targets}


def frechet_noise(nodes: Sequence, noise: NoiseSpec, seed: int, trials: int = 1, start: int = 0) -> np.ndarray:
    """Noise array of shape ``(trials, len(nodes))``; column ``k`` belongs to ``nodes[k]``."""
    return noise.from_uniforms(trial_open_uniforms(seed, len(nodes), start, start + trials))


def realize(dag: WeightedDag, noise: NoiseSpec, seed: int, method: str = "recursive", trial: int = 0) -> Realization:
    """One realisation; ``method`` picks the structural recursion or the coefficient matrix."""
    nodes = dag.nodes
    z = dict(zip(nodes, frechet_noise(nodes, noise, seed, 1, trial)[0].tolist()))
    if method == "recursive":
        x = {}
        for i in nodes:
            v = dag.node_weight[i] * z[i]
            for k, c in dag.parents(i):
                v = max(v, c * x[k])
            x[i] = v
    elif method == "matrix":
        coeff = coefficient_matrix(dag)
        x = {i: max(coeff.b(j, i) * z[j] for j in coeff.sources(i)) for i in nodes}
    else:
        raise ValueError(f"unknown method {method!r}")
    return Realization(x, z, seed)


@dataclass(frozen=True)
class RealizationBatch:
    targets: tuple[LatticeNode, ...]
    values: np.ndarray   # (trials, len(targets))
    argmax: np.ndarray   # index into ``nodes`` of the noise attaining each maximum
    nodes: tuple[LatticeNode, ...]
    seed: int

    def column(self, i) -> np.ndarray:
        return self.values[:, self.targets.index(LatticeNode(*i))]

    def same_argmax_frequency(self, i, j) -> float:
        a = self.targets.index(LatticeNode(*i))
        b = self.targets.index(LatticeNode(*j))
        return float(np.mean(self.argmax[:, a] == self.argmax[:, b]))


def realize_many(
    dag: WeightedDag, noise: NoiseSpec, trials: int, seed: int, targets: Optional[Iterable] = None
) -> RealizationBatch:
    """Vectorised realisations through the coefficient matrix.

    Ties in the maximum go to the lexicographically smallest ancestor.
    """
    nodes = tuple(dag.nodes)
    targets = nodes if targets is None else tuple(LatticeNode(*t) for t in targets)
    coeff = coefficient_matrix(dag, targets)
    pos = {n: k for k, n in enumerate(nodes)}
    z = frechet_noise(nodes, noise, seed, trials)
    values = np.empty((trials, len(targets)))
    argmax = np.empty((trials, len(targets)), dtype=np.int64)
    for col, i in enumerate(targets):
        src = coeff.sources(i)
        idx = np.array([pos[j] for j in src])
        b = np.array([coeff.b(j, i) for j in src])
        m = z[:, idx] * b
        k = m.argmax(axis=1)
        values[:, col] = m[np.arange(trials), k]
        argmax[:, col] = idx[k]
    return RealizationBatch(targets, values, argmax, nodes, seed)


# -- distributional quantities ----------------------------------------------------

def joint_cdf(coeff: CoefficientMatrix, targets: Sequence, x: Sequence[float], alpha: float) -> float:
    """``P(X_t1 <= x_1, ..., X_td <= x_d)`` for standard alpha-Frechet noise."""
    alpha = _positive(alpha, "alpha")
    targets = [LatticeNode(*t) for t in targets]
    if len(targets) != len(x):
        raise DomainError("targets and x differ in length")
    for t in targets:
        if t not in coeff.targets:
            raise StructuralError(f"{t} is not a target of the coefficient matrix")
    x = [float(v) for v in x]
    if any(not v > 0 for v in x):
        raise DomainError(f"all x must be positive, got {x}")
    terms = {}
    for t, xt in zip(targets, x):
        for j in coeff.sources(t):
            r = (coeff.b(j, t) / xt) ** alpha
            if r > terms.get(j, 0.0):
                terms[j] = r
    return math.exp(-math.fsum(terms.values()))


def scale_parameter(coeff: CoefficientMatrix, i, alpha: float) -> float:
    """Frechet scale ``(sum_j b_ji^alpha)^(1/alpha)`` of ``X_i``."""
    alpha = _positive(alpha, "alpha")
    src = coeff.sources(i)
    if not src:
        raise StructuralError(f"{tuple(i)} is not a target of the coefficient matrix")
    return math.fsum(coeff.b(j, i) ** alpha for j in src) ** (1.0 / alpha)


# -- max-weighted models -------------------------------------------------------------

@dataclass(frozen=True)
class MaxWeightedCheck:
    ok: bool
    witness: Optional[tuple[list[LatticeNode], list[LatticeNode]]] = None
    log_gap: float = 0.0

    def __bool__(self) -> bool:
        return self.ok


def _path_extremes(dag: WeightedDag, j: LatticeNode):
    # Largest/smallest log edge products from j to each descendant, with predecessors.
    cone = sorted(dag.descendants_closed(j), key=_topo_key)
    hi, lo, phi, plo = {j: 0.0}, {j: 0.0}, {j: None}, {j: None}
    for i in cone[1:]:
        best, worst, bi, wi = -math.inf, math.inf, None, None
        for k, c in dag.parents(i):
            if k in hi:
                lc = math.log(c)
                if hi[k] + lc > best:
                    best, bi = hi[k] + lc, k
                if lo[k] + lc < worst:
                    worst, wi = lo[k] + lc, k
        hi[i], lo[i], phi[i], plo[i] = best, worst, bi, wi
    return cone, hi, lo, phi, plo


def _trace(pred, i) -> list[LatticeNode]:
    out = [i]
    while pred[out[-1]] is not None:
        out.append(pred[out[-1]])
    return out[::-1]


def is_max_weighted(dag: WeightedDag, tol: float = 1e-9) -> MaxWeightedCheck:
    """True iff all directed paths between every ancestor/descendant pair have equal weight products.

    Products are compared as logs with tolerance ``tol * (1 + |log product|)``.
    On failure the witness holds a heaviest and a lightest path for the pair.
    """
    for j in dag.nodes:
        cone, hi, lo, phi, plo = _path_extremes(dag, j)
        for i in cone[1:]:
            gap = hi[i] - lo[i]
            if gap > tol * (1.0 + abs(hi[i])):
                return MaxWeightedCheck(False, (_trace(phi, i), _trace(plo, i)), gap)
    return MaxWeightedCheck(True)


def root_log_distance(dag: WeightedDag, root, node) -> float:
    """``log d(root, node)``: the largest log edge product over paths ``root -> node``."""
    root, node = LatticeNode(*root), LatticeNode(*node)
    _, hi, _, _, _ = _path_extremes(dag, root)
    if node not in hi:
        raise StructuralError(f"{node} is not reachable from {root}")
    return hi[node]


def extend_max_weighted(dag: WeightedDag, new_node, c_vertical: float, c_node: float = 1.0) -> WeightedDag:
    """Add ``new_node`` to a max-weighted DAG on the quadrant so it stays max-weighted.

    With parents ``w = (l1-1, l2)`` and ``s = (l1, l2-1)`` the North edge
    ``s -> new`` gets ``c_vertical`` and the East edge ``w -> new`` gets
    ``c_vertical * d(0, s) / d(0, w)``, which equalises the two root paths.
    A node on an axis has a single parent edge, weighted ``c_vertical``.
    """
    new = LatticeNode(*new_node)
    c_vertical = _positive(c_vertical, "c_vertical")
    c_node = _positive(c_node, "c_node")
    if new[0] < 0 or new[1] < 0:
        raise StructuralError(f"{new} lies outside the quadrant N0^2")
    if new in dag.node_weight:
        raise StructuralError(f"{new} is already a node")
    west = LatticeNode(new[0] - 1, new[1]) if new[0] > 0 else None
    south = LatticeNode(new[0], new[1] - 1) if new[1] > 0 else None
    present = [k for k in (west, south) if k is not None]
    missing = [k for k in present if k not in dag.node_weight]
    if missing or not present:
        raise StructuralError(f"cannot attach {new}: parents {missing or 'none'} missing")
    nw = dict(dag.node_weight)
    ew = dict(dag.edge_weight)
    nw[new] = c_node
    if west is not None and south is not None:
        root = LatticeNode(0, 0)
        ratio = root_log_distance(dag, root, south) - root_log_distance(dag, root, west)
        ew[LatticeEdge(south, Direction.NORTH)] = c_vertical
        ew[LatticeEdge(west, Direction.EAST)] = c_vertical * math.exp(ratio)
    elif south is not None:
        ew[LatticeEdge(south, Direction.NORTH)] = c_vertical
    else:
        ew[LatticeEdge(west, Direction.EAST)] = c_vertical
    return WeightedDag(Window.bounding(nw), nw, ew)


def diagonal_order(start: int = 2):
    """Quadrant nodes ``(a, s - a)`` for ``s = start, start + 1, ...``, ``a`` ascending."""
    s = start
    while True:
        for a in range(s + 1):
            yield LatticeNode(a, s - a)
        s += 1


def grow_max_weighted(steps: int, seed: int, low: float = 0.5, high: float = 2.0) -> WeightedDag:
    """``V_1`` with random weights in ``[low, high)``, then ``steps`` extensions in diagonal order.

    Node weights and vertical (or axis) edge weights are drawn from the same
    seeded generator; the remaining East weights come from the extension rule.
    """
    if steps < 0:
        raise DomainError("steps must be non-negative")
    if not 0 < low < high:
        raise DomainError("need 0 < low < high")
    rng = np.random.default_rng(seed)
    draw = lambda: float(rng.uniform(low, high))
    o, e, n = LatticeNode(0, 0), LatticeNode(1, 0), LatticeNode(0, 1)
    dag = WeightedDag(
        Window.bounding([o, e, n]),
        {o: draw(), e: draw(), n: draw()},
        {LatticeEdge(o, Direction.EAST): draw(), LatticeEdge(o, Direction.NORTH): draw()},
    )
    order = diagonal_order(2)
    for _ in range(steps):
        dag = extend_max_weighted(dag, next(order), draw(), draw())
    return dag


def quadrant_dag(n: int, node_weight: Weight = 1.0, edge_weight: Weight = 1.0) -> WeightedDag:
    """Full lattice DAG on ``V_n = {i in N0^2 : i1 + i2 <= n}``."""
    nodes = [LatticeNode(a, s - a) for s in range(n + 1) for a in range(s + 1)]
    nodeset = set(nodes)
    edges = [
        LatticeEdge(v, d)
        for v in nodes
        for d in Direction
        if LatticeEdge(v, d).target in nodeset
    ]
    return WeightedDag.from_edges(edges, nodes, node_weight, edge_weight)


# -- zero patterns -------------------------------------------------------------------

class ZeroPattern(enum.Enum):
    STRICTLY_COARSER = "strictly_coarser"
    STRICTLY_FINER = "strictly_finer"
    EQUAL = "equal"
    INCOMPARABLE = "incomparable"


def compare_zero_pattern(b1: CoefficientMatrix, b2: CoefficientMatrix) -> ZeroPattern:
    """Compare supports: ``STRICTLY_COARSER`` means every non-zero of ``b1`` is non-zero in
    ``b2`` and ``b2`` has at least one more."""
    if set(b1.nodes) != set(b2.nodes):
        raise DomainError("coefficient matrices are indexed by different node sets")
    s1, s2 = b1.support(), b2.support()
    if s1 == s2:
        return ZeroPattern.EQUAL
    if s1 < s2:
        return ZeroPattern.STRICTLY_COARSER
    if s2 < s1:
        return ZeroPattern.STRICTLY_FINER
    return ZeroPattern.INCOMPARABLE
