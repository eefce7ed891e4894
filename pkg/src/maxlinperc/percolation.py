"""Bernoulli bond percolation on a window of the oriented square lattice."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from . import _kernels
from .lattice import (
    DomainError,
    LatticeEdge,
    LatticeNode,
    OutOfWindowError,
    Window,
    descendants,
)
from .rng import chunks, trial_uniforms

CHUNK = 2048
ESTIMATORS = ("theta", "oriented_theta", "two_point")


@dataclass(frozen=True, eq=False)
class BondConfiguration:
    """One percolation sample: an open/closed state for every edge of ``window``."""

    window: Window
    open_edges: np.ndarray
    p: Optional[float] = None
    seed: Optional[int] = None

    def __post_init__(self):
        mask = np.asarray(self.open_edges, dtype=bool)
        if mask.shape != (self.window.n_edges,):
            raise ValueError(f"expected {self.window.n_edges} edge states, got {mask.shape}")
        mask.setflags(write=False)
        object.__setattr__(self, "open_edges", mask)

    def __call__(self, edge: LatticeEdge) -> bool:
        return bool(self.open_edges[self.window.edge_index(edge)])

    def __eq__(self, other):
        if not isinstance(other, BondConfiguration):
            return NotImplemented
        return self.window == other.window and np.array_equal(self.open_edges, other.open_edges)

    def edges(self) -> list[LatticeEdge]:
        return [self.window.edge_at(e) for e in np.flatnonzero(self.open_edges)]

    @property
    def n_open(self) -> int:
        return int(self.open_edges.sum())

    @classmethod
    def from_edges(cls, window: Window, edges: Iterable, **kw) -> "BondConfiguration":
        return cls(window, window.mask(list(edges)), **kw)

    @classmethod
    def full(cls, window: Window) -> "BondConfiguration":
        return cls(window, np.ones(window.n_edges, dtype=bool), p=1.0)

    @classmethod
    def empty(cls, window: Window) -> "BondConfiguration":
        return cls(window, np.zeros(window.n_edges, dtype=bool), p=0.0)


@dataclass(frozen=True)
class McEstimate:
    value: float
    stderr: float
    trials: int
    seed: int
    successes: Optional[int] = None

    @classmethod
    def from_outcomes(cls, outcomes, seed: int) -> "McEstimate":
        x = np.asarray(outcomes, dtype=np.float64)
        n = x.size
        if n == 0:
            raise DomainError("need at least one trial")
        mean = float(x.mean())
        sd = float(x.std(ddof=1)) if n > 1 else 0.0
        successes = int(x.sum()) if x.dtype == bool or np.all((x == 0) | (x == 1)) else None
        return cls(mean, sd / math.sqrt(n), n, seed, successes)


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path compression and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> int:
        a, b = self.find(a), self.find(b)
        if a == b:
            return a
        if self.size[a] < self.size[b]:
            a, b = b, a
        self.parent[b] = a
        self.size[a] += self.size[b]
        return a


# -- sampling -----------------------------------------------------------------

def check_probability(p: float, name: str = "p") -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0 or math.isnan(p):
        raise DomainError(f"{name} must lie in [0, 1], got {p}")
    return p


def forced_mask(window: Window, forced_open) -> np.ndarray:
    if forced_open is None:
        return np.zeros(window.n_edges, dtype=bool)
    if isinstance(forced_open, np.ndarray):
        return window.mask(forced_open)
    return window.mask(list(forced_open))


def open_masks(window: Window, p: float, seed: int, start: int, stop: int, forced=None) -> np.ndarray:
    """Open-edge masks for trials ``start..stop-1``; edge e is open iff ``U[t, e] < p``.

    The same uniforms are reused for every ``p``, so masks are nested in ``p``.
    """
    p = check_probability(p)
    masks = trial_uniforms(seed, window.n_edges, start, stop) < p
    if forced is not None:
        masks |= forced
    return masks


def sample_configuration(window: Window, p: float, seed: int, forced_open=None, trial: int = 0) -> BondConfiguration:
    """Sample ``omega`` under ``P_p`` (or ``P_p^H`` when ``forced_open`` lists E(H))."""
    forced = forced_mask(window, forced_open)
    mask = open_masks(window, p, seed, trial, trial + 1, forced)[0]
    return BondConfiguration(window, mask, p=float(p), seed=seed)


def map_trials(fn: Callable[[int, int], np.ndarray], trials: int, threads: int = 1, chunk: int = CHUNK) -> np.ndarray:
    """Evaluate ``fn(start, stop)`` over trial chunks and concatenate in trial order."""
    if trials < 1:
        raise DomainError(f"trials must be positive, got {trials}")
    ranges = list(chunks(trials, chunk))
    if threads > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda r: fn(*r), ranges))
    else:
        parts = [fn(a, b) for a, b in ranges]
    return np.concatenate(parts, axis=0)


# -- clusters -----------------------------------------------------------------

def _cluster_forest(cfg: BondConfiguration) -> UnionFind:
    w = cfg.window
    uf = UnionFind(w.n_nodes)
    for e in np.flatnonzero(cfg.open_edges):
        edge = w.edge_at(e)
        uf.union(w.node_index(edge.origin), w.node_index(edge.target))
    return uf


def open_cluster(k, cfg: BondConfiguration) -> set[LatticeNode]:
    """``C(k)``: nodes joined to ``k`` by open edges traversed in either direction."""
    w = cfg.window
    uf = _cluster_forest(cfg)
    root = uf.find(w.node_index(k))
    return {w.node_at(n) for n in range(w.n_nodes) if uf.find(n) == root}


def joint_cluster(i, j, cfg: BondConfiguration) -> set[LatticeNode]:
    """``C(i, j)``: the common open cluster of ``i`` and ``j``, empty if they are not connected."""
    w = cfg.window
    uf = _cluster_forest(cfg)
    a, b = uf.find(w.node_index(i)), uf.find(w.node_index(j))
    if a != b:
        return set()
    return {w.node_at(n) for n in range(w.n_nodes) if uf.find(n) == a}


def oriented_cluster(k, cfg: BondConfiguration) -> set[LatticeNode]:
    """``C->(k)``: ``k`` and everything reachable from it along open edges."""
    return descendants(k, cfg.window, cfg.open_edges) | {LatticeNode(*k)}


# -- estimators ---------------------------------------------------------------

def _origin(window: Window, origin) -> LatticeNode:
    origin = window.center if origin is None else LatticeNode(*origin)
    if not window.contains(origin):
        raise OutOfWindowError(f"origin {origin} outside window {window}")
    return origin


def _check_radius(window: Window, origin, radius: int, oriented: bool):
    if radius < 1:
        raise DomainError(f"radius must be positive, got {radius}")
    if oriented:
        room = min(window.max_corner[0] - origin[0], window.max_corner[1] - origin[1])
    else:
        room = window.margin(origin)
    if radius > room:
        raise DomainError(f"radius {radius} does not fit in window {window} around {tuple(origin)} (room {room})")


def _shell_outcomes(p, window, radius, trials, seed, origin, mode, target, threads):
    origin = _origin(window, origin)
    _check_radius(window, origin, radius, oriented=mode == 1)
    s = window.node_index(origin)
    t = -1 if target is None else window.node_index(target)
    W, H = window.width, window.height

    def run(a, b):
        return _kernels.batch_shell_hit(open_masks(window, p, seed, a, b), W, H, s, radius, mode, t)

    return map_trials(run, trials, threads)


def estimate_theta(p, window: Window, radius: int, trials: int, seed: int, origin=None, threads: int = 1) -> McEstimate:
    """Fraction of trials whose open cluster of ``origin`` reaches L-inf distance ``radius``.

    Finite-window proxy for ``P_p(|C(0)| = inf)``.
    """
    out = _shell_outcomes(p, window, radius, trials, seed, origin, 2, None, threads)
    return McEstimate.from_outcomes(out, seed)


def estimate_oriented_theta(p, window: Window, radius: int, trials: int, seed: int, origin=None, threads: int = 1) -> McEstimate:
    """As :func:`estimate_theta` for the oriented cluster ``C->(origin)``."""
    out = _shell_outcomes(p, window, radius, trials, seed, origin, 1, None, threads)
    return McEstimate.from_outcomes(out, seed)


def estimate_two_point(
    p, window: Window, radius: int, trials: int, seed: int, origin=None, offset=(1, 0), threads: int = 1
) -> McEstimate:
    """Proxy for ``P_p(|C(l, 0)| = inf)``: origin and ``origin + offset`` connected and reaching the shell."""
    o = _origin(window, origin)
    target = LatticeNode(o[0] + offset[0], o[1] + offset[1])
    if not window.contains(target):
        raise OutOfWindowError(f"two-point target {target} outside window")
    out = _shell_outcomes(p, window, radius, trials, seed, o, 2, target, threads)
    return McEstimate.from_outcomes(out, seed)


_ESTIMATOR_FUNCS = {
    "theta": estimate_theta,
    "oriented_theta": estimate_oriented_theta,
    "two_point": estimate_two_point,
}


def estimator(name: str) -> Callable[..., McEstimate]:
    try:
        return _ESTIMATOR_FUNCS[name]
    except KeyError:
        raise DomainError(f"unknown estimator {name!r}; choose from {ESTIMATORS}") from None


def cluster_sizes(p, window: Window, trials: int, seed: int, origin=None, oriented: bool = False, threads: int = 1) -> np.ndarray:
    """``|C(origin)|`` (or ``|C->(origin)|``) per trial, truncated to the window."""
    origin = _origin(window, origin)
    s = window.node_index(origin)
    mode = 1 if oriented else 2

    def run(a, b):
        return _kernels.batch_cluster_size(open_masks(window, p, seed, a, b), window.width, window.height, s, mode)

    return map_trials(run, trials, threads)


@dataclass
class CriticalInterval:
    lo: float
    hi: float
    estimator: str
    threshold: float
    evaluations: list = field(default_factory=list)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, p: float) -> bool:
        return self.lo <= p <= self.hi

    def intersects(self, lo: float, hi: float) -> bool:
        return self.lo <= hi and lo <= self.hi


def estimate_critical(
    name: str,
    window: Window,
    radius: int,
    trials: int,
    seed: int,
    tolerance: float = 0.01,
    threshold: float = 0.02,
    bounds=(0.0, 1.0),
    threads: int = 1,
    **kw,
) -> CriticalInterval:
    """Bisect ``p`` on ``estimate > threshold`` until the bracket is at most ``tolerance`` wide.

    Every evaluation reuses ``seed``; with edge-coupled sampling the estimate
    is then exactly non-decreasing in ``p``. A decrease larger than two
    standard errors among the evaluations is reported as a warning.
    """
    if tolerance <= 0:
        raise DomainError("tolerance must be positive")
    fn = estimator(name)
    lo, hi = (check_probability(b, "bound") for b in bounds)
    result = CriticalInterval(lo, hi, name, threshold)
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        est = fn(mid, window, radius, trials, seed, threads=threads, **kw)
        result.evaluations.append((mid, est))
        if est.value > threshold:
            hi = mid
        else:
            lo = mid
    result.lo, result.hi = lo, hi
    evals = sorted(result.evaluations, key=lambda t: t[0])
    for (p1, e1), (p2, e2) in zip(evals, evals[1:]):
        if e2.value < e1.value - 2 * math.hypot(e1.stderr, e2.stderr):
            warnings.warn(f"{name}: estimate drops from {e1.value:.4f} at p={p1:.4f} to {e2.value:.4f} at p={p2:.4f}")
    return result


def sweep_rows(name: str, p_grid, window: Window, radius: int, trials: int, seed: int, threads: int = 1, **kw) -> list[dict]:
    """One CSV row per ``p``: p, estimator, window, radius, trials, value, stderr, seed."""
    fn = estimator(name)
    rows = []
    for p in p_grid:
        est = fn(p, window, radius, trials, seed, threads=threads, **kw)
        rows.append(
            dict(p=p, estimator=name, window=str(window), radius=radius, trials=trials,
                 value=est.value, stderr=est.stderr, seed=seed)
        )
    return rows
