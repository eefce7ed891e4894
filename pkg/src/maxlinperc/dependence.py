"""Dependence of max-linear variables on percolation-generated DAGs.

Two variables ``X_i`` and ``X_j`` of a recursive max-linear model are
independent exactly when ``An(i)`` and ``An(j)`` are disjoint, so every
probability here is a probability of a connectivity event of the bond
configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np

from . import _kernels
from .lattice import (
    Direction,
    DomainError,
    LatticeEdge,
    LatticeNode,
    OutOfWindowError,
    StructuralError,
    Window,
    ancestor_bitsets,
    ancestors_closed,
    descendants_closed,
)
from .percolation import (
    BondConfiguration,
    McEstimate,
    UnionFind,
    check_probability,
    forced_mask,
    map_trials,
    open_masks,
    sample_configuration,
)
from .rng import trial_uniforms

_BACK, _FORWARD = 0, 1
MAX_FREE_EDGES = 24


# -- sub-DAGs ------------------------------------------------------------------

@dataclass(frozen=True)
class SubDag:
    """``H = (V(H), E(H))``; every edge must join two nodes of ``V(H)``."""

    nodes: frozenset
    edges: frozenset = frozenset()

    def __post_init__(self):
        nodes = frozenset(LatticeNode(*n) for n in self.nodes)
        edges = frozenset(
            e if isinstance(e, LatticeEdge) else LatticeEdge(LatticeNode(*e[0]), Direction(e[1])) for e in self.edges
        )
        for e in edges:
            if e.origin not in nodes or e.target not in nodes:
                raise StructuralError(f"edge {e.origin}->{e.target} of H leaves V(H)")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", edges)

    def forced(self, window: Window) -> np.ndarray:
        for n in self.nodes:
            if not window.contains(n):
                raise OutOfWindowError(f"H node {n} outside window {window}")
        try:
            return window.mask(list(self.edges))
        except OutOfWindowError as err:
            raise DomainError(str(err)) from None

    @classmethod
    def pair(cls, i, j) -> "SubDag":
        """``V(H) = {i, j}``, ``E(H)`` empty."""
        return cls(frozenset({LatticeNode(*i), LatticeNode(*j)}))

    @classmethod
    def north_columns(cls, window: Window) -> "SubDag":
        """Every node of the window and every North edge: each component is a full column."""
        return cls(frozenset(window.nodes()), frozenset(e for e in window.edges() if e.direction is Direction.NORTH))

    @classmethod
    def barrier(cls, window: Window, i, k) -> "SubDag":
        """All window edges except those touching the half-lines ``{(k1 +- 1, i2 - n) : n >= 0}``."""
        bad = lambda v: abs(v[0] - k[0]) == 1 and v[1] <= i[1]
        return cls(
            frozenset(window.nodes()),
            frozenset(e for e in window.edges() if not bad(e.origin) and not bad(e.target)),
        )


# -- single-configuration events --------------------------------------------------

def common_ancestors(i, j, cfg: BondConfiguration) -> set[LatticeNode]:
    return ancestors_closed(i, cfg.window, cfg) & ancestors_closed(j, cfg.window, cfg)


def common_descendants(i, j, cfg: BondConfiguration) -> set[LatticeNode]:
    return descendants_closed(i, cfg.window, cfg) & descendants_closed(j, cfg.window, cfg)


def are_dependent(i, j, cfg: BondConfiguration) -> bool:
    """``X_i`` and ``X_j`` dependent, i.e. ``An(i) & An(j)`` non-empty."""
    return bool(common_ancestors(i, j, cfg))


def sigma_event(i, j, cfg: BondConfiguration) -> bool:
    """Common ancestors or common descendants."""
    return bool(common_ancestors(i, j, cfg)) or bool(common_descendants(i, j, cfg))


def enlargement_of(H: SubDag, cfg: BondConfiguration) -> BondConfiguration:
    """``U(H)`` inside ``cfg``: ``E(H)`` plus the open edges of the clusters of ``V(H)``.

    ``cfg`` is expected to have ``E(H)`` open already (a ``P_p^H`` sample).
    """
    w = cfg.window
    forced = H.forced(w)
    mask = cfg.open_edges | forced
    uf = UnionFind(w.n_nodes)
    for e in np.flatnonzero(mask):
        edge = w.edge_at(e)
        uf.union(w.node_index(edge.origin), w.node_index(edge.target))
    roots = {uf.find(w.node_index(n)) for n in H.nodes}
    keep = np.array(
        [mask[e] and uf.find(w.node_index(w.edge_at(e).origin)) in roots for e in range(w.n_edges)], dtype=bool
    )
    return BondConfiguration(w, keep | forced, p=cfg.p, seed=cfg.seed)


def enlarged_nodes(H: SubDag, enlarged: BondConfiguration) -> set[LatticeNode]:
    """``V(U(H))``: ``V(H)`` plus every endpoint of an edge of ``U(H)``."""
    out = set(H.nodes)
    for e in enlarged.edges():
        out.update((e.origin, e.target))
    return out


def enlarge(H: SubDag, p: float, seed: int, window: Window, trial: int = 0) -> BondConfiguration:
    """Sample ``omega ~ P_p^H`` on ``window`` and return ``U(H)`` as a configuration."""
    forced = H.forced(window)
    cfg = sample_configuration(window, p, seed, forced, trial=trial)
    return enlargement_of(H, cfg)


# -- Monte Carlo -----------------------------------------------------------------

@dataclass(frozen=True)
class DependenceQuery:
    i: LatticeNode
    j: LatticeNode
    window: Window
    p: float
    trials: int
    seed: int
    forced_open: frozenset = frozenset()

    def __post_init__(self):
        i, j = LatticeNode(*self.i), LatticeNode(*self.j)
        if i == j:
            raise DomainError("i and j must differ")
        for n in (i, j):
            if not self.window.contains(n):
                raise OutOfWindowError(f"{n} outside window {self.window}")
        check_probability(self.p)
        if self.trials < 1:
            raise DomainError("trials must be positive")
        object.__setattr__(self, "i", i)
        object.__setattr__(self, "j", j)


def pair_outcomes(
    window: Window, p: float, seed: int, trials: int, pairs: Sequence, mode: int = _BACK, forced=None, threads: int = 1
) -> np.ndarray:
    """Per-trial indicators (trials x pairs) of meeting closed ancestor (mode 0) or descendant (mode 1) sets."""
    idx = np.array([[window.node_index(a), window.node_index(b)] for a, b in pairs], dtype=np.int64).reshape(-1, 2)
    fm = None if forced is None else forced_mask(window, forced)
    W, H = window.width, window.height

    def run(a, b):
        return _kernels.batch_meets(open_masks(window, p, seed, a, b, fm), W, H, idx, mode)

    return map_trials(run, trials, threads)


def estimate_dependence_probability(q: DependenceQuery, threads: int = 1) -> McEstimate:
    """Frequency of ``An(i) & An(j) != {}`` over ``P_p^H`` samples (``H`` = ``q.forced_open``)."""
    forced = list(q.forced_open) if q.forced_open else None
    out = pair_outcomes(q.window, q.p, q.seed, q.trials, [(q.i, q.j)], _BACK, forced, threads)[:, 0]
    return McEstimate.from_outcomes(out, q.seed)


def sigma_outcomes(window: Window, p: float, seed: int, trials: int, pairs, forced=None, threads: int = 1):
    """``(dependent, sigma)`` per-trial indicator arrays, from the same samples."""
    dep = pair_outcomes(window, p, seed, trials, pairs, _BACK, forced, threads)
    desc = pair_outcomes(window, p, seed, trials, pairs, _FORWARD, forced, threads)
    return dep, dep | desc


def estimate_enlargement_probability(
    H: SubDag, i, j, p: float, window: Window, trials: int, seed: int, threads: int = 1
) -> McEstimate:
    """``P_p(U(H) in P)``, building ``U(H)`` explicitly in every trial."""
    i, j = LatticeNode(*i), LatticeNode(*j)
    if i not in H.nodes or j not in H.nodes:
        raise StructuralError("i and j must be nodes of H")
    fm = H.forced(window)
    sources = np.array(sorted(window.node_index(n) for n in H.nodes), dtype=np.int64)
    idx = np.array([[window.node_index(i), window.node_index(j)]], dtype=np.int64)
    W, Hh = window.width, window.height

    def run(a, b):
        return _kernels.batch_enlarged_meets(open_masks(window, p, seed, a, b, fm), W, Hh, sources, idx)

    out = map_trials(run, trials, threads)[:, 0]
    return McEstimate.from_outcomes(out, seed)


@dataclass(frozen=True)
class SigmaBoundReport:
    lhs: float
    rhs: float
    stderr: float
    trials: int
    seed: int

    @property
    def difference(self) -> float:
        return self.lhs - self.rhs

    @property
    def passed(self) -> bool:
        return self.lhs >= self.rhs - 4.0 * self.stderr


def sigma_bound_rhs(p_sigma: float) -> float:
    return 1.0 - math.sqrt(max(0.0, 1.0 - p_sigma))


def check_sigma_bound(i, j, p: float, window: Window, trials: int, seed: int, threads: int = 1) -> SigmaBoundReport:
    """Estimate both sides of ``P(dependent) >= 1 - (1 - P(Sigma))^(1/2)`` on shared trials.

    The standard error of ``lhs - rhs`` uses the delta method on the per-trial
    pair ``(dependent, Sigma)``.
    """
    dep, sig = sigma_outcomes(window, p, seed, trials, [(LatticeNode(*i), LatticeNode(*j))], None, threads)
    d, s = dep[:, 0].astype(float), sig[:, 0].astype(float)
    ps = s.mean()
    lhs, rhs = d.mean(), sigma_bound_rhs(ps)
    slack = 1.0 - ps
    grad = 0.5 / math.sqrt(slack) if slack > 0 else 0.0
    g = d - grad * s
    se = float(g.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    return SigmaBoundReport(float(lhs), float(rhs), se, trials, seed)


# -- phase sweep -------------------------------------------------------------------

def place_pair(window: Window, d: int, placement: str = "horizontal") -> tuple[LatticeNode, LatticeNode]:
    """Two nodes at lattice distance ``d`` around the window centre."""
    if d < 1:
        raise DomainError("distance must be positive")
    c = window.center
    a = d // 2
    if placement == "horizontal":
        i, j = LatticeNode(c[0] - a, c[1]), LatticeNode(c[0] + d - a, c[1])
    elif placement == "diagonal":
        # anti-diagonal: j lies south-east of i
        east, south = d - a, a
        i = LatticeNode(c[0] - east // 2, c[1] + south - south // 2)
        j = LatticeNode(i[0] + east, i[1] - south)
    else:
        raise DomainError(f"unknown placement {placement!r}")
    for n in (i, j):
        if not window.contains(n):
            raise DomainError(f"distance {d} does not fit in window {window}")
    return i, j


@dataclass(frozen=True)
class SweepRow:
    p: float
    d: int
    n_window: int
    estimate: float
    stderr: float
    trials: int
    seed: int
    margin: int


@dataclass
class SweepResult:
    rows: list[SweepRow] = field(default_factory=list)

    def row(self, p: float, d: int) -> SweepRow:
        for r in self.rows:
            if r.d == d and math.isclose(r.p, p):
                return r
        raise KeyError((p, d))

    def series(self, p: float) -> list[SweepRow]:
        return sorted((r for r in self.rows if math.isclose(r.p, p)), key=lambda r: r.d)


def phase_sweep(
    p_grid: Iterable[float],
    distance_grid: Iterable[int],
    window: Window,
    trials: int,
    seed: int,
    min_margin: int = 0,
    placement: str = "horizontal",
    threads: int = 1,
) -> SweepResult:
    """Dependence probability on a ``p x distance`` grid.

    Pairs sit around the window centre; each must keep a margin of at least
    ``max(d, min_margin)`` to the window boundary. All ``p`` share ``seed``.
    """
    result = SweepResult()
    placed = []
    for d in distance_grid:
        i, j = place_pair(window, d, placement)
        margin = min(window.margin(i), window.margin(j))
        if margin < max(d, min_margin):
            raise DomainError(f"distance {d}: margin {margin} < required {max(d, min_margin)}")
        placed.append((d, i, j, margin))
    pairs = [(i, j) for _, i, j, _ in placed]
    for p in p_grid:
        out = pair_outcomes(window, p, seed, trials, pairs, _BACK, None, threads)
        for k, (d, _, _, margin) in enumerate(placed):
            est = McEstimate.from_outcomes(out[:, k], seed)
            result.rows.append(SweepRow(float(p), d, window.width, est.value, est.stderr, trials, seed, margin))
    return result


# -- common-ancestor box statistics ------------------------------------------------------

@dataclass(frozen=True)
class BoxStat:
    n: int
    value: float
    stderr: float
    pairs_included: int
    per_node: float
    trials: int


def _box_sums(window: Window, mask: np.ndarray, distance: int, convention: str):
    sets = ancestor_bitsets(window, mask)
    offsets = [(a, distance - abs(a)) for a in range(-distance, distance + 1)]
    offsets += [(a, -b) for a, b in offsets if b != 0]
    offsets = [(a, b) for a, b in offsets if a > 0 or (a == 0 and b > 0)]
    total, included, pairs = 0.0, 0, 0
    for n in range(window.n_nodes):
        k = window.node_at(n)
        for a, b in offsets:
            l = (k[0] + a, k[1] + b)
            if not window.contains(l):
                continue
            pairs += 1
            common = (sets[n] & sets[window.node_index(l)]).bit_count()
            if common:
                total += 1.0 / common
                included += 1
            elif convention == "zero":
                included += 1
    return total, included, pairs


def common_ancestor_box_stats(
    distance: int, p: float, n_grid: Iterable[int], trials: int, seed: int, convention: str = "exclude"
) -> list[BoxStat]:
    """Box averages of ``1/|An(k) & An(l) & B(n)|`` over pairs at lattice distance ``distance``.

    ``convention`` is ``"exclude"`` (drop pairs without common ancestors) or
    ``"zero"`` (count them as 0). ``value``/``stderr`` are the mean and
    standard error of the per-trial box averages; ``per_node`` divides the
    total by ``|B(n)|`` instead of by the number of pairs.
    """
    if convention not in ("exclude", "zero"):
        raise DomainError(f"unknown convention {convention!r}")
    check_probability(p)
    out = []
    for n in n_grid:
        w = Window.centered(n)
        means, grand_total, grand_included = [], 0.0, 0
        for t in range(trials):
            mask = trial_uniforms(seed, w.n_edges, t, t + 1)[0] < p
            total, included, _ = _box_sums(w, mask, distance, convention)
            grand_total += total
            grand_included += included
            if included:
                means.append(total / included)
        if means:
            m = np.asarray(means)
            value = float(m.mean())
            se = float(m.std(ddof=1) / math.sqrt(m.size)) if m.size > 1 else 0.0
        else:
            value, se = math.nan, math.nan
        out.append(BoxStat(n, value, se, grand_included, grand_total / (trials * w.n_nodes), trials))
    return out


# -- enlargement critical probabilities -------------------------------------------------

@dataclass
class EnlargementReport:
    rows: list[dict]
    p_c1_proxy: Optional[float]
    p_c2_proxy: Optional[float]
    caveat: str = (
        "finite-window proxies: positivity and 'probability one' are judged on the listed "
        "windows only and say nothing rigorous about the infinite lattice"
    )


def estimate_enlargement_criticals(
    H: Union[SubDag, Callable[[Window], SubDag]],
    i,
    j,
    p_grid: Iterable[float],
    window_grid: Iterable[Window],
    trials: int,
    seed: int,
    threads: int = 1,
) -> EnlargementReport:
    """Estimate ``P_p(U(H) in P)`` on a ``p x window`` grid.

    ``p_c1_proxy`` is the smallest ``p`` whose estimate is positive beyond two
    standard errors on some window. ``p_c2_proxy`` is the smallest ``p`` whose
    estimates do not decrease beyond noise as the window grows and which is
    within two standard errors of 1 on the largest window.
    """
    windows = list(window_grid)
    rows = []
    for p in p_grid:
        for w in windows:
            h = H(w) if callable(H) else H
            est = estimate_enlargement_probability(h, i, j, p, w, trials, seed, threads)
            rows.append(dict(p=float(p), n_window=w.width, estimate=est.value, stderr=est.stderr, trials=trials, seed=seed))
    c1 = c2 = None
    for p in sorted({r["p"] for r in rows}):
        series = [r for r in rows if r["p"] == p]
        if c1 is None and any(r["estimate"] > 2 * r["stderr"] and r["estimate"] > 0 for r in series):
            c1 = p
        rising = all(
            b["estimate"] >= a["estimate"] - 2 * math.hypot(a["stderr"], b["stderr"]) for a, b in zip(series, series[1:])
        )
        last = series[-1]
        if c2 is None and rising and 1.0 - last["estimate"] <= 2 * max(last["stderr"], 1.0 / trials):
            c2 = p
    return EnlargementReport(rows, c1, c2)


# -- exact enumeration -------------------------------------------------------------------

@dataclass(frozen=True)
class ExactPolynomial:
    """``P(p) = sum_m counts[m] p^m (1-p)^(k-m)`` over ``k`` free edges, also in monomial form."""

    counts: tuple[int, ...]

    @property
    def free_edges(self) -> int:
        return len(self.counts) - 1

    @property
    def coefficients(self) -> tuple[int, ...]:
        """Integer coefficients of ``1, p, p^2, ...``."""
        k = self.free_edges
        coef = [0] * (k + 1)
        for m, c in enumerate(self.counts):
            if c:
                for r in range(k - m + 1):
                    coef[m + r] += c * math.comb(k - m, r) * (-1) ** r
        while len(coef) > 1 and coef[-1] == 0:
            coef.pop()
        return tuple(coef)

    def __call__(self, p: float) -> float:
        k = self.free_edges
        q = 1.0 - p
        return math.fsum(c * p**m * q ** (k - m) for m, c in enumerate(self.counts) if c)

    def __str__(self) -> str:
        terms = []
        for power, c in enumerate(self.coefficients):
            if c == 0:
                continue
            mono = "" if power == 0 else ("p" if power == 1 else f"p^{power}")
            mag = abs(c)
            body = f"{mag}" if not mono else (mono if mag == 1 else f"{mag}{mono}")
            sign = "-" if c < 0 else "+"
            terms.append((sign, body))
        if not terms:
            return "0"
        head = ("-" if terms[0][0] == "-" else "") + terms[0][1]
        return " ".join([head] + [f"{s} {b}" for s, b in terms[1:]])


def exact_event_probability(
    window: Window, event: Callable[[BondConfiguration], bool], p: Optional[float] = None, forced_open=None
) -> Union[ExactPolynomial, float]:
    """Sum ``p^open (1-p)^closed`` over all configurations of the free edges where ``event`` holds.

    Edges in ``forced_open`` are open in every configuration. Returns the
    polynomial when ``p`` is ``None`` and its value otherwise.
    """
    forced = forced_mask(window, forced_open)
    free = np.flatnonzero(~forced)
    k = free.size
    if k > MAX_FREE_EDGES:
        raise DomainError(f"{k} free edges exceed the enumeration cap of {MAX_FREE_EDGES}")
    counts = [0] * (k + 1)
    shifts = np.arange(k)
    for start in range(0, 1 << k, 4096):
        bits = ((np.arange(start, min(start + 4096, 1 << k))[:, None] >> shifts) & 1).astype(bool)
        for row in bits:
            mask = forced.copy()
            mask[free] = row
            if event(BondConfiguration(window, mask)):
                counts[int(row.sum())] += 1
    poly = ExactPolynomial(tuple(counts))
    return poly if p is None else poly(check_probability(p))
