"""Command-line experiment runner.

Every subcommand reads flags, optionally merged over a JSON config file
(``--config``; keys are flag names without dashes, flags win), validates all
numeric fields before sampling, and writes CSV (default) or JSON to ``--out``
or stdout. Identical config and seed give byte-identical output for any
``--threads``.

Exit codes: 0 success, 2 usage error, 3 domain error.

Nodes are written ``i1,i2``; use ``--i=-1,0`` when a coordinate is negative.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Optional

from . import dependence as dep
from . import io as mio
from . import maxlinear as ml
from . import percolation as perc
from .lattice import DomainError, LatticeNode, OutOfWindowError, StructuralError, Window


class UsageError(Exception):
    pass


class FieldError(DomainError):
    def __init__(self, name: str, message: str):
        super().__init__(f"--{name.replace('_', '-')}: {message}")
        self.field = name


# -- flag parsing ------------------------------------------------------------------

def parse_node(text: str) -> LatticeNode:
    parts = str(text).replace("(", "").replace(")", "").split(",")
    if len(parts) != 2:
        raise ValueError(f"expected 'i1,i2', got {text!r}")
    return LatticeNode(int(parts[0]), int(parts[1]))


def parse_nodes(text: str) -> list[LatticeNode]:
    return [parse_node(t) for t in str(text).split(";") if t.strip()]


def parse_rect(text: str) -> Window:
    v = [int(t) for t in str(text).split(",")]
    if len(v) != 4:
        raise ValueError(f"expected 'x0,y0,x1,y1', got {text!r}")
    return Window(LatticeNode(v[0], v[1]), LatticeNode(v[2], v[3]))


def parse_grid(text: str, kind=float) -> list:
    """``a:b:step`` (inclusive of ``b`` up to rounding) or a comma list."""
    text = str(text).strip("[] ")
    if ":" in text:
        a, b, step = (float(t) for t in text.split(":"))
        if step <= 0:
            raise ValueError("grid step must be positive")
        n = int(math.floor((b - a) / step + 1e-9)) + 1
        vals = [round(a + k * step, 12) for k in range(max(n, 0))]
    else:
        vals = [float(t) for t in text.split(",") if t.strip()]
    if kind is int:
        if any(v != int(v) for v in vals):
            raise ValueError(f"integer grid expected, got {text!r}")
        return [int(v) for v in vals]
    return vals


def parse_floats(text: str) -> list[float]:
    return [float(t) for t in str(text).split(",") if t.strip()]


FLAGS = {
    # dest: (converter, help)
    "window": (int, "square window side N: nodes [0, N-1]^2"),
    "window_rect": (parse_rect, "window as x0,y0,x1,y1"),
    "p": (float, "edge-open probability"),
    "p_grid": (parse_grid, "p grid as a:b:step or a comma list"),
    "distance": (int, "pair distance"),
    "distance_grid": (lambda t: parse_grid(t, int), "distance grid as a:b:step or a comma list"),
    "trials": (int, "Monte Carlo trials"),
    "seed": (int, "RNG seed, 0 <= seed < 2^128"),
    "alpha": (float, "Frechet shape parameter"),
    "dag": (str, "JSON sub-DAG document"),
    "out": (str, "output path (default stdout)"),
    "format": (str, "csv or json"),
    "threads": (int, "worker threads for trial loops"),
    "margin": (int, "minimum pair margin to the window boundary"),
    "inverse_count_convention": (str, "exclude or zero: handling of pairs without common ancestors"),
}

COMMON_DEFAULTS = dict(trials=10000, seed=0, alpha=1.0, format="csv", threads=1, margin=0,
                       inverse_count_convention="exclude")

SCHEMAS = {
    "percolate": (
        "CSV columns:\n"
        "  estimates:     p,estimator,window,n_window,radius,trials,value,stderr,seed\n"
        "  --cluster-sizes: p,window,n_window,oriented,trials,mean_size,stderr,max_size,seed\n"
        "--doubling K repeats the run on windows N, 2N, ..., 2^(K-1) N (radius = room in each)."
    ),
    "critical": "CSV columns: estimator,lo,hi,width,threshold,window,radius,trials,seed,evaluations",
    "maxlin": (
        "CSV columns:\n"
        "  --matrix:   j,i,b            (--symbolic adds product)\n"
        "  --realize:  trial,node,x,z\n"
        "  --cdf:      targets,x,alpha,cdf\n"
        "  --scale:    node,alpha,scale\n"
        "  --check:    ok,log_gap,heavy_path,light_path\n"
        "  --extend K: kind,i1,i2,direction,weight   (the grown DAG; JSON gives a sub-DAG document)"
    ),
    "depend": (
        "CSV columns:\n"
        "  single pair:    i,j,p,window,trials,estimate,stderr,seed\n"
        "  --sigma-bound:  i,j,p,window,trials,lhs,rhs,difference,stderr,passed,seed\n"
        "  --sweep:        p,d,n_window,estimate,stderr,trials,seed,margin\n"
        "  --box-stats:    n,distance,p,convention,value,stderr,pairs_included,per_node,trials"
    ),
    "enlarge": (
        "CSV columns: p,n_window,estimate,stderr,trials,seed,p_c1_proxy,p_c2_proxy\n"
        "Windows in --window-grid are centred at the origin: side n gives [-(n-1)/2, (n-1)/2]^2."
    ),
    "oracle": "CSV columns: event,i,j,window,free_edges,polynomial,coefficients,value",
}


def _add_common(sp):
    sp.add_argument("--config", help="JSON config; keys are flag names, flags override it")
    g = sp.add_argument_group("common")
    for dest, (conv, hlp) in FLAGS.items():
        g.add_argument("--" + dest.replace("_", "-"), dest=dest, help=hlp)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maxlinperc",
        description="Percolation and max-linear dependence experiments.",
        epilog="Nodes are written i1,i2; use --i=-1,0 when a coordinate is negative.",
        argument_default=argparse.SUPPRESS,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def cmd(name, help_):
        sp = sub.add_parser(name, help=help_, description=help_, epilog=SCHEMAS[name],
                            formatter_class=argparse.RawDescriptionHelpFormatter,
                            argument_default=argparse.SUPPRESS)
        _add_common(sp)
        return sp

    sp = cmd("percolate", "theta estimates and cluster statistics")
    sp.add_argument("--estimator", choices=perc.ESTIMATORS)
    sp.add_argument("--radius", type=int)
    sp.add_argument("--cluster-sizes", dest="cluster_sizes", action="store_true")
    sp.add_argument("--oriented", action="store_true", help="oriented clusters for --cluster-sizes")
    sp.add_argument("--doubling", type=int)

    sp = cmd("critical", "bisection for critical-probability brackets")
    sp.add_argument("--estimator", choices=perc.ESTIMATORS + ("both",))
    sp.add_argument("--radius", type=int)
    sp.add_argument("--tolerance", type=float)
    sp.add_argument("--threshold", type=float)

    sp = cmd("maxlin", "coefficient matrices, realisations, CDFs, max-weighted checks")
    sp.add_argument("--matrix", action="store_true")
    sp.add_argument("--symbolic", action="store_true")
    sp.add_argument("--realize", action="store_true")
    sp.add_argument("--cdf", help="x values, comma separated, one per target")
    sp.add_argument("--targets", help="target nodes as 'a,b;c,d'")
    sp.add_argument("--scale", help="node 'i1,i2'")
    sp.add_argument("--check", action="store_true")
    sp.add_argument("--extend", type=int, help="grow V_1 by K max-weighted extensions")

    sp = cmd("depend", "pairwise dependence, Sigma bound, phase sweep, box statistics")
    sp.add_argument("--i")
    sp.add_argument("--j")
    sp.add_argument("--sigma-bound", dest="sigma_bound", action="store_true")
    sp.add_argument("--sweep", action="store_true")
    sp.add_argument("--placement", choices=("horizontal", "diagonal"))
    sp.add_argument("--box-stats", dest="box_stats", action="store_true")
    sp.add_argument("--n-grid", dest="n_grid", help="box half-widths for --box-stats")

    sp = cmd("enlarge", "enlargement U(H) experiments and critical-probability proxies")
    sp.add_argument("--h-kind", dest="h_kind", choices=("pair", "north", "barrier", "file"))
    sp.add_argument("--i")
    sp.add_argument("--j")
    sp.add_argument("--k", help="barrier column node for --h-kind barrier")
    sp.add_argument("--window-grid", dest="window_grid", help="window sides, e.g. 11,21,41")

    sp = cmd("oracle", "exact probabilities by enumeration")
    sp.add_argument("--event", choices=("dependent", "sigma", "enlarged"))
    sp.add_argument("--i")
    sp.add_argument("--j")
    return parser


# -- configuration -------------------------------------------------------------------

CONVERTERS = {k: v[0] for k, v in FLAGS.items()}
CONVERTERS.update(
    i=parse_node, j=parse_node, k=parse_node, radius=int, doubling=int, tolerance=float, threshold=float,
    extend=int, scale=parse_node, targets=parse_nodes, cdf=parse_floats,
    n_grid=lambda t: parse_grid(t, int), window_grid=lambda t: parse_grid(t, int),
)


def _convert(key, value):
    conv = CONVERTERS.get(key)
    if conv is None or isinstance(value, bool):
        return value
    if isinstance(value, list):
        if key in ("i", "j", "k", "scale"):
            value = ",".join(str(v) for v in value)
        elif key == "targets":
            value = ";".join(",".join(str(c) for c in v) for v in value)
        else:
            value = ",".join(str(v) for v in value)
    try:
        return conv(value) if isinstance(value, str) or conv in (int, float) else value
    except (TypeError, ValueError) as exc:
        raise UsageError(f"--{key.replace('_', '-')}: {exc}") from None


@dataclass
class ExperimentConfig:
    command: str
    values: dict = field(default_factory=dict)

    def __getattr__(self, name):
        try:
            return self.__dict__["values"][name]
        except KeyError:
            raise AttributeError(name) from None

    def get(self, name, default=None):
        return self.values.get(name, default)

    @property
    def window_obj(self) -> Optional[Window]:
        if "window_rect" in self.values:
            return self.values["window_rect"]
        if "window" in self.values:
            return Window.square(self.values["window"])
        return None

    def validate(self) -> "ExperimentConfig":
        v = self.values
        if "window" in v and v["window"] < 1:
            raise FieldError("window", f"must be a positive side length, got {v['window']}")
        if "p" in v and not 0.0 <= v["p"] <= 1.0:
            raise FieldError("p", f"must lie in [0, 1], got {v['p']}")
        for name in ("p_grid",):
            if name in v:
                if not v[name]:
                    raise FieldError(name, "empty grid")
                bad = [x for x in v[name] if not 0.0 <= x <= 1.0]
                if bad:
                    raise FieldError(name, f"values outside [0, 1]: {bad}")
        for name in ("trials", "threads"):
            if v[name] < 1:
                raise FieldError(name, f"must be positive, got {v[name]}")
        if not 0 <= v["seed"] < 2**128:
            raise FieldError("seed", f"must lie in [0, 2^128), got {v['seed']}")
        if not v["alpha"] > 0:
            raise FieldError("alpha", f"must be positive, got {v['alpha']}")
        if v["margin"] < 0:
            raise FieldError("margin", f"must be non-negative, got {v['margin']}")
        for name in ("distance",):
            if name in v and v[name] < 1:
                raise FieldError(name, f"must be positive, got {v[name]}")
        for name in ("distance_grid", "window_grid", "n_grid"):
            if name in v and (not v[name] or min(v[name]) < 1):
                raise FieldError(name, f"entries must be positive, got {v[name]}")
        if v["format"] not in ("csv", "json"):
            raise FieldError("format", f"must be csv or json, got {v['format']!r}")
        if v["inverse_count_convention"] not in ("exclude", "zero"):
            raise FieldError("inverse_count_convention", f"must be exclude or zero, got {v['inverse_count_convention']!r}")
        for name in ("radius", "doubling", "extend"):
            if name in v and v[name] < (0 if name == "extend" else 1):
                raise FieldError(name, f"out of range: {v[name]}")
        if "tolerance" in v and not v["tolerance"] > 0:
            raise FieldError("tolerance", f"must be positive, got {v['tolerance']}")
        if "threshold" in v and not 0 <= v["threshold"] < 1:
            raise FieldError("threshold", f"must lie in [0, 1), got {v['threshold']}")
        return self


def load_config(argv) -> ExperimentConfig:
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    command = ns.pop("command")
    merged = dict(COMMON_DEFAULTS)
    path = ns.pop("config", None)
    if path is not None:
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"--config: {exc}") from None
        if not isinstance(doc, dict):
            raise UsageError("--config: expected a JSON object")
        doc.pop("command", None)
        for key, value in doc.items():
            key = key.lstrip("-").replace("-", "_")
            merged[key] = _convert(key, value)
    for key, value in ns.items():
        merged[key] = _convert(key, value)
    return ExperimentConfig(command, merged).validate()


# -- subcommands -------------------------------------------------------------------------

def _p_values(cfg: ExperimentConfig) -> list[float]:
    if "p_grid" in cfg.values:
        return cfg.p_grid
    if "p" in cfg.values:
        return [cfg.p]
    raise FieldError("p", "required (or --p-grid)")


def _require_window(cfg) -> Window:
    w = cfg.window_obj
    if w is None:
        raise FieldError("window", "required (or --window-rect)")
    return w


def _need(cfg, name):
    if name not in cfg.values:
        raise FieldError(name, "required")
    return cfg.values[name]


def _room(window: Window, origin, oriented: bool) -> int:
    if oriented:
        return min(window.max_corner[0] - origin[0], window.max_corner[1] - origin[1])
    return window.margin(origin)


def cmd_percolate(cfg):
    base = _require_window(cfg)
    name = cfg.get("estimator", "theta")
    windows = [base]
    for _ in range(cfg.get("doubling", 1) - 1):
        w = windows[-1]
        windows.append(Window(w.min_corner, LatticeNode(w.min_corner[0] + 2 * w.width - 1, w.min_corner[1] + 2 * w.height - 1)))
    rows = []
    for w in windows:
        for p in _p_values(cfg):
            if cfg.get("cluster_sizes"):
                oriented = bool(cfg.get("oriented"))
                sizes = perc.cluster_sizes(p, w, cfg.trials, cfg.seed, oriented=oriented, threads=cfg.threads)
                se = float(sizes.std(ddof=1) / math.sqrt(sizes.size)) if sizes.size > 1 else 0.0
                rows.append(dict(p=p, window=str(w), n_window=w.width, oriented=oriented, trials=cfg.trials,
                                 mean_size=float(sizes.mean()), stderr=se, max_size=int(sizes.max()), seed=cfg.seed))
            else:
                radius = cfg.get("radius") or _room(w, w.center, name == "oriented_theta")
                est = perc.estimator(name)(p, w, radius, cfg.trials, cfg.seed, threads=cfg.threads)
                rows.append(dict(p=p, estimator=name, window=str(w), n_window=w.width, radius=radius,
                                 trials=cfg.trials, value=est.value, stderr=est.stderr, seed=cfg.seed))
    return rows


def cmd_critical(cfg):
    w = _require_window(cfg)
    which = cfg.get("estimator", "both")
    names = ("theta", "oriented_theta") if which == "both" else (which,)
    rows = []
    for name in names:
        radius = cfg.get("radius") or _room(w, w.center, name == "oriented_theta")
        ci = perc.estimate_critical(name, w, radius, cfg.trials, cfg.seed, tolerance=cfg.get("tolerance", 0.01),
                                    threshold=cfg.get("threshold", 0.02), threads=cfg.threads)
        rows.append(dict(estimator=name, lo=ci.lo, hi=ci.hi, width=ci.width, threshold=ci.threshold, window=str(w),
                         radius=radius, trials=cfg.trials, seed=cfg.seed, evaluations=len(ci.evaluations)))
    return rows


def _name(n) -> str:
    return f"{n[0]},{n[1]}"


def cmd_maxlin(cfg):
    if "extend" in cfg.values:
        dag = ml.grow_max_weighted(cfg.extend, cfg.seed)
        if cfg.format == "json":
            return mio.dag_to_document(dag)
        rows = [dict(kind="node", i1=n[0], i2=n[1], direction="", weight=dag.node_weight[n]) for n in dag.nodes]
        rows += [dict(kind="edge", i1=e.origin[0], i2=e.origin[1], direction=e.direction.value, weight=w)
                 for e, w in sorted(dag.edge_weight.items(), key=lambda t: mio.edge_key(t[0]))]
        return rows
    doc = mio.read_document(_need(cfg, "dag"))
    dag = mio.dag_from_document(doc)
    labels = mio.labels_from_document(doc)
    coeff = ml.coefficient_matrix(dag)
    if cfg.get("realize"):
        batch = ml.realize_many(dag, ml.NoiseSpec(cfg.alpha), cfg.trials, cfg.seed)
        z = ml.frechet_noise(batch.nodes, ml.NoiseSpec(cfg.alpha), cfg.seed, cfg.trials)
        return [
            dict(trial=t, node=labels.get(n, _name(n)), x=float(batch.values[t, k]), z=float(z[t, k]))
            for t in range(cfg.trials)
            for k, n in enumerate(batch.targets)
        ]
    if "cdf" in cfg.values:
        targets = _need(cfg, "targets")
        value = ml.joint_cdf(coeff, targets, cfg.cdf, cfg.alpha)
        return [dict(targets=";".join(_name(t) for t in targets), x=",".join(repr(x) for x in cfg.cdf),
                     alpha=cfg.alpha, cdf=value)]
    if "scale" in cfg.values:
        return [dict(node=_name(cfg.scale), alpha=cfg.alpha, scale=ml.scale_parameter(coeff, cfg.scale, cfg.alpha))]
    if cfg.get("check"):
        res = ml.is_max_weighted(dag)
        heavy, light = res.witness or ([], [])
        path = lambda ns: " ".join(_name(n) for n in ns)
        return [dict(ok=res.ok, log_gap=res.log_gap, heavy_path=path(heavy), light_path=path(light))]
    return mio.matrix_rows(coeff, labels, symbolic=bool(cfg.get("symbolic")))


def cmd_depend(cfg):
    w = _require_window(cfg)
    if cfg.get("box_stats"):
        p = _need(cfg, "p")
        stats = dep.common_ancestor_box_stats(_need(cfg, "distance"), p, _need(cfg, "n_grid"), cfg.trials, cfg.seed,
                                              cfg.inverse_count_convention)
        return [dict(n=s.n, distance=cfg.distance, p=p, convention=cfg.inverse_count_convention, value=s.value,
                     stderr=s.stderr, pairs_included=s.pairs_included, per_node=s.per_node, trials=s.trials)
                for s in stats]
    if cfg.get("sweep") or "distance_grid" in cfg.values:
        grid = cfg.get("distance_grid") or [_need(cfg, "distance")]
        res = dep.phase_sweep(_p_values(cfg), grid, w, cfg.trials, cfg.seed, cfg.margin,
                              cfg.get("placement", "horizontal"), cfg.threads)
        return [dict(p=r.p, d=r.d, n_window=r.n_window, estimate=r.estimate, stderr=r.stderr, trials=r.trials,
                     seed=r.seed, margin=r.margin) for r in res.rows]
    i, j = _need(cfg, "i"), _need(cfg, "j")
    rows = []
    for p in _p_values(cfg):
        if cfg.get("sigma_bound"):
            rep = dep.check_sigma_bound(i, j, p, w, cfg.trials, cfg.seed, cfg.threads)
            rows.append(dict(i=_name(i), j=_name(j), p=p, window=str(w), trials=cfg.trials, lhs=rep.lhs, rhs=rep.rhs,
                             difference=rep.difference, stderr=rep.stderr, passed=rep.passed, seed=cfg.seed))
        else:
            forced = None
            if "dag" in cfg.values:
                h, _ = mio.subdag_from_document(mio.read_document(cfg.dag))
                forced = frozenset(h.edges)
            q = dep.DependenceQuery(i, j, w, p, cfg.trials, cfg.seed, forced or frozenset())
            est = dep.estimate_dependence_probability(q, cfg.threads)
            rows.append(dict(i=_name(i), j=_name(j), p=p, window=str(w), trials=cfg.trials, estimate=est.value,
                             stderr=est.stderr, seed=cfg.seed))
    return rows


def cmd_enlarge(cfg):
    kind = cfg.get("h_kind", "file" if "dag" in cfg.values else "pair")
    i, j = _need(cfg, "i"), _need(cfg, "j")
    if "window_grid" in cfg.values:
        windows = [Window.centered((n - 1) // 2) for n in cfg.window_grid]
    else:
        windows = [_require_window(cfg)]
    if kind == "pair":
        H = dep.SubDag.pair(i, j)
    elif kind == "north":
        H = dep.SubDag.north_columns
    elif kind == "barrier":
        k = _need(cfg, "k")
        H = lambda w: dep.SubDag.barrier(w, i, k)
    else:
        H, _ = mio.subdag_from_document(mio.read_document(_need(cfg, "dag")))
    rep = dep.estimate_enlargement_criticals(H, i, j, _p_values(cfg), windows, cfg.trials, cfg.seed, cfg.threads)
    print(f"note: {rep.caveat}", file=sys.stderr)
    if cfg.format == "json":
        return dict(rows=rep.rows, p_c1_proxy=rep.p_c1_proxy, p_c2_proxy=rep.p_c2_proxy, caveat=rep.caveat)
    return [dict(r, p_c1_proxy=rep.p_c1_proxy, p_c2_proxy=rep.p_c2_proxy) for r in rep.rows]


def cmd_oracle(cfg):
    w = _require_window(cfg)
    i, j = _need(cfg, "i"), _need(cfg, "j")
    for n in (i, j):
        if not w.contains(n):
            raise FieldError("i" if n == i else "j", f"{tuple(n)} outside window {w}")
    event = cfg.get("event", "dependent")
    forced = None
    if "dag" in cfg.values:
        h, _ = mio.subdag_from_document(mio.read_document(cfg.dag))
        forced = h.edges
    if event == "dependent":
        fn = lambda c: dep.are_dependent(i, j, c)
    elif event == "sigma":
        fn = lambda c: dep.sigma_event(i, j, c)
    else:
        H = dep.SubDag.pair(i, j) if forced is None else dep.SubDag(frozenset(h.nodes) | {i, j}, frozenset(h.edges))
        fn = lambda c: dep.are_dependent(i, j, dep.enlargement_of(H, c))
    poly = dep.exact_event_probability(w, fn, forced_open=forced)
    value = poly(cfg.p) if "p" in cfg.values else None
    return [dict(event=event, i=_name(i), j=_name(j), window=str(w), free_edges=poly.free_edges, polynomial=str(poly),
                 coefficients=" ".join(str(c) for c in poly.coefficients), value=value)]


COMMANDS = dict(percolate=cmd_percolate, critical=cmd_critical, maxlin=cmd_maxlin, depend=cmd_depend,
                enlarge=cmd_enlarge, oracle=cmd_oracle)


def emit(result, fmt: str) -> str:
    if fmt == "json" or isinstance(result, dict):
        return mio.to_json(result)
    return mio.rows_to_csv(result)


def run(argv=None) -> int:
    try:
        cfg = load_config(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except SystemExit as exc:  # argparse already printed usage
        return 0 if exc.code in (0, None) else 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    try:
        text = emit(COMMANDS[cfg.command](cfg), cfg.format)
    except (DomainError, OutOfWindowError, StructuralError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except FileNotFoundError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    if "out" in cfg.values:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def main(argv=None) -> int:
    return run(argv)
