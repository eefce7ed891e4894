"""JSON sub-DAG documents and CSV/JSON emission.

Sub-DAG document (all keys but ``edges`` optional)::

    {
      "window": [[x0, y0], [x1, y1]],          # default: bounding box of nodes and edges
      "nodes": [[i1, i2], ...],                # default: every window node
      "edges": [[[i1, i2], "E"], [[i1, i2], "N"], ...],
      "node_weights": [[[i1, i2], c], ...],    # default 1.0
      "edge_weights": [[[i1, i2], "E", c], ...],
      "labels": {"name": [i1, i2], ...}        # display names, optional
    }
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Iterable, Union

from .dependence import SubDag
from .lattice import Direction, LatticeEdge, LatticeNode, StructuralError, Window
from .maxlinear import CoefficientMatrix, WeightedDag


def _node(v) -> LatticeNode:
    if len(v) != 2:
        raise StructuralError(f"node must be [i1, i2], got {v!r}")
    return LatticeNode(int(v[0]), int(v[1]))


def _edge(v) -> LatticeEdge:
    return LatticeEdge(_node(v[0]), Direction(v[1]))


def read_document(path: Union[str, Path]) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _parts(doc: dict):
    edges = [_edge(e) for e in doc.get("edges", [])]
    if "window" in doc:
        window = Window(_node(doc["window"][0]), _node(doc["window"][1]))
    else:
        pts = [_node(n) for n in doc.get("nodes", [])] + [n for e in edges for n in (e.origin, e.target)]
        window = Window.bounding(pts)
    nodes = [_node(n) for n in doc["nodes"]] if "nodes" in doc else list(window.nodes())
    return window, nodes, edges


def dag_from_document(doc: dict) -> WeightedDag:
    window, nodes, edges = _parts(doc)
    nw = {_node(n): float(w) for n, w in doc.get("node_weights", [])}
    ew = {LatticeEdge(_node(o), Direction(d)): float(w) for o, d, w in doc.get("edge_weights", [])}
    return WeightedDag(window, {n: nw.get(n, 1.0) for n in nodes}, {e: ew.get(e, 1.0) for e in edges})


def subdag_from_document(doc: dict) -> tuple[SubDag, Window]:
    window, nodes, edges = _parts(doc)
    return SubDag(frozenset(nodes), frozenset(edges)), window


def labels_from_document(doc: dict) -> dict[LatticeNode, str]:
    return {_node(v): str(k) for k, v in doc.get("labels", {}).items()}


def edge_key(e: LatticeEdge):
    return (e.origin, e.direction.value)


def dag_to_document(dag: WeightedDag) -> dict:
    return {
        "window": [list(dag.window.min_corner), list(dag.window.max_corner)],
        "nodes": [list(n) for n in dag.nodes],
        "edges": [[list(e.origin), e.direction.value] for e in sorted(dag.edge_weight, key=edge_key)],
        "node_weights": [[list(n), dag.node_weight[n]] for n in dag.nodes],
        "edge_weights": [[list(e.origin), e.direction.value, w] for e, w in sorted(dag.edge_weight.items(), key=lambda t: edge_key(t[0]))],
    }


# -- emission ---------------------------------------------------------------------

def _cell(v):
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v)
    return "" if v is None else str(v)


def rows_to_csv(rows: Iterable[dict], columns=None) -> str:
    rows = list(rows)
    if columns is None:
        columns = list(rows[0]) if rows else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    return v


def to_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def matrix_rows(coeff: CoefficientMatrix, labels=None, symbolic: bool = False) -> list[dict]:
    """Triplet rows ``j, i, b_ji`` (plus a symbolic product when asked)."""
    labels = labels or {}
    name = lambda n: labels.get(n, f"{n[0]}:{n[1]}")
    rows = []
    for j, i, b in coeff.triplets():
        row = {"j": name(j), "i": name(i), "b": b}
        if symbolic:
            path = coeff.path(j, i)
            factors = [f"c[{name(j)},{name(j)}]"] + [f"c[{name(a)},{name(b_)}]" for a, b_ in zip(path, path[1:])]
            row["product"] = "*".join(factors)
        rows.append(row)
    return sorted(rows, key=lambda r: (r["j"], r["i"]))
