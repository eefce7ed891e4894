"""Exact dependence, Sigma and enlargement polynomials for every small window.

    python3 scripts/exact_table.py --max-edges 10
"""

import argparse
import sys

from maxlinperc.dependence import SubDag, are_dependent, enlargement_of, exact_event_probability, sigma_event
from maxlinperc.io import rows_to_csv
from maxlinperc.lattice import LatticeNode, Window


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-edges", type=int, default=10)
    ap.add_argument("--out")
    args = ap.parse_args(argv)

    rows = []
    for width in range(1, 12):
        for height in range(1, 12):
            w = Window(LatticeNode(0, 0), LatticeNode(width - 1, height - 1))
            if width * height < 2 or w.n_edges > args.max_edges:
                continue
            i, j = LatticeNode(0, height - 1), LatticeNode(width - 1, 0)
            H = SubDag.pair(i, j)
            events = {
                "dependent": lambda c: are_dependent(i, j, c),
                "sigma": lambda c: sigma_event(i, j, c),
                "enlarged": lambda c: are_dependent(i, j, enlargement_of(H, c)),
            }
            for name, ev in events.items():
                poly = exact_event_probability(w, ev)
                rows.append(dict(window=f"{width}x{height}", event=name, polynomial=str(poly), at_half=poly(0.5)))
    text = rows_to_csv(rows)
    if args.out:
        open(args.out, "w").write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
