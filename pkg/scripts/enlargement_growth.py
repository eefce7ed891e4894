"""P(U(H) dependent) as the window grows, for a finite H, the North columns and the barrier geometry.

    python3 scripts/enlargement_growth.py --sides 11,21,41,81
"""

import argparse
import sys

from maxlinperc.dependence import SubDag, estimate_enlargement_probability
from maxlinperc.io import rows_to_csv
from maxlinperc.lattice import LatticeNode, Window


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sides", default="11,21,41")
    ap.add_argument("--distance", type=int, default=4)
    ap.add_argument("--trials", type=int, default=10000)
    ap.add_argument("--seed", type=int, default=8)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args(argv)

    a = args.distance // 2
    i, j = LatticeNode(-a, 0), LatticeNode(args.distance - a, 0)
    cases = [
        ("pair", 0.9, lambda w: SubDag.pair(i, j)),
        ("north_columns", 0.05, SubDag.north_columns),
        ("barrier", 0.1, lambda w: SubDag.barrier(w, i, (0, 0))),
    ]
    rows = []
    for name, p, make in cases:
        for side in (int(s) for s in args.sides.split(",")):
            w = Window.centered((side - 1) // 2)
            est = estimate_enlargement_probability(make(w), i, j, p, w, args.trials, args.seed, args.threads)
            rows.append(dict(h=name, p=p, side=side, estimate=est.value, stderr=est.stderr))
    text = rows_to_csv(rows)
    if args.out:
        open(args.out, "w").write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
