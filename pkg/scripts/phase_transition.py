"""Dependence probability against pair distance below and above the oriented threshold.

Also prints the lower bound built from the oriented theta estimate, so the
p = 0.7 rows can be compared with it directly.

    python3 scripts/phase_transition.py --p-grid 0.4,0.55,0.7 --out sweep.csv
"""

import argparse
import math
import sys

from maxlinperc.dependence import phase_sweep
from maxlinperc.io import rows_to_csv
from maxlinperc.lattice import Window
from maxlinperc.percolation import estimate_oriented_theta


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p-grid", default="0.4,0.7")
    ap.add_argument("--distances", default="2,6,10,14,18")
    ap.add_argument("--half", type=int, default=29, help="window is [-half, half]^2")
    ap.add_argument("--margin", type=int, default=20)
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--placement", default="horizontal")
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args(argv)

    grid = [float(x) for x in args.p_grid.split(",")]
    w = Window.centered(args.half)
    res = phase_sweep(grid, [int(d) for d in args.distances.split(",")], w, args.trials, args.seed,
                      args.margin, args.placement, args.threads)
    theta = {p: estimate_oriented_theta(p, w, args.half, args.trials, args.seed + 1, threads=args.threads).value
             for p in grid}
    rows = []
    for r in res.rows:
        bound = 1 - math.sqrt(1 - theta[r.p] ** 2)
        rows.append(dict(p=r.p, d=r.d, estimate=r.estimate, stderr=r.stderr, theta=theta[r.p], bound=bound))
    text = rows_to_csv(rows)
    if args.out:
        open(args.out, "w").write(text)
    else:
        sys.stdout.write(text)


if __name__ == "__main__":
    main()
