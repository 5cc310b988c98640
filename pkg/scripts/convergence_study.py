"""Momentum residual of the exact potential flow under grid refinement.

Writes convergence.csv (n_r, n_theta, momentum, mass, order) to --out.
"""
import argparse
import csv
from pathlib import Path

from hypflow import flows
from hypflow.harness import checks


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--a", type=float, default=1.0)
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--base", type=int, default=32)
    p.add_argument("--out", type=Path, default=Path("."))
    args = p.parse_args()
    grids = [(args.base << k, args.base << k) for k in range(args.levels)]
    phi = flows.BoundaryTrace((0.0, 1.0), (0.0,))
    rep = checks.check_exact_residual(phi, args.a, 1.0, 8.0, grids)
    args.out.mkdir(parents=True, exist_ok=True)
    with (args.out / "convergence.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n_r", "n_theta", "momentum", "mass", "order"])
        for k, (g, m, ms) in enumerate(zip(rep.grids, rep.momentum, rep.mass)):
            w.writerow([g[0], g[1], repr(m), repr(ms), repr(rep.orders[k - 1]) if k else ""])
    for g, m in zip(rep.grids, rep.momentum):
        print(f"{g[0]}x{g[1]}: momentum residual {m:.3e}")
    print("orders:", ", ".join(f"{o:.2f}" for o in rep.orders))


if __name__ == "__main__":
    main()
