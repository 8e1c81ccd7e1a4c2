"""A steep radial spike refuses to smooth out instantly.

In ambient dimension N >= 3 the profile a(t)/r with
a(t) = max(1 - (N-1) t, 0) moves no faster than the equation allows: its
residual (time derivative minus the divergence of the saturated flux) is
nonpositive everywhere, which this script certifies numerically on every
cell.  A profile with that property cannot be overtaken from above, so
the flow started from capped 1/r data keeps a steep core for a definite
positive time.  The printed slope column shows it: while smooth data
relaxes toward slope zero immediately, the spike's steepest slope stays
orders of magnitude above 1.  This is the opposite of the jump relaxation
picture, where the discontinuity disappears at a sharp finite time.
"""

import argparse

import numpy as np

from pmsflow import (
    RadialSubsolution,
    SolverConfig,
    capped_inverse,
    radial_evolve,
    radial_grid,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dimension", type=int, default=3)
    ap.add_argument("--cells", type=int, default=100)
    ap.add_argument("--cap", type=float, default=20.0)
    ap.add_argument("--tau", type=float, default=1e-3)
    ap.add_argument("--t-end", type=float, default=0.2)
    ap.add_argument("--plot", action="store_true")
    args = ap.parse_args()

    grid = radial_grid(args.dimension, 1.0, args.cells)
    u0 = capped_inverse(grid, cap=args.cap)
    lower = RadialSubsolution(args.dimension)
    # steep radial data wants a strongly asymmetric primal/dual step split
    bound = 2.0 ** (args.dimension / 2.0) / grid.spacing[0]
    root = np.sqrt(1e-3)
    cfg = SolverConfig(tau=args.tau, sigma=1.0 / (bound * root), s=root / bound)

    print(
        f"capped 1/r spike (cap {args.cap:g}) in dimension {args.dimension}, "
        f"{args.cells} radial cells"
    )
    print(f"the comparison core a(t)/r survives until t = {lower.extinction_time:g}")
    traj = radial_evolve(u0, args.t_end, cfg, keep="all")

    r = grid.cell_centers[0]
    times = traj.series("t")
    lip = traj.series("lip")
    sup = traj.series("sup_norm")
    print("\n   t        sup u   steepest slope   max residual of a(t)/r")
    for t_mark in np.linspace(0.0, args.t_end, 5):
        k = int(np.argmin(np.abs(times - t_mark)))
        worst = np.max(lower.residual(times[k], r))
        print(f"  {times[k]:5.3f} {sup[k]:12.3f} {lip[k]:16.2f} {worst:20.3e}")

    print(
        "\nthe residual stays nonpositive (the core profile never moves too "
        "fast) and the computed slope stays orders of magnitude above 1 "
        "while the core lives"
    )

    if args.plot:
        try:
            import matplotlib.pyplot as plt
        except ImportError:
            print("matplotlib is not installed; skipping the plot")
            return
        for t_mark in np.linspace(0.0, args.t_end, 5):
            k = int(np.argmin(np.abs(times - t_mark)))
            plt.plot(r, traj.states[k].values, label=f"t = {times[k]:.2f}")
        plt.plot(r, lower.value(0.0, r), "k--", label="1/r")
        plt.xlabel("r")
        plt.ylabel("u")
        plt.ylim(0.0, args.cap * 1.05)
        plt.title("steep spike keeps its core")
        plt.legend()
        plt.show()


if __name__ == "__main__":
    main()
