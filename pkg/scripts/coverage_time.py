"""Sphere coverage accumulated by a rotating sensor over time.

Reports coverage after increasing rotation times on the default grid and
the linear extrapolation of the time needed to reach a target coverage.

    python scripts/coverage_time.py --minutes 2 --target 0.6
"""

import argparse

import numpy as np

from magcal.coverage import CoverageGrid
from magcal.sweep import extrapolate_minutes
from magcal.synth import SamplingPlan, sample_directions


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--minutes", type=float, default=2.0)
    p.add_argument("--sample-rate", type=float, default=250.0)
    p.add_argument("--rev-rate", type=float, default=0.5)
    p.add_argument("--target", type=float, default=0.6)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args()

    n = int(args.minutes * 60 * args.sample_rate)
    d = sample_directions(SamplingPlan("trajectory", n, args.sample_rate, args.seed,
                                       rev_rate=args.rev_rate))
    grid = CoverageGrid()
    areas = grid.cell_areas()
    i_t, i_p = grid.cell_index(d)
    seen = np.zeros((grid.n_theta, grid.n_phi), dtype=bool)
    step = n // 8
    print(f"{'minutes':>8} {'coverage':>9}")
    for stop in range(step, n + 1, step):
        seen[i_t[stop - step:stop], i_p[stop - step:stop]] = True
        pct = float((seen * areas).sum() / (4 * np.pi))
        print(f"{stop / args.sample_rate / 60:>8.2f} {pct:>9.1%}")
    need = extrapolate_minutes(args.minutes, pct, args.target)
    print(f"linear extrapolation to {args.target:.0%}: {need:.1f} min")


if __name__ == "__main__":
    main()
