"""PTP and variance versus sphere coverage for both pipelines.

Prints a coverage-by-method table per noise level and writes the per-seed
runs to CSV. The defaults take a few minutes on one core.

    python scripts/run_sweep.py --out sweep.csv
"""

import argparse
import time

from magcal.nncal import TrainConfig
from magcal.sweep import SweepConfig, count_inversions, run_sweep, summarize, write_table


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--out", default="sweep.csv")
    p.add_argument("--n-samples", type=int, default=100_000)
    p.add_argument("--n-seeds", type=int, default=5)
    p.add_argument("--epochs", type=int, default=60)
    p.add_argument("--measure-coverage", action="store_true",
                   help="also bin each training set on the coverage grid")
    args = p.parse_args()

    cfg = SweepConfig(seeds=tuple(range(args.n_seeds)), n_samples=args.n_samples,
                      train=TrainConfig(epochs=args.epochs, retarget_every=1),
                      measure_coverage=args.measure_coverage)
    t0 = time.perf_counter()
    rows = run_sweep(cfg)
    summary = summarize(rows)
    cols = ("coverage", "sigma", "method", "seed", "ptp", "variance", "status")
    if args.measure_coverage:
        cols += ("achieved_coverage",)
    write_table(rows, args.out, columns=cols)

    for sigma in cfg.sigmas:
        print(f"\nsigma = {sigma} nT   (median over {len(cfg.seeds)} seeds, noiseless test set)")
        print(f"{'coverage':>9} " + " ".join(f"{m + ' PTP':>12} {m + ' var':>12}" for m in cfg.methods))
        for c in cfg.coverages:
            cells = {r["method"]: r for r in summary if r["coverage"] == c and r["sigma"] == sigma}
            print(f"{c:>9.0%} " + " ".join(
                f"{cells[m]['ptp']:>12.4g} {cells[m]['variance']:>12.4g}" for m in cfg.methods))
        for m in cfg.methods:
            series = [r["ptp"] for r in summary if r["sigma"] == sigma and r["method"] == m]
            print(f"  {m}: inversions {count_inversions(series)}")
    print(f"\n{len(rows)} runs in {time.perf_counter() - t0:.0f} s -> {args.out}")


if __name__ == "__main__":
    main()
