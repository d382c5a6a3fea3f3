"""Time the frontier-scan solver against the full-rescan baseline.

The specialized solver's work per doubling of n grows roughly 4x (plus a
log), the generic one's roughly 8x.  Sizes here are kept small so the demo
finishes in seconds; pass --full for the 100/200/400 comparison.

Run: python demos/demo_scaling.py [--full]
"""
import sys

from adtypes import bench_scaling


def main():
    full = "--full" in sys.argv[1:]
    sizes = [(100, 4), (200, 4), (400, 4)] if full else \
        [(40, 4), (80, 4), (160, 4)]
    report = bench_scaling(sizes, reps=3)
    print(report.to_csv())
    for solver in ("adtypes", "generic"):
        ratios = [report.median_ms(sizes[i + 1][0], 4, solver)
                  / report.median_ms(sizes[i][0], 4, solver)
                  for i in range(len(sizes) - 1)]
        print(f"{solver:>8} doubling ratios: "
              + ", ".join(f"{r:.2f}" for r in ratios))


if __name__ == "__main__":
    main()
