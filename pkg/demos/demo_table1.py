"""Baseline grid demo: how selection on the risk factor biases the ratio.

Runs the nine-cell baseline grid at a reduced replication count and prints
the observed median bias, mean, and rejection rate next to the catalog's
reference values. With the default 200 replications this takes about half
a minute on one core.

    python demos/demo_table1.py --reps 200
"""
from __future__ import annotations

import argparse

from mrsel.scenarios import catalog_lookup, check_cell, run_cell


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=200)
    parser.add_argument("--workers", type=int, default=None)
    args = parser.parse_args()

    entry = catalog_lookup("table1")
    print(f"{entry.title} — {args.reps} replications per cell\n")
    print(f"{'gamma_x':>8} {'median':>9} {'ref':>7} {'mean':>9} "
          f"{'rejection':>10} {'ref':>7}  checks")
    for cell in entry.cells:
        result = run_cell(cell, reps=args.reps, workers=args.workers)
        stats = result.summaries["ratio"]
        refs = {e.column: e.value for e in cell.expectations["ratio"]}
        checks = check_cell(cell, result)
        n_bad = sum(1 for c in checks if c.blocking_failure)
        verdict = "ok" if n_bad == 0 else f"{n_bad} off"
        print(f"{cell.config.gamma_x:>8.1f} {stats.median:>9.3f} "
              f"{refs['median']:>7.3f} {stats.mean:>9.3f} "
              f"{stats.rejection_rate:>10.3f} {refs['rejection']:>7.3f}  {verdict}")

    print("\nSelection that depends on the risk factor in either direction")
    print("biases the ratio toward negative values and inflates rejection")
    print("of the true null far beyond the nominal 5% level.")


if __name__ == "__main__":
    main()
