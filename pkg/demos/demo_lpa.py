"""Case-enrichment demo: attenuation of a genetic association with Lp(a).

A binary outcome with a real instrument effect is studied twice per
confounding level: once in a random population sample and once in a
case-enriched sample (the first individuals meeting the selection rule).
As the shared confounder loading grows, the case-enriched design shrinks
the estimated log-odds slope — and with it the power — even though the
true effect never changes.

Reference values correspond to 10000 replications; the default here is a
quick 200-replication sketch.

    python demos/demo_lpa.py --reps 200
"""
from __future__ import annotations

import argparse
from collections import defaultdict

from mrsel.model import SelectionPolicy
from mrsel.scenarios import catalog_lookup, run_cell


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--reps", type=int, default=200)
    parser.add_argument("--workers", type=int, default=None)
    args = parser.parse_args()

    rows: dict[float, dict[str, tuple[float, float]]] = defaultdict(dict)
    for cell in catalog_lookup("lpa.table4").cells:
        result = run_cell(cell, reps=args.reps, workers=args.workers)
        stats = result.summaries["logistic_association"]
        arm = ("selected"
               if cell.config.selection_policy is SelectionPolicy.FIRST_N_SELECTED
               else "population")
        rows[cell.config.beta_u][arm] = (stats.mean, stats.rejection_rate)

    print(f"Mean slope estimate and power by arm ({args.reps} replications)\n")
    print(f"{'beta_u':>7} {'population':>12} {'power':>7} "
          f"{'case-enriched':>14} {'power':>7}")
    for beta_u in sorted(rows):
        pop, sel = rows[beta_u]["population"], rows[beta_u]["selected"]
        print(f"{beta_u:>7.1f} {pop[0]:>12.3f} {pop[1]:>7.3f} "
              f"{sel[0]:>14.3f} {sel[1]:>7.3f}")

    print("\nBoth arms attenuate as confounding grows, the case-enriched")
    print("arm roughly twice as fast.")


if __name__ == "__main__":
    main()
