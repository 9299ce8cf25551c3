"""
Glider safari: tracking localizations in random soups
=====================================================

Seed a small random patch in the middle of an empty torus, let the automaton
run, and classify every pattern that survives in the trailing window: still
lifes, oscillators ("breathers"), gliders, puffer trains -- or Unresolved
when a track merges, splits, or never settles into a period.
"""

import argparse

import numpy as np

from hexreact import FitnessConfig, bundled_glider_rule, fitness, run, track
from hexreact.detector import REPORT_HEADER, random_patch_grid, report_rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("--seed", type=int, default=4, help="rng seed (default 4)")
    ap.add_argument("--trials", type=int, default=5, help="soups to run (default 5)")
    args = ap.parse_args()

    rule = bundled_glider_rule()
    cfg = FitnessConfig()  # 16x16 patch on a 64x64 torus, 200 steps, window 48
    rng = np.random.default_rng(args.seed)

    print("rule:", rule.to_genome())
    print(f"{args.trials} soups, {cfg.width}x{cfg.height} torus, "
          f"{cfg.steps} steps, window {cfg.window}\n")

    print(REPORT_HEADER)
    histogram: dict[str, int] = {}
    for trial in range(args.trials):
        grid = random_patch_grid(cfg, rng)
        traj = run(grid, rule, cfg.steps, keep_last=cfg.window)
        locs = track(traj, p_max=cfg.p_max)
        for row in report_rows(locs, trial):
            print(row)
        for loc in locs:
            histogram[loc.loc_class] = histogram.get(loc.loc_class, 0) + 1

    print("\ncensus:", dict(sorted(histogram.items())))

    # the fitness the evolutionary search optimizes: mobile localizations
    # per cell per trial
    score = fitness(rule, cfg, np.random.default_rng(args.seed))
    print(f"soup fitness of this rule at seed {args.seed}: {score:.5f}")


if __name__ == "__main__":
    main()
