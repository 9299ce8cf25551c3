"""
First steps: grids, rules, and a traveling localization
========================================================

Build a hexagonal torus, write a rule table, advance the automaton, and
watch the bundled glider crawl across an empty field.
"""

import numpy as np

from hexreact import Grid, RuleMatrix, bundled_glider_rule, bundled_glider_seed, run, step
from hexreact.rules import random_rule

# A grid is a torus of hexagonal cells in odd-r offset layout: even rows sit
# half a cell left of odd rows, and everything wraps.  Cell values are
# 0 (substrate, printed "."), 1 (reactant A) and 2 (reactant B).
g = Grid.filled(8, 12)
g[3, 4] = 1
g[3, 5] = 2
g[4, 4] = 1
print("a small seeded torus:")
print(g.to_text())

# A rule is a 36-entry table: the next state of a cell depends only on how
# many A's and how many B's sit in its 7-cell neighbourhood (itself plus six
# neighbours).  The table serializes as a 36-letter genome over S/A/B.
rule = random_rule(np.random.default_rng(7))
print("\na random rule genome:", rule.to_genome())

# The all-substrate grid is a fixed point of every rule: count (0, 0) is
# pinned to S so an empty field stays empty.
empty = Grid.filled(8, 12)
assert step(empty, rule) == empty
print("empty field stays empty: OK")

# The package ships a rule found by likelihood-guided random search whose
# soups emit gliders.  Planted alone, its seed travels cleanly forever.
glider_rule = bundled_glider_rule()
seed = bundled_glider_seed()
print("\nbundled glider rule:", glider_rule.to_genome())

traj = run(seed, glider_rule, 6)
for t, frame in enumerate(traj.frames):
    live = np.argwhere(frame.cells != 0)
    r0, c0 = live.min(axis=0)
    r1, c1 = live.max(axis=0) + 1
    window = frame.cells[max(0, r0 - 1):r1 + 1, max(0, c0 - 1):c1 + 1]
    print(f"\nt = {t}  ({len(live)} live cells, columns {c0}..{c1 - 1})")
    for r, row in enumerate(window):
        indent = " " if (r + max(0, r0 - 1)) % 2 else ""
        print("   " + indent + " ".join(".AB"[v] for v in row))

print("\nthe shape recurs every 2 steps, two columns east -- a glider.")
