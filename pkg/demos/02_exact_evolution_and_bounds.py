#!/usr/bin/env python3
"""Ground truth at desk scale: dense evolution and the bound sandwich.

At p = 5, d = 2 every one of the 25 state probabilities is tracked
exactly, so the character upper bound and the single-character lower
bound can be checked against the true total variation at every step.
"""

from affinewalk.exactdist import WalkConfig
from affinewalk.fourier import bound_series
from affinewalk.modmath import IntMatrix

cfg = WalkConfig(IntMatrix([[2, 1], [1, 1]]), 5)
series = bound_series(cfg, range(0, 16))

print(f"walk: T = {cfg.T.tag()}, p = {cfg.p}, {cfg.num_states} states")
print(f"{'n':>3} {'lower':>12} {'exact TV':>12} {'upper':>12}")
for i, n in enumerate(series.n):
    ub = min(series.ub[i], 1.0)  # the bound is vacuous above 1
    print(f"{n:>3} {series.lb[i]:>12.6f} {series.tv_exact[i]:>12.6f} {ub:>12.6f}")

sandwich = all(
    series.lb[i] - 1e-12 <= series.tv_exact[i] <= series.ub[i] + 1e-12
    for i in range(len(series.n))
)
print(f"\nlower <= exact <= upper at every step: {sandwich}")
print("\nsame table as CSV (the `affinewalk bounds` output format):\n")
print(series.to_csv(header_comment="demo run"))
