#!/usr/bin/env python3
"""The (log p)^2 law, measured.

For a matrix with no unit-circle eigenvalue, the number of steps until
the character upper bound drops below epsilon should grow like a
constant times (log p)^2. Sweep p, fit the constant, look at residuals.
"""

import math

from affinewalk.exactdist import WalkConfig
from affinewalk.fourier import mixing_time
from affinewalk.modmath import IntMatrix
from affinewalk.montecarlo import scaling_sweep, sweep_csv

T = IntMatrix([[2, 1], [1, 1]])
ps = [11, 31, 101, 211, 401]
eps = 0.25

print(f"T = {T.tag()}, epsilon = {eps}, method = character upper bound\n")
print(f"{'p':>5} {'n_mix':>6} {'n/(ln p)^2':>11}")
for p in ps:
    n = mixing_time(WalkConfig(T, p), eps, method="ub")
    print(f"{p:>5} {n:>6} {n / math.log(p) ** 2:>11.4f}")

reports = scaling_sweep([T], ps, eps, method="ub")
rep = reports[0]
print(f"\nfitted constant C in n_mix ~ C (ln p)^2: {rep.fit_value:.4f}")
print(f"log-domain residuals: {['%.3f' % r for r in rep.residuals]}")
print("\nsweep CSV (the `affinewalk sweep` output format):\n")
print(sweep_csv(reports, header_comment="demo run"))
