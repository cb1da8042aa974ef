#!/usr/bin/env python3
"""Which walks mix fast and which stall: classify driving matrices.

The dichotomy is spectral. If no complex eigenvalue of T sits on the
unit circle, the walk x -> T x + b (mod p) reaches near-uniform in
O((log p)^2) steps. If some eigenvalue is a root of unity, a direction
survives for ~p^b steps. The classifier decides this exactly (cyclotomic
factors by integer division, never floating point).
"""

from affinewalk.modmath import IntMatrix
from affinewalk.spectral import classify

CASES = [
    ("Fibonacci-like, eigenvalues (3 +/- sqrt 5)/2", [[2, 1], [1, 1]]),
    ("upper triangular with eigenvalue 1", [[1, 1], [0, 2]]),
    ("quarter rotation, eigenvalues +/- i", [[0, -1], [1, 0]]),
    ("negated identity, eigenvalue -1", [[-1, 0], [0, -1]]),
    ("rank one (singular)", [[1, 1], [1, 1]]),
    ("Salem-like companion, two roots exactly on the circle",
     [[0, 0, 0, -1], [1, 0, 0, 1], [0, 1, 0, 1], [0, 0, 1, 1]]),
]

for name, rows in CASES:
    T = IntMatrix(rows)
    rep = classify(T)
    eigs = ", ".join(
        f"{z.real:+.4f}{z.imag:+.4f}i (x{m})" for z, m in rep.eigenvalues
    )
    print(f"{T.tag()}  [{name}]")
    print(f"  charpoly coeffs (ascending): {rep.charpoly.coeffs}")
    print(f"  eigenvalues: {eigs or 'n/a'}")
    tag = rep.classification.value
    if rep.root_of_unity_order is not None:
        tag += f" (order m = {rep.root_of_unity_order})"
    print(f"  classification: {tag}")
    print()
