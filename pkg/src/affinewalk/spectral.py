"""Spectrum of the driving matrix: exact characteristic polynomial,
certified complex roots, root-of-unity detection, and the classification
that separates the fast-mixing regime (no eigenvalue on the unit circle)
from the slow one (a cyclotomic factor).

Root-of-unity detection is exact integer polynomial division and never
consults floating point; the numeric root finder only feeds the
off-circle / near-circle distinction.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import mpmath
import numpy as np
from mpmath.libmp import NoConvergence

from .errors import RootConvergenceError
from .modmath import IntMatrix, int_det

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class CharPoly:
    """Monic integer polynomial det(xI - T), coefficients ascending
    (coeffs[k] multiplies x^k)."""

    coeffs: tuple[int, ...]

    def __init__(self, coeffs: Sequence[int]):
        cs = tuple(int(c) for c in coeffs)
        if len(cs) < 2 or cs[-1] != 1:
            raise ValueError("characteristic polynomial must be monic of degree >= 1")
        object.__setattr__(self, "coeffs", cs)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x: complex) -> complex:
        acc = 0.0 + 0.0j
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc


class Classification(str, Enum):
    SINGULAR = "singular"
    ALL_OFF_UNIT_CIRCLE = "all_off_unit_circle"
    ROOT_OF_UNITY = "root_of_unity"
    UNIT_MODULUS_NON_CYCLOTOMIC = "unit_modulus_non_cyclotomic"
    BORDERLINE = "borderline"


@dataclass(frozen=True)
class SpectrumReport:
    charpoly: CharPoly
    eigenvalues: tuple[tuple[complex, int], ...]  # (value, multiplicity)
    moduli: tuple[float, ...]
    classification: Classification
    root_of_unity_order: Optional[int]
    tolerance: float

    def to_json(self) -> str:
        doc = {
            "charpoly": list(self.charpoly.coeffs),
            "eigenvalues": [[z.real, z.imag, m] for z, m in self.eigenvalues],
            "classification": self.classification.value,
            "tolerance": self.tolerance,
        }
        if self.root_of_unity_order is not None:
            doc["m"] = self.root_of_unity_order
        return json.dumps(doc, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "SpectrumReport":
        doc = json.loads(text)
        eig = tuple((complex(re, im), int(m)) for re, im, m in doc["eigenvalues"])
        return cls(
            charpoly=CharPoly(doc["charpoly"]),
            eigenvalues=eig,
            moduli=tuple(abs(z) for z, _ in eig),
            classification=Classification(doc["classification"]),
            root_of_unity_order=doc.get("m"),
            tolerance=float(doc["tolerance"]),
        )


@dataclass(frozen=True)
class JordanBlockSpec:
    """One Jordan block: eigenvalue on the diagonal, ones above it."""

    eigenvalue: complex
    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("block size must be >= 1")


def char_poly(T: IntMatrix) -> CharPoly:
    """det(xI - T) by the Faddeev-LeVerrier recurrence; every division is
    an exact integer division (asserted)."""
    d = T.dim
    desc = [1]  # coefficients, descending powers
    M = IntMatrix.identity(d)
    for k in range(1, d + 1):
        AM = T @ M
        t = AM.trace()
        q, r = divmod(-t, k)
        if r:
            raise AssertionError("Faddeev-LeVerrier trace not divisible")
        desc.append(q)
        M = AM + IntMatrix.identity(d).scale(q)
    return CharPoly(tuple(reversed(desc)))


# -- exact integer / rational polynomial helpers (ascending coefficients) --


def _poly_trim(c: list) -> list:
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def _poly_mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _poly_trim(out)


def _poly_divmod_monic(num: Sequence[int], den: Sequence[int]) -> tuple[list[int], list[int]]:
    """Quotient and remainder over Z when den is monic."""
    if den[-1] != 1:
        raise ValueError("divisor must be monic")
    num = list(num)
    dn = len(den) - 1
    if len(num) - 1 < dn:
        return [0], _poly_trim(num)
    quot = [0] * (len(num) - dn)
    for k in range(len(num) - 1, dn - 1, -1):
        c = num[k]
        quot[k - dn] = c
        if c:
            for j in range(dn + 1):
                num[k - dn + j] -= c * den[j]
    return _poly_trim(quot), _poly_trim(num)


def _poly_divides(den: Sequence[int], num: Sequence[int]) -> bool:
    _, rem = _poly_divmod_monic(list(num), list(den))
    return rem == [0]


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Coefficients of the n-th cyclotomic polynomial, ascending."""
    if n == 1:
        return (-1, 1)
    num = [0] * (n + 1)
    num[0], num[n] = -1, 1  # x^n - 1
    quot = num
    for q in range(1, n):
        if n % q == 0:
            quot, rem = _poly_divmod_monic(quot, list(cyclotomic_poly(q)))
            assert rem == [0]
    return tuple(quot)


def _euler_phi(n: int) -> int:
    result = n
    m = n
    q = 2
    while q * q <= m:
        if m % q == 0:
            while m % q == 0:
                m //= q
            result -= result // q
        q += 1
    if m > 1:
        result -= result // m
    return result


def cyclotomic_order(cp: CharPoly) -> Optional[int]:
    """Smallest m with the m-th cyclotomic polynomial dividing cp exactly
    over Z, or None. Candidates are all k <= 2 d^2 with phi(k) <= d; the
    bound follows from phi(k) >= sqrt(k/2)."""
    d = cp.degree
    for k in range(1, 2 * d * d + 1):
        if _euler_phi(k) <= d and _poly_divides(cyclotomic_poly(k), cp.coeffs):
            return k
    return None


def complex_roots(
    cp: CharPoly, tol: float = DEFAULT_TOL, max_attempts: int = 4
) -> list[tuple[complex, int]]:
    """All roots of cp with certified residuals, roots within tol of each
    other merged into one entry with summed multiplicity.

    Uses simultaneous (Durand-Kerner) iteration at increasing working
    precision; raises RootConvergenceError if no attempt both converges
    and certifies.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    desc = [mpmath.mpf(c) for c in reversed(cp.coeffs)]
    dps, extraprec, maxsteps = 30, 40, 200
    roots = None
    for _ in range(max_attempts):
        try:
            with mpmath.workdps(dps):
                found = mpmath.polyroots(desc, maxsteps=maxsteps, extraprec=extraprec)
            candidates = [complex(r) for r in found]
        except NoConvergence:
            candidates = None
        if candidates is not None and all(
            _residual_ok(cp, r, tol) for r in candidates
        ):
            roots = candidates
            break
        dps *= 2
        extraprec *= 2
        maxsteps *= 2
    if roots is None:
        raise RootConvergenceError(
            f"root refinement failed for degree {cp.degree} polynomial"
        )
    return _cluster_roots(roots, tol)


def _residual_ok(cp: CharPoly, r: complex, tol: float) -> bool:
    scale = sum(abs(c) * max(1.0, abs(r)) ** k for k, c in enumerate(cp.coeffs))
    return abs(cp(r)) <= 1e-8 * scale + 1e-300


def _cluster_roots(roots: list[complex], tol: float) -> list[tuple[complex, int]]:
    remaining = sorted(roots, key=lambda z: (z.real, z.imag))
    clusters: list[tuple[complex, int]] = []
    while remaining:
        seed = remaining.pop(0)
        members = [seed]
        rest = []
        for z in remaining:
            if abs(z - seed) <= tol:
                members.append(z)
            else:
                rest.append(z)
        remaining = rest
        mean = sum(members) / len(members)
        clusters.append((mean, len(members)))
    return clusters


def _reciprocal_gcd_degree(cp: CharPoly) -> tuple[int, list[complex]]:
    """Degree of gcd(cp(x), x^d cp(1/x)) over Q, plus the gcd's roots.

    A monic integer polynomial with a root on the unit circle shares that
    root with its coefficient-reversal, so a nontrivial gcd is a necessary
    (exact) witness; the returned roots let the caller confirm one
    actually sits on the circle.
    """
    a = [Fraction(c) for c in cp.coeffs]
    b = [Fraction(c) for c in reversed(cp.coeffs)]

    def trim(c):
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        return c

    def pdivmod(num, den):
        num = list(num)
        q = [Fraction(0)] * max(1, len(num) - len(den) + 1)
        inv = 1 / den[-1]
        for k in range(len(num) - 1, len(den) - 2, -1):
            c = num[k] * inv
            q[k - (len(den) - 1)] = c
            if c:
                for j, dcoef in enumerate(den):
                    num[k - (len(den) - 1) + j] -= c * dcoef
        return trim(q), trim(num)

    a, b = trim(a), trim(b)
    while b != [Fraction(0)]:
        _, r = pdivmod(a, b)
        a, b = b, r
    g = a
    if len(g) - 1 < 1:
        return 0, []
    # normalize monic, then find the gcd's roots numerically
    lead = g[-1]
    gf = [float(c / lead) for c in g]
    groots = np.roots(list(reversed(gf)))
    return len(g) - 1, [complex(z) for z in groots]


def classify(T: IntMatrix, tol: float = DEFAULT_TOL) -> SpectrumReport:
    """Classify T by its complex spectrum.

    Order of tests: exact singularity, exact cyclotomic factor (overrides
    any numerics), then the numeric all-off-circle / near-circle split
    with an exact reciprocal-polynomial confirmation for unit-modulus
    non-cyclotomic spectra.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    cp = char_poly(T)
    if int_det(T) == 0:
        return SpectrumReport(cp, (), (), Classification.SINGULAR, None, tol)
    m = cyclotomic_order(cp)
    eig = tuple(complex_roots(cp, tol))
    moduli = tuple(abs(z) for z, _ in eig)
    if m is not None:
        return SpectrumReport(cp, eig, moduli, Classification.ROOT_OF_UNITY, m, tol)
    if all(abs(r - 1.0) > tol for r in moduli):
        return SpectrumReport(
            cp, eig, moduli, Classification.ALL_OFF_UNIT_CIRCLE, None, tol
        )
    gdeg, groots = _reciprocal_gcd_degree(cp)
    if gdeg >= 1 and any(abs(abs(z) - 1.0) <= tol for z in groots):
        return SpectrumReport(
            cp, eig, moduli, Classification.UNIT_MODULUS_NON_CYCLOTOMIC, None, tol
        )
    return SpectrumReport(cp, eig, moduli, Classification.BORDERLINE, None, tol)


def jordan_power(block: JordanBlockSpec, ell: int):
    """Entrywise closed form for the ell-th power of a Jordan block:
    a^ell on the diagonal, C(ell, j-i) a^(ell-(j-i)) above it (binomial 0
    when j-i > ell), zero below. Binomials are exact big integers before
    the complex conversion."""
    if ell < 0:
        raise ValueError("exponent must be >= 0")
    c = block.size
    a = complex(block.eigenvalue)
    out = np.zeros((c, c), dtype=complex)
    for i in range(c):
        for j in range(i, c):
            k = j - i
            if k > ell:
                continue
            binom = math.comb(ell, k)
            out[i, j] = binom * a ** (ell - k)
    return out
