"""Exact series for the 1D nearest-neighbour scheme.

``p(i, j)`` is the probability that, walking left from the origin, the marks
increase towards the origin for ``i`` steps before a local minimum, and walking
right they decrease for ``j`` steps before one. The origin ends up occupied
exactly when both ``i`` and ``j`` are even, which turns partial sums into
rigorous bounds on the limit density.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

# lower: even-even block i, j <= N.
# upper: 1 - (odd-right and odd-left blocks over i, j <= N, plus odd-odd over i, j <= N-1).
# At N = 2 this gives 0.4339; larger N extend the same pattern.
UPPER_PATTERN = "mixed-parity blocks over 0..N, odd-odd block over 0..N-1"


def p(i: int, j: int, exact: bool = False):
    """Probability of the local-minimum geometry with left index ``i`` and right index ``j``."""
    if i < 0 or j < 0:
        raise ValueError("indices must be nonnegative")
    s = i + j
    fi, fj, fi1, fj1 = factorial(i), factorial(j), factorial(i + 1), factorial(j + 1)
    val = (Fraction(i * j, (s + 3) * fi1 * fj1)
           + Fraction(2, (s + 3) * (s + 2) * (s + 1) * fi * fj)
           + Fraction(1, (s + 3) * (s + 2)) * (Fraction(i, fi1 * fj) + Fraction(j, fj1 * fi)))
    return val if exact else float(val)


@dataclass(frozen=True)
class SeriesBounds:
    N: int
    lower: float
    upper: float
    mass_accounted: float
    pattern: str = UPPER_PATTERN

    def as_dict(self) -> dict:
        return {"N": self.N, "lower": self.lower, "upper": self.upper,
                "total_mass": self.mass_accounted, "upper_pattern": self.pattern}


def _lower(N: int) -> Fraction:
    return sum((p(2 * i, 2 * j, True) for i in range(N + 1) for j in range(N + 1)), Fraction(0))


def _complement(N: int) -> Fraction:
    total = Fraction(0)
    for i in range(N + 1):
        for j in range(N + 1):
            total += p(2 * i, 2 * j + 1, True) + p(2 * i + 1, 2 * j, True)
    for i in range(N):
        for j in range(N):
            total += p(2 * i + 1, 2 * j + 1, True)
    return total


def rho_bounds(N: int, exact: bool = False):
    """Rigorous lower/upper bounds on the 1D nearest-neighbour jamming density."""
    if N < 0:
        raise ValueError("order must be nonnegative")
    lo, up = _lower(N), 1 - _complement(N)
    mass = total_mass(2 * N + 1, exact=True)
    if exact:
        return lo, up, mass
    return SeriesBounds(N, float(lo), float(up), float(mass))


def total_mass(N: int, exact: bool = False):
    """Sum of ``p(i, j)`` over ``0 <= i, j <= N``."""
    if N < 0:
        raise ValueError("order must be nonnegative")
    m = sum((p(i, j, True) for i in range(N + 1) for j in range(N + 1)), Fraction(0))
    return m if exact else float(m)


def linear_extension_probability(i: int, j: int) -> Fraction:
    """Independent oracle for ``p(i, j)``: count orderings of the marks on sites -i-1..j+1.

    The event is w[-i-1] > w[-i] < w[-i+1] < ... < w[0] > w[1] > ... > w[j] < w[j+1].
    """
    sites = list(range(-i - 1, j + 2))
    k = len(sites)
    if k > 9:
        raise ValueError("too many sites to enumerate")
    hits = 0
    for ranks in itertools.permutations(range(k)):
        w = dict(zip(sites, ranks))
        if (w[-i - 1] > w[-i]
                and all(w[t] < w[t + 1] for t in range(-i, 0))
                and all(w[t] > w[t + 1] for t in range(0, j))
                and w[j] < w[j + 1]):
            hits += 1
    return Fraction(hits, factorial(k))


def brute_force_rho_segment(k: int) -> Fraction:
    """Mean jamming density of nearest-neighbour parking on a path of ``k`` sites, over all k! orders."""
    if k < 1:
        raise ValueError("segment length must be positive")
    if k > 10:
        raise ValueError("segment too long to enumerate")
    total = 0
    for order in itertools.permutations(range(k)):
        occ = [False] * k
        for x in order:
            if not (x > 0 and occ[x - 1]) and not (x < k - 1 and occ[x + 1]):
                occ[x] = True
        total += sum(occ)
    return Fraction(total, factorial(k) * k)
