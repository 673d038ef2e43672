"""Brute-force reference computations, written independently of the package.

Every function here works from first principles (enumeration of points,
state paths or windows) with plain Python integers and Fractions.
"""

from fractions import Fraction
from itertools import product

import mpmath


def cylinder_ok(seq, constraints, offset=0):
    return all(seq[offset + p] == s for p, s in constraints)


def finite_system(weights, perm, A, constraints):
    """Sum of the weights of the points whose A-itinerary satisfies the constraints."""
    total = Fraction(0)
    for x, w in enumerate(weights):
        y, it = x, {}
        horizon = max((p for p, _ in constraints), default=-1) + 1
        for t in range(horizon):
            it[t] = 1 if y in A else 0
            y = perm[y]
        if all(it[p] == s for p, s in constraints):
            total += Fraction(w)
    return total


def markov(P, pi, label, constraints):
    """Sum over state paths of the path probability, filtered by labels."""
    m = len(pi)
    n = max((p for p, _ in constraints), default=-1) + 1
    if n == 0:
        return Fraction(1)
    total = Fraction(0)
    for path in product(range(m), repeat=n):
        if not all(label[path[p]] == s for p, s in constraints):
            continue
        pr = Fraction(pi[path[0]])
        for a, b in zip(path, path[1:]):
            pr *= Fraction(P[a][b])
        total += pr
    return total


def bernoulli(p, constraints):
    p = Fraction(p)
    r = Fraction(1)
    for _, s in constraints:
        r *= p if s else 1 - p
    return r


def periodic(word, constraints):
    n = len(word)
    hits = sum(all(int(word[(i + p) % n]) == s for p, s in constraints) for i in range(n))
    return Fraction(hits, n)


def rotation(alpha, a, b, constraints, dps=60):
    """Lebesgue measure of the x in [0,1) whose rotation itinerary meets the constraints.

    Cuts the circle at every translate of the interval endpoints and tests
    the midpoint of each piece.
    """
    with mpmath.workdps(dps):
        def real(v):
            v = Fraction(v) if isinstance(v, (int, Fraction)) else v
            return mpmath.mpf(v.numerator) / v.denominator if isinstance(v, Fraction) else mpmath.mpf(v)
        alpha, a, b = real(alpha), real(a), real(b)
        cuts = {mpmath.mpf(0)}
        for p, _ in constraints:
            for e in (a, b):
                cuts.add(mpmath.frac(e - p * alpha))
        cuts = sorted(cuts) + [mpmath.mpf(1)]
        total = mpmath.mpf(0)
        for lo, hi in zip(cuts, cuts[1:]):
            if hi <= lo:
                continue
            mid = (lo + hi) / 2
            if all((a <= mpmath.frac(mid + p * alpha) < b) == bool(s) for p, s in constraints):
                total += hi - lo
        return total


def cyclic_frequency(word, constraints):
    return periodic(word, constraints)


def count_windows(bits, shifts, N):
    return sum(all(bits[i + s] == 1 for s in shifts) for i in range(N))
