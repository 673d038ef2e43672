"""Periodic approximants: finite words whose cyclic statistics match a measure.

A word is certified against a measure ``nu`` at order ``k`` by comparing
its cyclic k-block histogram with the exact k-block law of ``nu``.  For
``k <= EXACT_MAX_ORDER`` the certificate is the exact maximum of
``|delta_p(x)(C) - nu(C)|`` over all ``3**k`` cylinders of order at most
``k``.  Above that it is the total-variation distance between the two
k-block laws, which bounds that maximum from above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np

from corrset import _kernels
from corrset.core import Word, concat
from corrset.errors import CertificationError, ConstructionError, InputError
from corrset.measures import BlockLaw, PeriodicOrbit, ShiftMeasure, ergodic_decomposition

EXACT_MAX_ORDER = 12
_INT64_SAFE = 1 << 62
DEFAULT_MAX_LENGTH = 1 << 28
GROWTH = 1.5
SAMPLE_SEED = 20240607


@lru_cache(maxsize=4)
def block_law(nu: ShiftMeasure, k: int) -> BlockLaw:
    """Cached ``nu.block_law(k)``."""
    return nu.block_law(k)


def cyclic_block_counts(word: Word, k: int) -> np.ndarray:
    """Histogram of the cyclic k-windows of ``word`` indexed by big-endian code."""
    if len(word) == 0:
        raise InputError("empty word")
    return _kernels.cyclic_block_counts(word.bits, k)


def _max_subcube(E: np.ndarray, k: int):
    """``max |sum of E over C|`` over all cylinders C of order <= k (3**k of them)."""
    T = E.reshape((2,) * k) if k else E
    for axis in range(k):
        T = np.concatenate([T, T.sum(axis=axis, keepdims=True)], axis=axis)
    if T.dtype == np.int64:
        return int(np.abs(T).max())
    return max(abs(v) for v in T.ravel())


def law_deviation(counts: np.ndarray, total: int, nums: np.ndarray, denom: int, k: int,
                  exhaustive: bool | None = None, exact: bool = True, precision: int = 0):
    """Deviation between ``counts / total`` and ``nums / denom`` on k-blocks.

    Returns ``(value, exhaustive)``: the exact max over cylinders of order
    <= k when exhaustive, otherwise the total-variation upper bound.
    ``exact=False`` marks ``mpf`` numerators, evaluated at ``precision``
    decimal digits.
    """
    if exhaustive is None:
        exhaustive = k <= EXACT_MAX_ORDER
    scale = total * denom
    if not exact:
        with mpmath.workdps(max(precision, mpmath.mp.dps) + 10):
            E = counts.astype(object) * denom - nums * total
            top = _max_subcube(E, k) if exhaustive else mpmath.fsum(abs(v) for v in E) / 2
            return mpmath.mpf(top) / scale, exhaustive
    if 2 * scale < _INT64_SAFE:
        # every cylinder sum is bounded by 2 * scale, so int64 is exact here
        E = counts.astype(np.int64) * denom - np.array(nums * total, dtype=np.int64)
    else:
        E = counts.astype(object) * denom - nums * total
    if exhaustive:
        top = _max_subcube(E, k)
    else:
        total_abs = int(np.abs(E).sum()) if E.dtype == np.int64 else sum(abs(v) for v in E)
        top = Fraction(total_abs, 2)
    return Fraction(top) / scale, exhaustive


def below(value, bound: Fraction) -> bool:
    """``value < bound`` for a Fraction or an ``mpf`` value against a rational bound."""
    if isinstance(value, Fraction):
        return value < bound
    return value * bound.denominator < bound.numerator


def certify_word(word: Word, law: BlockLaw, exhaustive: bool | None = None):
    """``(deviation, exhaustive)`` of the cyclic statistics of ``word`` from ``law``."""
    counts = cyclic_block_counts(word, law.k)
    return law_deviation(counts, len(word), law.numerators, law.denominator, law.k, exhaustive, law.exact,
                         law.precision)


def _float_screen(counts, total, probs, k):
    """Cheap float estimate of the same deviation; used only to skip hopeless exact checks."""
    e = counts / total - probs
    if k <= EXACT_MAX_ORDER:
        T = e.reshape((2,) * k)
        for axis in range(k):
            T = np.concatenate([T, T.sum(axis=axis, keepdims=True)], axis=axis)
        return float(np.abs(T).max())
    return float(np.abs(e).sum() / 2)


_AMBIGUOUS = 1e-6


def _nearest_counts(law: BlockLaw, n: int, probs: np.ndarray):
    """Nearest-integer rounding of ``n * law`` with exact tie and integrality handling.

    Returns ``(g, can_up, can_down)``: the rounded counts and which entries
    may move one step up or down while staying within ``[floor, ceil]``.
    Float arithmetic decides every entry whose fractional part is not
    within ``1e-6`` of 0 or 1/2; the rest are settled exactly.
    """
    t = probs * n
    g = np.floor(t + 0.5)
    frac = t - np.floor(t)
    can_up = g < t
    can_down = g > t
    risky = np.nonzero((np.abs(frac - 0.5) < _AMBIGUOUS) | (frac < _AMBIGUOUS) | (frac > 1 - _AMBIGUOUS))[0]
    g = g.astype(np.int64)
    if risky.size:
        nums, D = law.numerators, law.denominator
        if law.exact:
            for i in risky:
                num = int(nums[i]) * n
                gi = (2 * num + D) // (2 * D)
                g[i] = gi
                can_up[i] = gi * D < num
                can_down[i] = gi * D > num
        else:
            with mpmath.workdps(mpmath.mp.dps + 20):
                for i in risky:
                    ti = nums[i] * n
                    gi = int(mpmath.floor(ti + mpmath.mpf(1) / 2))
                    g[i] = gi
                    can_up[i] = gi < ti
                    can_down[i] = gi > ti
    return g, can_up, can_down


def _rounded_counts(law: BlockLaw, n: int, probs: np.ndarray) -> np.ndarray:
    """Integer k-block counts near ``n * law`` forming a balanced de Bruijn circulation.

    Starts from nearest rounding, then moves individual edges to the other
    neighbouring integer along augmenting paths so that every node's in-
    and out-degree agree.
    """
    k = law.k
    g, can_up, can_down = _nearest_counts(law, n, probs)
    if k == 1:
        return g
    g = g.copy()
    if not _kernels.balance_counts(g, can_up, can_down, k):
        raise CertificationError("could not balance rounded block counts")
    return g


def _debruijn_word(law: BlockLaw, n: int, probs: np.ndarray) -> Word:
    counts = _rounded_counts(law, n, probs)
    total = int(counts.sum())
    if total == 0:
        return Word("")
    return Word(_kernels.eulerian_word(counts.copy(), law.k, total))


def _sampled_word(law: BlockLaw, n: int, probs: np.ndarray) -> Word:
    k = law.k
    rng = np.random.Generator(np.random.PCG64(SAMPLE_SEED + k))
    if k == 1:
        return Word((rng.random(n) < probs[1]).astype(np.uint8))
    pair = probs.reshape(-1, 2)
    node_mass = pair.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        q1 = np.where(node_mass > 0, pair[:, 1] / node_mass, 0.0)
    start = int(np.searchsorted(np.cumsum(node_mass), rng.random() * node_mass.sum(), side="right"))
    start = min(start, node_mass.size - 1)
    return Word(_kernels.markov_walk(q1, start, rng.random(n), k))


def ergodic_word(nu: ShiftMeasure, k: int, eps, n_min: int = 1, *,
                 strategy: str = "debruijn", max_length: int = DEFAULT_MAX_LENGTH) -> Word:
    """A word ``w`` with ``|w| >= n_min`` whose cyclic order-k statistics are within ``eps`` of ``nu``.

    ``strategy`` is ``"debruijn"`` (frequency-matched Eulerian assembly) or
    ``"sample"`` (fixed-seed sampling).  Either way the result is
    re-certified by exact counting before it is returned.
    """
    return _certified_ergodic_word(nu, k, eps, n_min, strategy, max_length)[0]


def _certified_ergodic_word(nu, k, eps, n_min=1, strategy="debruijn", max_length=DEFAULT_MAX_LENGTH):
    eps = Fraction(eps)
    if eps <= 0:
        raise InputError("eps must be positive")
    if k < 1:
        raise InputError("order k must be at least 1")
    if not nu.is_ergodic:
        raise InputError(f"{type(nu).__name__} is not ergodic; decompose it first")
    if isinstance(nu, PeriodicOrbit):
        w = nu.period_word
        reps = max(1, -(-n_min // len(w)))
        return concat([w] * reps), Fraction(0), True
    if strategy not in ("debruijn", "sample"):
        raise InputError(f"unknown strategy {strategy!r}")
    law = block_law(nu, k)
    probs = law.probabilities()
    n = max(2, 1 << k, n_min) if strategy == "debruijn" else max(1 << (k + 4), n_min)
    while n <= max_length:
        if strategy == "debruijn":
            g = _nearest_counts(law, n, probs)[0]
            if g.sum() == 0 or _float_screen(g, g.sum(), probs, k) > float(eps):
                n = math.ceil(n * GROWTH)
                continue
        w = _debruijn_word(law, n, probs) if strategy == "debruijn" else _sampled_word(law, n, probs)
        if len(w) >= k:
            counts = cyclic_block_counts(w, k)
            if _float_screen(counts, len(w), probs, k) < float(eps) * (1 + 1e-9):
                cert, exhaustive = law_deviation(counts, len(w), law.numerators, law.denominator, k,
                                                 exact=law.exact, precision=law.precision)
                if below(cert, eps):
                    reps = max(1, -(-n_min // len(w)))
                    return (concat([w] * reps) if reps > 1 else w), cert, exhaustive
        n = math.ceil(n * GROWTH)
    raise ConstructionError(
        f"no certified word for {type(nu).__name__} at order {k}, eps={eps} within length {max_length}")


def reentry_threshold(p: int, k: int, eps) -> int:
    """``R0 = max(p, ceil(5 (k + p) / eps))``.

    Windows of a length-R prefix of ``x^∞`` that start before ``R - k``
    see only periodic data (error <= k/R); an incomplete last period
    costs at most p/R.  So ``(k + p)/R < eps/5`` bounds the deviation of
    any continuation from the periodic statistics by ``eps/5``.
    """
    eps = Fraction(eps)
    if p < 1 or k < 1 or eps <= 0:
        raise InputError("reentry_threshold needs p, k >= 1 and eps > 0")
    bound = 5 * (k + p) / eps
    return max(p, math.ceil(bound))


@dataclass(frozen=True)
class Approximant:
    """One period ``x`` of a periodic point approximating a measure at order ``k``.

    ``weights``, ``base_lengths`` and ``block_lengths`` record the
    ergodic components, their certified word lengths and the lengths of
    the blocks concatenated into ``x``.
    """

    x: Word
    k: int
    epsilon: Fraction
    R0: int
    certificate: Fraction
    exhaustive: bool
    weights: tuple = ()
    base_lengths: tuple = ()
    block_lengths: tuple = ()

    @property
    def p(self) -> int:
        return len(self.x)

    def proportions_ok(self) -> bool:
        """Block-length inequalities for concatenated components (vacuous for one component)."""
        r = len(self.block_lengths)
        if r <= 1:
            return True
        total = sum(self.block_lengths)
        eps = self.epsilon
        return (all(n >= nt for n, nt in zip(self.block_lengths, self.base_lengths))
                and all(abs(Fraction(n, total) - a) < eps / (5 * r) for n, a in zip(self.block_lengths, self.weights))
                and Fraction(r * self.k, total) < eps / 5)

    def check(self) -> None:
        """Re-assert every invariant; raises :class:`CertificationError`."""
        if not below(self.certificate, 4 * self.epsilon / 5):
            raise CertificationError(f"certificate {self.certificate} not below 4 eps/5")
        if self.R0 < self.p or self.R0 < math.ceil(5 * (self.k + self.p) / self.epsilon):
            raise CertificationError("re-entry threshold below its bound")
        if not self.proportions_ok():
            raise CertificationError("block lengths violate the proportion inequalities")


def _allocate_blocks(weights, base, k, eps):
    """Block lengths ``n_i = m_i * base_i`` meeting the proportion and boundary inequalities."""
    r = len(weights)
    total = sum(base)
    while True:
        mult = [max(1, (2 * a * total / nt + 1).__floor__() // 2) for a, nt in zip(weights, base)]
        lengths = [m * nt for m, nt in zip(mult, base)]
        P = sum(lengths)
        if (all(abs(Fraction(n, P) - a) < eps / (5 * r) for n, a in zip(lengths, weights))
                and Fraction(r * k, P) < eps / 5):
            return mult, lengths
        total *= 2


def periodic_approximant(nu: ShiftMeasure, k: int, eps, *, strategy: str = "debruijn",
                         max_length: int = DEFAULT_MAX_LENGTH) -> Approximant:
    """Certified periodic approximant of ``nu`` at order ``k`` and accuracy ``eps``.

    Decomposes ``nu`` exactly into ergodic components, certifies a word
    for each at accuracy ``eps/5``, concatenates whole repetitions of
    them in proportions matching the weights, and verifies the result to
    ``4 eps / 5`` by direct cyclic counting.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise InputError("eps must be positive")
    comps = [(Fraction(a), mu) for a, mu in ergodic_decomposition(nu) if a > 0]
    words = [_certified_ergodic_word(mu, k, eps / 5, 1, strategy, max_length)[0] for _, mu in comps]
    weights = tuple(a for a, _ in comps)
    base = tuple(len(w) for w in words)
    if len(comps) == 1:
        mult, lengths = [1], [base[0]]
    else:
        mult, lengths = _allocate_blocks(weights, base, k, eps)
    x = concat(w for w, m in zip(words, mult) for _ in range(m))
    law = block_law(nu, k)
    cert, exhaustive = certify_word(x, law)
    approx = Approximant(x, k, eps, reentry_threshold(len(x), k, eps), cert, exhaustive,
                         weights, base, tuple(lengths))
    if not below(cert, 4 * eps / 5):
        raise CertificationError(
            f"approximant of {type(nu).__name__} at k={k}, eps={eps} has deviation {cert} >= 4 eps/5")
    approx.check()
    return approx


def continuation_deviation(x: Word, R: int, tail: Word | np.ndarray, k: int, exhaustive: bool | None = None):
    """Deviation of ``delta_R(y)`` from ``delta_p(x)`` on cylinders of order <= k.

    ``y`` agrees with ``x^∞`` on ``[0, R)`` and continues with ``tail``
    (at least ``k - 1`` symbols).  Returns ``(value, exhaustive)`` as in
    :func:`law_deviation`.
    """
    tail = Word(tail)
    if len(tail) < k - 1:
        raise InputError("tail must supply at least k - 1 symbols")
    p = len(x)
    inner = max(0, R - k + 1)  # windows fully inside the periodic prefix
    periodic = _kernels.window_codes(x.bits, k, 0, p, True)
    full = np.bincount(periodic, minlength=1 << k)
    q, rem = divmod(inner, p)
    counts = full * q + np.bincount(periodic[:rem], minlength=1 << k)
    start = inner
    edge = np.concatenate([np.take(x.bits, np.arange(start, R) % p), tail.bits[: k - 1]])
    if R - start:
        codes = _kernels.window_codes(edge, k, 0, R - start, False)
        counts = counts + np.bincount(codes, minlength=1 << k)
    return law_deviation(counts, R, full.astype(object), p, k, exhaustive)
