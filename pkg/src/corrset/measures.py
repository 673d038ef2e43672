"""Finitely described shift-invariant measures on binary sequences.

Each measure evaluates cylinders exactly: rational measures return
``Fraction``, circle-rotation codings return ``mpmath.mpf`` at their
configured working precision.

The variants are :class:`Bernoulli`, :class:`LabeledMarkov`,
:class:`PeriodicOrbit`, :class:`RotationCoding`, :class:`FiniteMPS` and
:class:`Mixture`.  Measure-preserving systems are described by
:class:`FiniteSystem` and :class:`CircleRotation` and turned into their
coding measures by :func:`mps_pushforward`.
"""

from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Any, Sequence

import mpmath
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from corrset.core import Cylinder, Word, empirical_measure
from corrset.errors import MeasureError, PrecisionError

DEFAULT_PRECISION = 50


def as_fraction(value, what: str = "value") -> Fraction:
    """Exact rational from ``int``, ``Fraction`` or an ``"a/b"`` string."""
    if isinstance(value, bool):
        raise MeasureError(f"{what}: booleans are not numbers")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise MeasureError(f"{what}: cannot parse {value!r} as a rational") from exc
    raise MeasureError(f"{what}: expected an exact rational (int, Fraction or 'a/b' string), got {type(value).__name__}")


def _probability(value, what):
    q = as_fraction(value, what)
    if not 0 <= q <= 1:
        raise MeasureError(f"{what} must lie in [0, 1], got {q}")
    return q


@dataclass(frozen=True)
class BlockLaw:
    """The distribution of the first ``k`` symbols.

    ``numerators[code] / denominator`` is the mass of the k-block with
    big-endian ``code``.  Rational laws have Python-int numerators; real
    laws (rotation codings) carry ``mpf`` numerators computed at
    ``precision`` digits and denominator 1.
    """

    k: int
    numerators: np.ndarray
    denominator: int
    exact: bool = True
    precision: int = 0  # decimal digits of mpf numerators

    @cached_property
    def _floats(self) -> np.ndarray:
        if self.exact:
            out = np.array([n / self.denominator for n in self.numerators], dtype=np.float64)
        else:
            out = np.array([float(v) for v in self.numerators], dtype=np.float64)
        out.flags.writeable = False
        return out

    def probabilities(self) -> np.ndarray:
        """Float64 masses, for construction heuristics only."""
        return self._floats

    def mass(self, code: int):
        v = self.numerators[code]
        return Fraction(int(v), self.denominator) if self.exact else v


class ShiftMeasure:
    """Base class: a shift-invariant probability on ``{0,1}^N``."""

    kind: str = "abstract"

    def cylinder(self, cyl: Cylinder):
        raise NotImplementedError

    def block_law(self, k: int) -> BlockLaw:
        raise NotImplementedError

    @property
    def is_ergodic(self) -> bool:
        raise NotImplementedError

    @property
    def is_exact(self) -> bool:
        """Whether cylinder values are exact rationals."""
        return True

    def to_config(self) -> dict:
        raise NotImplementedError


def _popcounts(k: int) -> np.ndarray:
    codes = np.arange(1 << k, dtype=np.int64)
    ones = np.zeros(1 << k, dtype=np.int64)
    for j in range(k):
        ones += (codes >> j) & 1
    return ones


@dataclass(frozen=True)
class Bernoulli(ShiftMeasure):
    """i.i.d. symbols with ``P(1) = p``."""

    p: Fraction
    kind = "bernoulli"

    def __post_init__(self):
        object.__setattr__(self, "p", _probability(self.p, "Bernoulli p"))

    def cylinder(self, cyl):
        r = Fraction(1)
        for s in cyl.symbols:
            r *= self.p if s else 1 - self.p
        return r

    def block_law(self, k):
        a, b = self.p.numerator, self.p.denominator
        table = np.empty(k + 1, dtype=object)
        for j in range(k + 1):
            table[j] = a**j * (b - a) ** (k - j)
        return BlockLaw(k, table[_popcounts(k)], b**k)

    @property
    def is_ergodic(self):
        return True

    def to_config(self):
        return {"type": "bernoulli", "p": str(self.p)}


def _matmul(A, B):
    return tuple(
        tuple(sum((A[i][l] * B[l][j] for l in range(len(B))), Fraction(0)) for j in range(len(B[0])))
        for i in range(len(A)))


def _vecmat(v, M):
    return tuple(sum((v[i] * M[i][j] for i in range(len(v))), Fraction(0)) for j in range(len(M[0])))


@dataclass(frozen=True, eq=False)
class LabeledMarkov(ShiftMeasure):
    """Stationary finite-state Markov chain observed through ``label``.

    ``stationary`` must satisfy ``stationary @ transition == stationary``
    exactly; it is checked, never solved for.
    """

    transition: tuple
    stationary: tuple
    label: tuple
    _powers: dict = field(default_factory=dict, repr=False, compare=False)
    kind = "markov"

    def __post_init__(self):
        P = tuple(tuple(as_fraction(x, f"transition[{i}][{j}]") for j, x in enumerate(row))
                  for i, row in enumerate(self.transition))
        m = len(P)
        if m == 0:
            raise MeasureError("Markov chain needs at least one state")
        for i, row in enumerate(P):
            if len(row) != m:
                raise MeasureError(f"transition row {i} has length {len(row)}, expected {m}")
            if any(x < 0 for x in row):
                raise MeasureError(f"transition row {i} has a negative entry")
            if sum(row) != 1:
                raise MeasureError(f"transition row {i} sums to {sum(row)}, not 1")
        pi = tuple(as_fraction(x, f"stationary[{i}]") for i, x in enumerate(self.stationary))
        if len(pi) != m:
            raise MeasureError(f"stationary vector has length {len(pi)}, expected {m}")
        if any(x < 0 for x in pi) or sum(pi) != 1:
            raise MeasureError("stationary vector must be a probability vector")
        piP = _vecmat(pi, P)
        if piP != pi:
            bad = next(j for j in range(m) if piP[j] != pi[j])
            raise MeasureError(f"stationary vector is not invariant: (πP)[{bad}] = {piP[bad]} but π[{bad}] = {pi[bad]}")
        lab = tuple(int(x) for x in self.label)
        if len(lab) != m or any(x not in (0, 1) for x in lab):
            raise MeasureError("label must map every state to 0 or 1")
        object.__setattr__(self, "transition", P)
        object.__setattr__(self, "stationary", pi)
        object.__setattr__(self, "label", lab)

    def __eq__(self, other):
        return (isinstance(other, LabeledMarkov) and self.transition == other.transition
                and self.stationary == other.stationary and self.label == other.label)

    def __hash__(self):
        return hash((self.transition, self.stationary, self.label))

    @property
    def states(self) -> int:
        return len(self.stationary)

    def _power(self, g: int):
        if g not in self._powers:
            m = self.states
            result = tuple(tuple(Fraction(int(i == j)) for j in range(m)) for i in range(m))
            base, e = self.transition, g
            while e:
                if e & 1:
                    result = _matmul(result, base)
                base = _matmul(base, base)
                e >>= 1
            self._powers[g] = result
        return self._powers[g]

    def cylinder(self, cyl):
        if not cyl.constraints:
            return Fraction(1)
        v = None
        prev = None
        for pos, sym in cyl.constraints:
            if v is None:
                v = self.stationary
            else:
                v = _vecmat(v, self._power(pos - prev))
            v = tuple(x if self.label[s] == sym else Fraction(0) for s, x in enumerate(v))
            prev = pos
        return sum(v, Fraction(0))

    def block_law(self, k):
        m = self.states
        d = reduce(math.lcm, (x.denominator for row in self.transition for x in row), 1)
        e = reduce(math.lcm, (x.denominator for x in self.stationary), 1)
        Pint = np.array([[int(x * d) for x in row] for row in self.transition], dtype=object)
        masks = [np.array([int(self.label[s] == a) for s in range(m)], dtype=object) for a in (0, 1)]
        base = np.array([int(x * e) for x in self.stationary], dtype=object)
        V = np.empty((2, m), dtype=object)
        V[0] = base * masks[0]
        V[1] = base * masks[1]
        for _ in range(k - 1):
            W = V.dot(Pint)
            nxt = np.empty((2 * V.shape[0], m), dtype=object)
            nxt[0::2] = W * masks[0]
            nxt[1::2] = W * masks[1]
            V = nxt
        if k == 0:
            return BlockLaw(0, np.array([1], dtype=object), 1)
        return BlockLaw(k, V.sum(axis=1), e * d ** (k - 1))

    def _support_classes(self):
        """Communicating classes of the chain restricted to states with positive mass."""
        support = [s for s in range(self.states) if self.stationary[s] > 0]
        idx = {s: i for i, s in enumerate(support)}
        rows, cols = [], []
        for s in support:
            for t in support:
                if self.transition[s][t] > 0:
                    rows.append(idx[s])
                    cols.append(idx[t])
        graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(support), len(support)))
        _, labels = connected_components(graph, directed=True, connection="strong")
        classes: dict[int, list[int]] = {}
        for s in support:
            classes.setdefault(int(labels[idx[s]]), []).append(s)
        return sorted(classes.values())

    @property
    def is_ergodic(self):
        return len(self._support_classes()) == 1

    def restrict(self, states: Sequence[int]) -> LabeledMarkov:
        """The chain on a closed class, stationary vector renormalised."""
        mass = sum(self.stationary[s] for s in states)
        return LabeledMarkov(
            tuple(tuple(self.transition[s][t] for t in states) for s in states),
            tuple(self.stationary[s] / mass for s in states),
            tuple(self.label[s] for s in states))

    def to_config(self):
        return {"type": "markov",
                "transition": [[str(x) for x in row] for row in self.transition],
                "stationary": [str(x) for x in self.stationary],
                "label": list(self.label)}


@dataclass(frozen=True)
class PeriodicOrbit(ShiftMeasure):
    """Uniform measure on the shift orbit of ``period_word``^∞."""

    period_word: Word
    kind = "periodic"

    def __post_init__(self):
        w = Word(self.period_word)
        if len(w) == 0:
            raise MeasureError("periodic orbit needs a nonempty period word")
        object.__setattr__(self, "period_word", w)

    def cylinder(self, cyl):
        return empirical_measure(self.period_word, cyl, "cyclic")

    def block_law(self, k):
        from corrset._kernels import cyclic_block_counts

        p = len(self.period_word)
        if k == 0:
            return BlockLaw(0, np.array([1], dtype=object), 1)
        counts = cyclic_block_counts(self.period_word.bits, k)
        return BlockLaw(k, counts.astype(object), p)

    @property
    def is_ergodic(self):
        return True

    def to_config(self):
        return {"type": "periodic", "word": str(self.period_word)}


def align(*values):
    """The values unchanged when all are rational, otherwise all as ``mpf``.

    Convert under the working precision of the measure involved (see
    :func:`working_digits`).
    """
    if all(isinstance(v, (int, Fraction)) for v in values):
        return values
    return tuple(_real(v, "value") for v in values)


def working_digits(nu) -> int:
    """Decimal digits adequate for arithmetic on ``nu``'s cylinder values."""
    if isinstance(nu, RotationCoding):
        return nu.precision + 10
    if isinstance(nu, Mixture):
        return max([DEFAULT_PRECISION] + [working_digits(mu) for _, mu in nu.components])
    return DEFAULT_PRECISION


def _real(value, what: str):
    """mpf from int, Fraction, decimal string or a small arithmetic expression."""
    if isinstance(value, mpmath.mpf):
        return value
    if isinstance(value, bool):
        raise MeasureError(f"{what}: booleans are not numbers")
    if isinstance(value, int):
        return mpmath.mpf(value)
    if isinstance(value, Fraction):
        return mpmath.mpf(value.numerator) / value.denominator
    if isinstance(value, float):
        return mpmath.mpf(value)
    if isinstance(value, str):
        text = value.strip()
        if _DECIMAL.fullmatch(text):
            return mpmath.mpf(text)
        if _RATIONAL.fullmatch(text):
            q = Fraction(text)
            return mpmath.mpf(q.numerator) / q.denominator
        try:
            return _eval_real(ast.parse(text, mode="eval").body)
        except (SyntaxError, ValueError, ZeroDivisionError, KeyError, TypeError) as exc:
            raise MeasureError(f"{what}: cannot evaluate {value!r}") from exc
    raise MeasureError(f"{what}: unsupported type {type(value).__name__}")


_DECIMAL = re.compile(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_RATIONAL = re.compile(r"[+-]?\d+\s*/\s*\d+")
_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}
_FUNCS = {"sqrt": mpmath.sqrt, "exp": mpmath.exp, "log": mpmath.log}
_CONSTS = {"pi": lambda: +mpmath.pi, "e": lambda: +mpmath.e, "phi": lambda: +mpmath.phi}


def _eval_real(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)) and not isinstance(node.value, bool):
        return mpmath.mpf(node.value) if isinstance(node.value, int) else mpmath.mpf(ast.unparse(node))
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_real(node.left), _eval_real(node.right))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_real(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and len(node.args) == 1 and not node.keywords:
        return _FUNCS[node.func.id](_eval_real(node.args[0]))
    if isinstance(node, ast.Name):
        return _CONSTS[node.id]()
    raise ValueError(f"unsupported expression element {ast.dump(node)}")


def _arc_pieces(start, length):
    """Half-open pieces of [0, 1) covered by the arc [start, start + length) mod 1."""
    if length <= 0:
        return []
    if length >= 1:
        return [(mpmath.mpf(0), mpmath.mpf(1))]
    end = start + length
    if end <= 1:
        return [(start, end)]
    return [(start, mpmath.mpf(1)), (mpmath.mpf(0), end - 1)]


def _intersect(pieces_a, pieces_b):
    out = []
    for a0, a1 in pieces_a:
        for b0, b1 in pieces_b:
            lo, hi = max(a0, b0), min(a1, b1)
            if hi > lo:
                out.append((lo, hi))
    return out


@dataclass(frozen=True, eq=False)
class RotationCoding(ShiftMeasure):
    """Coding of ``x -> x + alpha (mod 1)`` by the arc ``[a, b)`` under Lebesgue measure.

    ``precision`` is the working precision in decimal digits.  A rational
    ``alpha`` yields a periodic measure; nothing checks irrationality.
    """

    alpha: Any
    a: Any = 0
    b: Any = Fraction(1, 2)
    precision: int = DEFAULT_PRECISION
    source: dict = field(default_factory=dict, repr=False)
    kind = "rotation"

    def __post_init__(self):
        prec = int(self.precision)
        if prec < 20:
            raise MeasureError("rotation precision must be at least 20 digits")
        object.__setattr__(self, "precision", prec)
        src = dict(self.source) or {"alpha": self._text(self.alpha), "a": self._text(self.a), "b": self._text(self.b)}
        object.__setattr__(self, "source", src)
        with mpmath.workdps(prec):
            alpha = mpmath.frac(_real(self.alpha, "alpha"))
            a, b = _real(self.a, "interval start"), _real(self.b, "interval end")
            if not 0 <= a < b <= 1:
                raise MeasureError(f"rotation interval needs 0 <= a < b <= 1, got [{a}, {b})")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @staticmethod
    def _text(v):
        if isinstance(v, mpmath.mpf):
            return mpmath.nstr(v, 60)
        return str(v)

    def __eq__(self, other):
        return (isinstance(other, RotationCoding) and self.alpha == other.alpha and self.a == other.a
                and self.b == other.b and self.precision == other.precision)

    def __hash__(self):
        return hash((str(self.alpha), str(self.a), str(self.b), self.precision))

    def _check_budget(self, order):
        # positions n enter as n * alpha; keep n * 10^-precision below 10^-20
        if order > 10 ** (self.precision - 20):
            raise PrecisionError(f"cylinder order {order} exhausts {self.precision}-digit precision")

    def preimage(self, n: int, symbol: int):
        """Pieces of ``{x : 1_A(x + n alpha) == symbol}``."""
        with mpmath.workdps(self.precision):
            shift = mpmath.frac(n * self.alpha)
            if symbol:
                return _arc_pieces(mpmath.frac(self.a - shift), self.b - self.a)
            return _arc_pieces(mpmath.frac(self.b - shift), 1 - (self.b - self.a))

    def cylinder(self, cyl):
        self._check_budget(cyl.order)
        with mpmath.workdps(self.precision):
            pieces = [(mpmath.mpf(0), mpmath.mpf(1))]
            for n, s in cyl.constraints:
                pieces = _intersect(pieces, self.preimage(n, s))
                if not pieces:
                    return mpmath.mpf(0)
            return mpmath.fsum(hi - lo for lo, hi in pieces)

    def code_at(self, x, k: int) -> int:
        """Big-endian code of the first ``k`` coding symbols of the point ``x``."""
        code = 0
        for j in range(k):
            y = mpmath.frac(x + j * self.alpha)
            code = (code << 1) | int(self.a <= y < self.b)
        return code

    def block_law(self, k):
        self._check_budget(k)
        nums = np.zeros(1 << k, dtype=object)
        with mpmath.workdps(self.precision):
            cuts = {mpmath.mpf(0)}
            for j in range(k):
                shift = mpmath.frac(j * self.alpha)
                cuts.add(mpmath.frac(self.a - shift))
                cuts.add(mpmath.frac(self.b - shift))
            cuts = sorted(cuts) + [mpmath.mpf(1)]
            for lo, hi in zip(cuts, cuts[1:]):
                if hi > lo:
                    nums[self.code_at((lo + hi) / 2, k)] += hi - lo
        return BlockLaw(k, nums, 1, exact=False, precision=self.precision)

    @property
    def is_ergodic(self):
        return True

    @property
    def is_exact(self):
        return False

    def to_config(self):
        return {"type": "rotation", "alpha": self.source["alpha"],
                "interval": [self.source["a"], self.source["b"]], "precision": self.precision}


@dataclass(frozen=True)
class FiniteMPS(ShiftMeasure):
    """Coding of a permutation ``T`` of ``{0..m-1}`` with invariant weights by the set ``A``."""

    weights: tuple
    permutation: tuple
    A: frozenset
    kind = "finite_mps"

    def __post_init__(self):
        w = tuple(_probability(x, f"weights[{i}]") for i, x in enumerate(self.weights))
        m = len(w)
        if m == 0:
            raise MeasureError("finite system needs at least one point")
        if sum(w) != 1:
            raise MeasureError(f"weights sum to {sum(w)}, not 1")
        T = tuple(int(x) for x in self.permutation)
        if len(T) != m or sorted(T) != list(range(m)):
            raise MeasureError(f"permutation must be a bijection of 0..{m - 1}, got {list(T)}")
        A = frozenset(int(x) for x in self.A)
        if not A <= set(range(m)):
            raise MeasureError(f"A must be a subset of 0..{m - 1}")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "permutation", T)
        object.__setattr__(self, "A", A)
        for cyc in self.cycles():
            if len({w[x] for x in cyc}) > 1:
                raise MeasureError(
                    f"weights are not T-invariant: cycle {cyc} carries unequal weights {[str(w[x]) for x in cyc]}")

    @property
    def size(self) -> int:
        return len(self.weights)

    def cycles(self) -> list[list[int]]:
        """Cycles of ``T``, each starting at its least point, ordered by that point."""
        seen = set()
        out = []
        for x in range(self.size):
            if x in seen:
                continue
            cyc = [x]
            seen.add(x)
            y = self.permutation[x]
            while y != x:
                cyc.append(y)
                seen.add(y)
                y = self.permutation[y]
            out.append(cyc)
        return out

    def coding(self, x: int, n: int) -> Word:
        """``1_A(x) 1_A(Tx) ... 1_A(T^{n-1}x)``."""
        bits = []
        for _ in range(n):
            bits.append(int(x in self.A))
            x = self.permutation[x]
        return Word(bits)

    def cylinder(self, cyl):
        total = Fraction(0)
        for cyc in self.cycles():
            L = len(cyc)
            inA = [c in self.A for c in cyc]
            for i, x in enumerate(cyc):
                if self.weights[x] and all(inA[(i + n) % L] == bool(s) for n, s in cyl.constraints):
                    total += self.weights[x]
        return total

    def block_law(self, k):
        D = reduce(math.lcm, (x.denominator for x in self.weights), 1)
        nums = np.zeros(1 << k, dtype=object)
        for x in range(self.size):
            if self.weights[x]:
                code = 0
                for b in self.coding(x, k).bits:
                    code = (code << 1) | int(b)
                nums[code] += int(self.weights[x] * D)
        return BlockLaw(k, nums, D)

    @property
    def is_ergodic(self):
        return sum(1 for c in self.cycles() if self.weights[c[0]] > 0) == 1

    def to_config(self):
        return {"type": "finite_mps", "weights": [str(x) for x in self.weights],
                "permutation": list(self.permutation), "A": sorted(self.A)}


_ERGODIC_KINDS = (Bernoulli, LabeledMarkov, PeriodicOrbit, RotationCoding)


@dataclass(frozen=True)
class Mixture(ShiftMeasure):
    """Finite convex combination of ergodic measures."""

    components: tuple
    kind = "mixture"

    def __post_init__(self):
        comps = []
        for i, item in enumerate(self.components):
            wgt, nu = item
            wgt = _probability(wgt, f"components[{i}].weight")
            if isinstance(nu, Mixture):
                raise MeasureError("mixtures may not be nested")
            if not isinstance(nu, _ERGODIC_KINDS):
                raise MeasureError(f"components[{i}]: {type(nu).__name__} is not an admissible ergodic component")
            if not nu.is_ergodic:
                raise MeasureError(f"components[{i}]: Markov chain is not irreducible on its support")
            comps.append((wgt, nu))
        if not comps:
            raise MeasureError("mixture needs at least one component")
        if sum(w for w, _ in comps) != 1:
            raise MeasureError(f"mixture weights sum to {sum(w for w, _ in comps)}, not 1")
        object.__setattr__(self, "components", tuple(comps))

    def cylinder(self, cyl):
        values = [(w, nu.cylinder(cyl)) for w, nu in self.components]
        if all(isinstance(v, Fraction) for _, v in values):
            return sum((w * v for w, v in values), Fraction(0))
        prec = max(nu.precision for _, nu in self.components if isinstance(nu, RotationCoding))
        with mpmath.workdps(prec):
            return mpmath.fsum(_real(w, "weight") * (_real(v, "value") if isinstance(v, Fraction) else v)
                               for w, v in values)

    def block_law(self, k):
        laws = [(w, nu.block_law(k)) for w, nu in self.components]
        if all(law.exact for _, law in laws):
            D = reduce(math.lcm, (law.denominator * w.denominator for w, law in laws), 1)
            nums = np.zeros(1 << k, dtype=object)
            for w, law in laws:
                if w:
                    nums = nums + law.numerators * int(w * D / law.denominator)
            return BlockLaw(k, nums, D)
        prec = max(nu.precision for _, nu in self.components if isinstance(nu, RotationCoding))
        with mpmath.workdps(prec):
            nums = np.zeros(1 << k, dtype=object)
            for w, law in laws:
                scale = _real(w, "weight") / law.denominator
                nums = nums + np.array([scale * v for v in law.numerators], dtype=object)
        return BlockLaw(k, nums, 1, exact=False, precision=prec)

    @property
    def is_ergodic(self):
        return sum(1 for w, _ in self.components if w > 0) == 1

    @property
    def is_exact(self):
        return all(nu.is_exact for _, nu in self.components)

    def to_config(self):
        return {"type": "mixture",
                "components": [{"weight": str(w), "measure": nu.to_config()} for w, nu in self.components]}


def cylinder_measure(nu: ShiftMeasure, cyl: Cylinder):
    """``nu(C)``: exact rational, or ``mpf`` for rotation codings."""
    return nu.cylinder(cyl)


def correlation(nu: ShiftMeasure, shifts: Sequence[int]):
    """``nu([w_n = 1 for n in shifts])``, i.e. ``mu(T^-n_1 A ∩ ... ∩ T^-n_k A)``."""
    return nu.cylinder(Cylinder.ones(shifts))


def ergodic_decomposition(nu: ShiftMeasure) -> list[tuple[Fraction, ShiftMeasure]]:
    """Exact finite ergodic decomposition ``[(weight, ergodic component), ...]``."""
    if isinstance(nu, Mixture):
        return list(nu.components)
    if isinstance(nu, FiniteMPS):
        out = []
        for cyc in nu.cycles():
            mass = sum(nu.weights[x] for x in cyc)
            if len({nu.weights[x] for x in cyc}) > 1:
                raise MeasureError(f"invalid system: cycle {cyc} has non-uniform weights")
            if mass > 0:
                out.append((mass, PeriodicOrbit(nu.coding(cyc[0], len(cyc)))))
        return out
    if isinstance(nu, LabeledMarkov):
        classes = nu._support_classes()
        if len(classes) == 1:
            return [(Fraction(1), nu)]
        return [(sum(nu.stationary[s] for s in c), nu.restrict(c)) for c in classes]
    return [(Fraction(1), nu)]


@dataclass(frozen=True)
class FiniteSystem:
    """A permutation ``T`` of ``{0..m-1}`` with point masses and a distinguished set ``A``."""

    weights: Sequence
    permutation: Sequence[int]
    A: Sequence[int]


@dataclass(frozen=True)
class CircleRotation:
    """Rotation by ``alpha`` on the circle with Lebesgue measure and ``A = [a, b)``."""

    alpha: Any
    a: Any = 0
    b: Any = Fraction(1, 2)
    precision: int = DEFAULT_PRECISION


def mps_pushforward(system: FiniteSystem | CircleRotation | dict) -> ShiftMeasure:
    """Law of the itinerary ``x -> (1_A(T^n x))_n`` under the system's measure."""
    if isinstance(system, dict):
        return measure_from_config(system)
    if isinstance(system, FiniteSystem):
        return FiniteMPS(tuple(system.weights), tuple(system.permutation), frozenset(system.A))
    if isinstance(system, CircleRotation):
        return RotationCoding(system.alpha, system.a, system.b, system.precision)
    raise MeasureError(f"unsupported system description {type(system).__name__}")


def _at(path, key):
    return f"{path}.{key}" if path else key


def _need(cfg, key, path):
    if key not in cfg:
        raise MeasureError(f"{_at(path, key)}: missing required field")
    return cfg[key]


def measure_from_config(cfg: dict, path: str = "measure") -> ShiftMeasure:
    """Parse a JSON measure description; errors name the offending field path."""
    if not isinstance(cfg, dict):
        raise MeasureError(f"{path}: expected an object")
    kind = _need(cfg, "type", path)
    try:
        if kind == "bernoulli":
            return Bernoulli(_need(cfg, "p", path))
        if kind == "periodic":
            word = _need(cfg, "word", path)
            if not isinstance(word, str):
                raise MeasureError(f"{_at(path, 'word')}: expected a string of 0/1")
            return PeriodicOrbit(Word(word))
        if kind == "markov":
            P = _need(cfg, "transition", path)
            pi = _need(cfg, "stationary", path)
            m = len(pi)
            label = cfg.get("label", list(range(m)) if m == 2 else None)
            if label is None:
                raise MeasureError(f"{_at(path, 'label')}: required unless the chain has two states")
            return LabeledMarkov(tuple(tuple(r) for r in P), tuple(pi), tuple(label))
        if kind == "rotation":
            interval = cfg.get("interval", ["0", "1/2"])
            if not isinstance(interval, list) or len(interval) != 2:
                raise MeasureError(f"{_at(path, 'interval')}: expected [a, b]")
            return RotationCoding(_need(cfg, "alpha", path), interval[0], interval[1],
                                  int(cfg.get("precision", DEFAULT_PRECISION)),
                                  source={"alpha": str(cfg["alpha"]), "a": str(interval[0]), "b": str(interval[1])})
        if kind in ("finite_mps", "finite"):
            return FiniteMPS(tuple(_need(cfg, "weights", path)), tuple(_need(cfg, "permutation", path)),
                             frozenset(_need(cfg, "A", path)))
        if kind == "mixture":
            comps = _need(cfg, "components", path)
            if not isinstance(comps, list):
                raise MeasureError(f"{_at(path, 'components')}: expected a list")
            parsed = []
            for i, c in enumerate(comps):
                cpath = f"{path}.components[{i}]"
                if not isinstance(c, dict):
                    raise MeasureError(f"{cpath}: expected an object")
                parsed.append((_need(c, "weight", cpath), measure_from_config(_need(c, "measure", cpath), f"{cpath}.measure")))
            return Mixture(tuple(parsed))
    except MeasureError as exc:
        msg = str(exc)
        if msg.startswith(path):
            raise
        raise MeasureError(f"{path}: {msg}") from exc
    except (TypeError, ValueError) as exc:
        raise MeasureError(f"{path}: {exc}") from exc
    raise MeasureError(f"{_at(path, 'type')}: unknown measure type {kind!r}")
