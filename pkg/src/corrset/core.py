"""Words, cylinders, Følner sequences and exact density counting.

Everything here returns exact ``Fraction`` values.  A word ``w`` is
identified with the set ``E = {i : w_i = 1}`` whenever a density of a set
is asked for.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from corrset.errors import InputError, PrefixTooShortError

_CHUNK = 1 << 22


@dataclass(frozen=True)
class Cylinder:
    """The event ``[w_{n_1} = i_1, ..., w_{n_r} = i_r]``.

    ``constraints`` holds ``(position, symbol)`` pairs with strictly
    increasing positions.  The empty cylinder is the whole space.
    """

    constraints: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        cons = tuple((int(p), int(s)) for p, s in self.constraints)
        last = -1
        for p, s in cons:
            if p < 0:
                raise InputError(f"negative cylinder position {p}")
            if p <= last:
                raise InputError("cylinder positions must be strictly increasing")
            if s not in (0, 1):
                raise InputError(f"cylinder symbol must be 0 or 1, got {s}")
            last = p
        object.__setattr__(self, "constraints", cons)

    @classmethod
    def of(cls, mapping: dict[int, int] | Iterable[tuple[int, int]]) -> Cylinder:
        """Build from unordered ``position -> symbol`` data."""
        items = mapping.items() if isinstance(mapping, dict) else mapping
        return cls(tuple(sorted((int(p), int(s)) for p, s in items)))

    @classmethod
    def ones(cls, shifts: Iterable[int]) -> Cylinder:
        """``[w_n = 1 for n in shifts]``; duplicate shifts collapse."""
        return cls(tuple((n, 1) for n in sorted(set(int(s) for s in shifts))))

    @classmethod
    def block(cls, word: str | Sequence[int], offset: int = 0) -> Cylinder:
        """Fully specified cylinder reading ``word`` from ``offset``."""
        bits = _parse_bits(word)
        return cls(tuple((offset + j, int(b)) for j, b in enumerate(bits)))

    @property
    def order(self) -> int:
        """``1 + max position`` (0 for the full space)."""
        return self.constraints[-1][0] + 1 if self.constraints else 0

    @property
    def positions(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.constraints)

    @property
    def symbols(self) -> tuple[int, ...]:
        return tuple(s for _, s in self.constraints)

    def __len__(self):
        return len(self.constraints)

    def shift(self, t: int) -> Cylinder:
        return Cylinder(tuple((p + t, s) for p, s in self.constraints))

    def refine(self, position: int, symbol: int) -> Cylinder:
        """Intersect with ``[w_position = symbol]``."""
        if position in self.positions:
            raise InputError(f"position {position} already constrained")
        return Cylinder.of(self.constraints + ((position, symbol),))

    def matches(self, code: int, k: int) -> bool:
        """Whether the k-block with big-endian ``code`` lies in this cylinder."""
        return all(((code >> (k - 1 - p)) & 1) == s for p, s in self.constraints)

    def code_mask(self, k: int) -> tuple[int, int]:
        """``(mask, value)`` with ``code & mask == value`` iff the k-block matches."""
        if self.order > k:
            raise InputError(f"cylinder of order {self.order} exceeds block length {k}")
        mask = value = 0
        for p, s in self.constraints:
            mask |= 1 << (k - 1 - p)
            value |= s << (k - 1 - p)
        return mask, value

    def __str__(self):
        inner = ",".join(f"w{p}={s}" for p, s in self.constraints)
        return f"[{inner}]"


def cylinders_of_order(k: int) -> Iterable[Cylinder]:
    """All ``3**k`` cylinders whose positions lie in ``range(k)``."""
    for code in range(3**k):
        cons = []
        for p in range(k):
            code, d = divmod(code, 3)
            if d < 2:
                cons.append((p, d))
        yield Cylinder(tuple(cons))


def full_blocks(k: int) -> Iterable[Cylinder]:
    """The ``2**k`` fully specified cylinders of order ``k``, by code."""
    for code in range(1 << k):
        yield Cylinder(tuple((p, (code >> (k - 1 - p)) & 1) for p in range(k)))


def _parse_bits(bits) -> np.ndarray:
    if isinstance(bits, Word):
        return bits.bits
    if isinstance(bits, str):
        if bits.strip("01"):
            raise InputError(f"word may contain only '0' and '1': {bits[:40]!r}")
        return np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    arr = np.asarray(bits)
    if arr.ndim != 1:
        raise InputError("word must be one-dimensional")
    if arr.size and (arr.min() < 0 or arr.max() > 1):
        raise InputError("word entries must be 0 or 1")
    return arr.astype(np.uint8)


class Word:
    """Immutable finite binary word backed by a read-only ``uint8`` array."""

    __slots__ = ("_bits",)

    def __init__(self, bits: str | Sequence[int] | np.ndarray | Word = ""):
        arr = np.array(_parse_bits(bits), dtype=np.uint8, copy=True)
        arr.flags.writeable = False
        self._bits = arr

    @property
    def bits(self) -> np.ndarray:
        return self._bits

    def __len__(self):
        return self._bits.shape[0]

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Word(self._bits[item])
        return int(self._bits[item])

    def __add__(self, other: Word) -> Word:
        return Word(np.concatenate([self._bits, Word(other).bits]))

    def __eq__(self, other):
        if isinstance(other, str):
            other = Word(other)
        if not isinstance(other, Word):
            return NotImplemented
        return np.array_equal(self._bits, other._bits)

    def __hash__(self):
        return hash(self._bits.tobytes())

    def __str__(self):
        return (self._bits + ord("0")).tobytes().decode("ascii")

    def __repr__(self):
        s = str(self)
        if len(s) > 48:
            s = s[:45] + "..."
        return f"Word({s!r}, length={len(self)})"

    def periodic_prefix(self, n: int) -> Word:
        """First ``n`` symbols of ``w w w ...``."""
        if len(self) == 0:
            raise InputError("cannot extend the empty word periodically")
        return Word(np.resize(self._bits, n))

    def rotate(self, s: int) -> Word:
        return Word(np.roll(self._bits, -s))

    def complement(self) -> Word:
        return Word(1 - self._bits)

    def ones(self) -> int:
        return int(np.count_nonzero(self._bits))


def concat(words: Iterable[Word]) -> Word:
    """Concatenation ``w_1 • w_2 • ...``."""
    parts = [Word(w).bits for w in words]
    return Word(np.concatenate(parts) if parts else np.zeros(0, np.uint8))


def _match_mask(bits: np.ndarray, cyl: Cylinder, count: int, cyclic: bool) -> np.ndarray:
    n = bits.shape[0]
    mask = np.ones(count, dtype=bool)
    for p, s in cyl.constraints:
        if cyclic:
            col = np.take(bits, (np.arange(count) + p) % n)
        else:
            col = bits[p:p + count]
        mask &= col == s
    return mask


def empirical_measure(w: Word | str, cyl: Cylinder, mode: str = "cyclic") -> Fraction:
    """Fraction of start positions at which ``w`` satisfies ``cyl``.

    ``cyclic`` reads ``w`` as one period of a periodic point.
    ``truncated`` counts only windows inside ``w`` but keeps the
    denominator ``len(w)``.
    """
    w = Word(w) if not isinstance(w, Word) else w
    n = len(w)
    if n == 0:
        raise InputError("empirical measure of the empty word")
    if mode == "cyclic":
        hits = np.count_nonzero(_match_mask(w.bits, cyl, n, True))
    elif mode == "truncated":
        if cyl.order > n:
            raise PrefixTooShortError(f"cylinder order {cyl.order} exceeds word length {n}")
        hits = np.count_nonzero(_match_mask(w.bits, cyl, n - cyl.order + 1, False)) if cyl.order else n
    else:
        raise InputError(f"unknown mode {mode!r}")
    return Fraction(int(hits), n)


def count_intersections(bits: np.ndarray, shifts: Sequence[int], N: int) -> int:
    """``#{i < N : bits[i + n] == 1 for every n in shifts}``."""
    shifts = sorted(set(int(s) for s in shifts))
    if not shifts:
        raise InputError("shifts must be nonempty")
    if shifts[0] < 0:
        raise InputError("shifts must be nonnegative")
    if N < 0:
        raise InputError("N must be nonnegative")
    if bits.shape[0] < N + shifts[-1]:
        raise PrefixTooShortError(
            f"prefix of length {bits.shape[0]} cannot cover N={N} with shift {shifts[-1]}")
    total = 0
    for lo in range(0, N, _CHUNK):
        hi = min(N, lo + _CHUNK)
        acc = bits[lo + shifts[0]:hi + shifts[0]].astype(bool)
        for s in shifts[1:]:
            acc = acc & (bits[lo + s:hi + s] != 0)
        total += int(np.count_nonzero(acc))
    return total


def intersection_density(w: Word | str, shifts: Sequence[int], N: int) -> Fraction:
    """``|(E - n_1) ∩ ... ∩ (E - n_k) ∩ {0..N-1}| / N`` for ``E`` given by ``w``."""
    if N <= 0:
        raise InputError("N must be positive")
    w = Word(w) if not isinstance(w, Word) else w
    return Fraction(count_intersections(w.bits, shifts, N), N)


class FolnerSequence:
    """A sequence ``N -> F_N`` of finite nonempty subsets of the naturals (N >= 1).

    Use the constructors :meth:`initial_intervals`,
    :meth:`shifted_intervals` and :meth:`custom`.
    """

    def __init__(self, kind: str, generator: Callable[[int], np.ndarray], **params):
        self.kind = kind
        self._generator = generator
        self.params = params

    @classmethod
    def initial_intervals(cls) -> FolnerSequence:
        """``F_N = {0, ..., N-1}``."""
        return cls("initial_intervals", lambda N: np.arange(N, dtype=np.int64))

    @classmethod
    def shifted_intervals(cls, offsets: Callable[[int], int], lengths: Callable[[int], int]) -> FolnerSequence:
        """``F_N = {t_N + 1, ..., t_N + n_N}``."""
        def gen(N):
            t, n = int(offsets(N)), int(lengths(N))
            return np.arange(t + 1, t + n + 1, dtype=np.int64)
        return cls("shifted_intervals", gen, offsets=offsets, lengths=lengths)

    @classmethod
    def custom(cls, sets: Callable[[int], Iterable[int]]) -> FolnerSequence:
        return cls("custom", lambda N: np.unique(np.fromiter(sets(N), dtype=np.int64)), sets=sets)

    def __call__(self, N: int) -> np.ndarray:
        """Sorted elements of ``F_N``."""
        if N < 1:
            raise InputError("Følner index starts at N=1")
        F = np.asarray(self._generator(N), dtype=np.int64)
        if F.size == 0:
            raise InputError(f"F_{N} is empty")
        if F[0] < 0:
            raise InputError(f"F_{N} contains negative elements")
        return F

    def __repr__(self):
        return f"FolnerSequence({self.kind})"


def upper_density(w: Word | str, F: FolnerSequence, N_max: int) -> list[tuple[int, Fraction]]:
    """The ratios ``|E ∩ F_N| / |F_N|`` for ``N = 1..N_max``."""
    w = Word(w) if not isinstance(w, Word) else w
    bits = w.bits
    out = []
    if F.kind == "initial_intervals":
        if N_max > len(w):
            raise PrefixTooShortError(f"F_{N_max} reaches beyond word length {len(w)}")
        csum = np.cumsum(bits, dtype=np.int64)
        for N in range(1, N_max + 1):
            out.append((N, Fraction(int(csum[N - 1]), N)))
        return out
    for N in range(1, N_max + 1):
        FN = F(N)
        if FN[-1] >= len(w):
            raise PrefixTooShortError(f"F_{N} reaches {int(FN[-1])}, beyond word length {len(w)}")
        out.append((N, Fraction(int(bits[FN].sum()), FN.size)))
    return out


def folner_defect(F: FolnerSequence, t: int, N: int) -> Fraction:
    """``|F_N Δ (F_N + t)| / |F_N|``."""
    FN = F(N)
    sym = np.setxor1d(FN, FN + int(t), assume_unique=True)
    return Fraction(int(sym.size), int(FN.size))
