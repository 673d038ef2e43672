"""Generic points by concatenating periodic approximants.

Stage ``j`` uses an approximant ``x^j`` of order ``k_j = j`` and accuracy
``eps_j = 1/j`` and contributes the block ``x^j|_{L_j}`` (a prefix of the
periodic extension of ``x^j``).  The block lengths are the least values
satisfying

    (i)   L_j >= R_j
    (ii)  R_{j+1} / L_j < 1/j
    (iii) L_j / S_j > 1 - 1/j,     S_j = L_1 + ... + L_j

so the concatenation ``y`` has ``delta_N(y) -> nu``.  Condition (iii)
makes ``S_j`` grow faster than ``j!``, so long prefixes are never
materialised for counting: every block is periodic, and window counts
over it follow from one period.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import struct
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import mpmath
import numpy as np

from corrset import _kernels
from corrset.core import Cylinder, Word, intersection_density
from corrset.errors import InputError, PrefixTooShortError, ScheduleError
from corrset.measures import ShiftMeasure, align, correlation, working_digits
from corrset.synthesis import Approximant, periodic_approximant

DEFAULT_MAX_STAGE = 22
DEFAULT_MAX_BITS = 1 << 31
ENVELOPE = 10
CHUNK_BITS = 1 << 24
HEADER = struct.Struct("<Q")


def next_block_length(j: int, R_j: int, R_next: int, S_prev: int) -> int:
    """Least ``L_j`` meeting (i)-(iii): ``max(R_j, j R_{j+1} + 1, (j-1) S_{j-1} + 1)``."""
    return max(R_j, j * R_next + 1, (j - 1) * S_prev + 1)


def check_conditions(j: int, R_j: int, R_next: int, L_j: int, S_j: int) -> None:
    """Assert (i)-(iii) for stage ``j`` in exact integer arithmetic."""
    if not L_j >= R_j:
        raise ScheduleError(f"stage {j}: condition (i) fails, L={L_j} < R={R_j}")
    if not j * R_next < L_j:
        raise ScheduleError(f"stage {j}: condition (ii) fails, R_next/L = {R_next}/{L_j} >= 1/{j}")
    if not j * L_j > (j - 1) * S_j:
        raise ScheduleError(f"stage {j}: condition (iii) fails, L/S = {L_j}/{S_j} <= 1 - 1/{j}")


def block_lengths(thresholds: Sequence[int]) -> list[int]:
    """Block lengths ``L_1..L_n`` from thresholds ``R_1..R_{n+1}``.

    >>> block_lengths([10, 40, 600, 1000])
    [41, 1201, 3001]
    """
    out, S = [], 0
    for j in range(1, len(thresholds)):
        L = next_block_length(j, thresholds[j - 1], thresholds[j], S)
        S += L
        check_conditions(j, thresholds[j - 1], thresholds[j], L, S)
        out.append(L)
    return out


@dataclass(frozen=True)
class Stage:
    j: int
    k: int
    epsilon: Fraction
    approximant: Approximant
    R: int
    L: int
    S: int

    @property
    def start(self) -> int:
        return self.S - self.L


class Schedule:
    """Stages of the construction for one measure, extended on demand.

    Building stage ``j`` needs the approximant of stage ``j + 1`` (its
    threshold enters condition (ii)), which is kept as ``lookahead``.
    """

    def __init__(self, nu: ShiftMeasure, *, strategy: str = "debruijn",
                 max_stage: int = DEFAULT_MAX_STAGE):
        self.nu = nu
        self.strategy = strategy
        self.max_stage = max_stage
        self.stages: list[Stage] = []
        self.lookahead: Approximant | None = None
        self._ends: list[int] = []

    def _approximant(self, j: int) -> Approximant:
        return periodic_approximant(self.nu, j, Fraction(1, j), strategy=self.strategy)

    def extend(self, stages: int) -> Schedule:
        if stages > self.max_stage:
            raise ScheduleError(f"stage {stages} exceeds the configured limit of {self.max_stage}")
        while len(self.stages) < stages:
            j = len(self.stages) + 1
            cur = self.lookahead or self._approximant(j)
            nxt = self._approximant(j + 1)
            S_prev = self.stages[-1].S if self.stages else 0
            L = next_block_length(j, cur.R0, nxt.R0, S_prev)
            S = S_prev + L
            check_conditions(j, cur.R0, nxt.R0, L, S)
            self.stages.append(Stage(j, j, Fraction(1, j), cur, cur.R0, L, S))
            self._ends.append(S)
            self.lookahead = nxt
        return self

    def cover(self, n: int) -> Schedule:
        """Extend until the built stages span at least ``n`` symbols."""
        while not self._ends or self._ends[-1] < n:
            self.extend(len(self.stages) + 1)
        return self

    def __len__(self):
        return len(self.stages)

    def __getitem__(self, j: int) -> Stage:
        """Stage ``j`` (1-based)."""
        if not 1 <= j <= len(self.stages):
            raise ScheduleError(f"stage {j} not built (have {len(self.stages)})")
        return self.stages[j - 1]

    def __iter__(self) -> Iterator[Stage]:
        return iter(self.stages)

    @property
    def boundaries(self) -> list[int]:
        """``[S_1, S_2, ...]``."""
        return list(self._ends)

    def block_index(self, pos: int) -> int:
        """1-based stage whose block contains position ``pos`` (must be built)."""
        j = bisect.bisect_right(self._ends, pos) + 1
        if j > len(self.stages):
            raise ScheduleError(f"position {pos} beyond the built schedule")
        return j

    def check(self) -> None:
        """Re-assert every stage condition and every approximant certificate."""
        S = 0
        for st in self.stages:
            S += st.L
            R_next = self.stages[st.j].R if st.j < len(self.stages) else self.lookahead.R0
            if st.S != S:
                raise ScheduleError(f"stage {st.j}: cumulative length mismatch")
            if st.k != st.j or st.epsilon != Fraction(1, st.j) or st.R != st.approximant.R0:
                raise ScheduleError(f"stage {st.j}: inconsistent stage parameters")
            check_conditions(st.j, st.R, R_next, st.L, st.S)
            st.approximant.check()


def build_schedule(nu: ShiftMeasure, stages: int, *, strategy: str = "debruijn",
                   max_stage: int | None = None) -> Schedule:
    """Schedule with ``stages`` stages; conditions (i)-(iii) are asserted as it is built."""
    if stages < 1:
        raise InputError("stages must be at least 1")
    limit = max(stages, DEFAULT_MAX_STAGE) if max_stage is None else max_stage
    return Schedule(nu, strategy=strategy, max_stage=limit).extend(stages)


def stage_of(N: int, schedule: Schedule) -> tuple[int, int]:
    """``(k, L)`` with ``S_k <= N < S_{k+1}`` and ``N = S_k + L`` (``k = 0`` below ``S_1``)."""
    if N < 0:
        raise InputError("N must be nonnegative")
    ends = schedule.boundaries
    k = bisect.bisect_right(ends, N)
    if k >= len(ends):
        raise ScheduleError(f"N={N} is not below S_{len(ends)}={ends[-1] if ends else 0}; extend the schedule")
    return k, N - (ends[k - 1] if k else 0)


class BitStream:
    """The sequence ``y = x^1|_{L_1} x^2|_{L_2} ...`` for one measure.

    Bits are produced on demand and the schedule grows lazily.  Window
    statistics are computed per block from one period, so they are
    available far beyond what could be materialised.
    """

    def __init__(self, nu: ShiftMeasure, *, strategy: str = "debruijn",
                 max_stage: int = DEFAULT_MAX_STAGE, max_bits: int = DEFAULT_MAX_BITS):
        self.schedule = Schedule(nu, strategy=strategy, max_stage=max_stage)
        self.max_bits = max_bits
        self._codes: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
        self._cumulative: dict[int, list[np.ndarray]] = {}
        self._matches: dict[tuple[int, Cylinder], np.ndarray] = {}
        self._hit_totals: dict[Cylinder, list[int]] = {}

    @property
    def nu(self) -> ShiftMeasure:
        return self.schedule.nu

    def stage_of(self, N: int) -> tuple[int, int]:
        self.schedule.cover(N + 1)
        return stage_of(N, self.schedule)

    def bits(self, a: int, b: int) -> np.ndarray:
        """``y[a:b]`` as a uint8 array."""
        if not 0 <= a <= b:
            raise InputError(f"bad range [{a}, {b})")
        if b - a > self.max_bits:
            raise InputError(f"{b - a} bits requested, limit is {self.max_bits}")
        out = np.empty(b - a, np.uint8)
        if a == b:
            return out
        sched = self.schedule.cover(b)
        pos = a
        while pos < b:
            st = sched[sched.block_index(pos)]
            hi = min(b, st.S)
            x = st.approximant.x.bits
            off = pos - st.start
            out[pos - a:hi - a] = x[np.arange(off, off + hi - pos) % len(x)]
            pos = hi
        return out

    def prefix(self, N: int) -> Word:
        return Word(self.bits(0, N))

    def chunks(self, N: int, size: int = CHUNK_BITS) -> Iterator[np.ndarray]:
        """``y[0:N]`` in consecutive pieces of at most ``size`` bits."""
        if size <= 0:
            raise InputError("chunk size must be positive")
        if N > self.max_bits:
            raise InputError(f"{N} bits requested, limit is {self.max_bits}")
        for lo in range(0, N, size):
            yield self.bits(lo, min(N, lo + size))

    def _period_codes(self, j: int, K: int):
        key = (j, K)
        if key not in self._codes:
            x = self.schedule[j].approximant.x.bits
            codes = _kernels.window_codes(x, K, 0, len(x), True)
            self._codes[key] = codes, np.bincount(codes, minlength=1 << K).astype(object)
        return self._codes[key]

    def _block_counts(self, j: int, K: int, lo: int, hi: int) -> np.ndarray:
        """Histogram of K-window codes starting at offsets ``[lo, hi)`` of block ``j``."""
        st = self.schedule[j]
        inner = min(hi, st.L - K + 1)  # windows starting before here stay in the block
        counts = np.zeros(1 << K, dtype=object)
        if inner > lo:
            codes, full = self._period_codes(j, K)
            p = len(codes)
            q, r = divmod(inner - lo, p)
            if q:
                counts = counts + full * q
            if r:
                counts = counts + np.bincount(codes[(lo + np.arange(r)) % p], minlength=1 << K).astype(object)
        a = max(lo, inner)
        if hi > a:
            edge = self.bits(st.start + a, st.start + hi + K - 1)
            codes = _kernels.window_codes(edge, K, 0, hi - a, False)
            counts = counts + np.bincount(codes, minlength=1 << K).astype(object)
        return counts

    def window_histogram(self, K: int, N: int) -> np.ndarray:
        """Counts (Python ints) of the big-endian codes of ``y[i:i+K]`` for ``0 <= i < N``."""
        if K < 1:
            raise InputError("window length must be positive")
        if N < 0:
            raise InputError("N must be nonnegative")
        sched = self.schedule.cover(N + K)
        cum = self._cumulative.setdefault(K, [np.zeros(1 << K, dtype=object)])
        k = bisect.bisect_right(sched.boundaries, N)
        while len(cum) <= k:
            j = len(cum)
            cum.append(cum[-1] + self._block_counts(j, K, 0, sched[j].L))
        out = cum[k]
        if N > (sched[k].S if k else 0):
            out = out + self._block_counts(k + 1, K, 0, N - (sched[k].S if k else 0))
        return out

    def _period_matches(self, j: int, cyl: Cylinder) -> np.ndarray:
        key = (j, cyl)
        if key not in self._matches:
            x = self.schedule[j].approximant.x.bits
            idx = np.arange(len(x))
            hit = np.ones(len(x), bool)
            for pos, sym in cyl.constraints:
                hit &= x[(idx + pos) % len(x)] == sym
            self._matches[key] = hit
        return self._matches[key]

    def _block_hits(self, j: int, cyl: Cylinder, lo: int, hi: int) -> int:
        """``#{lo <= o < hi : sigma^(start_j + o) y in cyl}``."""
        st = self.schedule[j]
        K = max(cyl.order, 1)
        inner = min(hi, st.L - K + 1)
        total = 0
        if inner > lo:
            hit = self._period_matches(j, cyl)
            p = hit.size
            q, r = divmod(inner - lo, p)
            total += q * int(np.count_nonzero(hit))
            if r:
                total += int(np.count_nonzero(hit[(lo + np.arange(r)) % p]))
        a = max(lo, inner)
        if hi > a:
            edge = self.bits(st.start + a, st.start + hi + K - 1)
            acc = np.ones(hi - a, bool)
            for pos, sym in cyl.constraints:
                acc &= edge[pos:pos + hi - a] == sym
            total += int(np.count_nonzero(acc))
        return total

    def count_cylinder(self, cyl: Cylinder, N: int) -> int:
        """``#{i < N : sigma^i y in cyl}``."""
        if N < 0:
            raise InputError("N must be nonnegative")
        sched = self.schedule.cover(N + max(cyl.order, 1))
        cum = self._hit_totals.setdefault(cyl, [0])
        k = bisect.bisect_right(sched.boundaries, N)
        while len(cum) <= k:
            j = len(cum)
            cum.append(cum[-1] + self._block_hits(j, cyl, 0, sched[j].L))
        done = sched[k].S if k else 0
        return cum[k] + (self._block_hits(k + 1, cyl, 0, N - done) if N > done else 0)

    def count(self, shifts: Sequence[int], N: int) -> int:
        """``#{i < N : y[i + n] = 1 for every n in shifts}``."""
        shifts = list(shifts)
        if not shifts:
            raise InputError("shifts must be nonempty")
        if min(shifts) < 0:
            raise InputError("shifts must be nonnegative")
        return self.count_cylinder(Cylinder.ones(shifts), N)

    def density(self, shifts: Sequence[int], N: int) -> Fraction:
        if N <= 0:
            raise InputError("N must be positive")
        return Fraction(self.count(shifts, N), N)

    def empirical(self, cyl: Cylinder, N: int) -> Fraction:
        """``delta_N(y)(cyl)``."""
        if N <= 0:
            raise InputError("N must be positive")
        return Fraction(self.count_cylinder(cyl, N), N)


def generic_stream(nu: ShiftMeasure, **options) -> BitStream:
    """Deterministic stream of a generic point for ``nu`` along ``{0, ..., N-1}``."""
    return BitStream(nu, **options)


@dataclass(frozen=True)
class ReportRow:
    N: int
    shifts: tuple
    empirical: Fraction
    exact: object
    abs_error: object
    stage: int

    def as_record(self) -> dict:
        return {"N": self.N, "shifts": " ".join(map(str, self.shifts)), "empirical": _fmt(self.empirical),
                "exact": _fmt(self.exact), "abs_error": _fmt(self.abs_error), "stage": self.stage}


REPORT_COLUMNS = ("N", "shifts", "empirical", "exact", "abs_error", "stage")


def _fmt(v) -> str:
    if isinstance(v, Fraction):
        return str(v)
    return mpmath.nstr(v, 30)


def convergence_report(nu: ShiftMeasure, stream: BitStream | Word, shift_tuples: Iterable[Sequence[int]],
                       N_grid: Sequence[int], schedule: Schedule | None = None) -> list[ReportRow]:
    """Empirical against exact correlations on a grid of N, tagged with ``k(N)``.

    ``stream`` is a :class:`BitStream` (counted per block) or a
    materialised prefix (counted directly); a prefix needs ``schedule``
    for the stage column.
    """
    N_grid = [int(N) for N in N_grid]
    if not N_grid:
        raise InputError("N_grid must be nonempty")
    if any(b <= a for a, b in zip(N_grid, N_grid[1:])) or N_grid[0] <= 0:
        raise InputError("N_grid must be positive and strictly increasing")
    tuples = [tuple(int(s) for s in t) for t in shift_tuples]
    if not tuples:
        raise InputError("no shift tuples given")
    if isinstance(stream, BitStream):
        schedule = stream.schedule
        emp = stream.density
    else:
        if schedule is None:
            raise InputError("a schedule is needed to label stages of a stored prefix")
        word = stream
        need = N_grid[-1] + max(max(t) for t in tuples)
        if len(word) < need:
            raise PrefixTooShortError(f"prefix has {len(word)} bits, report needs {need}")

        def emp(shifts, N):
            return intersection_density(word, shifts, N)
    rows = []
    for N in N_grid:
        if isinstance(stream, BitStream):
            stream.schedule.cover(N + 1)
        k, _ = stage_of(N, schedule)
        for t in tuples:
            e = emp(t, N)
            with mpmath.workdps(working_digits(nu)):
                exact = correlation(nu, t)
                a, b = align(e, exact)
                rows.append(ReportRow(N, t, e, exact, abs(a - b), k))
    return rows


def report_csv(rows: Sequence[ReportRow]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r.as_record())
    return buf.getvalue()


def write_prefix(path: str | Path, source: BitStream | Word | np.ndarray, N: int | None = None,
                 chunk_bits: int = CHUNK_BITS) -> int:
    """Write a bit-packed prefix file; returns the number of bits written.

    Layout: 8-byte little-endian bit count, then the bits packed eight per
    byte, least significant bit first.
    """
    if chunk_bits % 8:
        raise InputError("chunk size must be a multiple of 8 bits")
    if isinstance(source, BitStream):
        if N is None:
            raise InputError("N is required when writing from a stream")
        pieces = source.chunks(N, chunk_bits)
    else:
        bits = Word(source).bits
        N = len(bits) if N is None else N
        if N > len(bits):
            raise PrefixTooShortError(f"cannot write {N} bits from a {len(bits)}-bit prefix")
        pieces = (bits[lo:min(N, lo + chunk_bits)] for lo in range(0, N, chunk_bits))
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(N))
        for piece in pieces:
            fh.write(np.packbits(piece, bitorder="little").tobytes())
    return N


def read_prefix(path: str | Path) -> Word:
    """Read a file written by :func:`write_prefix`."""
    data = Path(path).read_bytes()
    if len(data) < HEADER.size:
        raise InputError(f"{path}: truncated header")
    (n,) = HEADER.unpack_from(data)
    body = np.frombuffer(data, np.uint8, offset=HEADER.size)
    if body.size != (n + 7) // 8:
        raise InputError(f"{path}: header says {n} bits but body has {body.size} bytes")
    return Word(np.unpackbits(body, count=n, bitorder="little"))


def write_ascii(path: str | Path, source: BitStream | Word, N: int | None = None) -> int:
    """Debug format: the bits as ``0``/``1`` characters, then a newline."""
    word = source.prefix(N) if isinstance(source, BitStream) else Word(source)
    if N is not None and not isinstance(source, BitStream):
        word = Word(word.bits[:N])
    Path(path).write_text(str(word) + "\n")
    return len(word)


def read_ascii(path: str | Path) -> Word:
    return Word(Path(path).read_text().strip())


def schedule_manifest(schedule: Schedule) -> list[dict]:
    """Per-stage records from which (i)-(iii) and every certificate can be rechecked."""
    out = []
    for st in schedule:
        a = st.approximant
        out.append({
            "j": st.j, "k": st.k, "eps": str(st.epsilon), "p": a.p, "R": st.R, "L": st.L, "S": st.S,
            "certificate": str(a.certificate), "certificate_exhaustive": a.exhaustive,
            "weights": [str(w) for w in a.weights], "base_lengths": list(a.base_lengths),
            "block_lengths": list(a.block_lengths),
        })
    return out


def manifest_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
