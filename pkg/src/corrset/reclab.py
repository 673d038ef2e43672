"""Bounded experiments on recurrence and intersectivity.

Measure-side searches are exact; set-side searches count on a finite
prefix (or a stream) of an indicator sequence.  A result of ``None``
always means "no witness up to ``r_max``", never a disproof.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath

from corrset.core import Cylinder, Word, intersection_density
from corrset.errors import CertificationError, InputError, PrefixTooShortError
from corrset.generic import BitStream, generic_stream
from corrset.measures import ShiftMeasure, align, correlation, working_digits


@dataclass(frozen=True)
class ShiftSet:
    """A set ``R`` of positive integers, enumerated in increasing order.

    ``kind`` is ``squares``, ``multiples`` (``m``), ``polynomial``
    (``coefficients``, constant term first, evaluated at n = 0, 1, 2, ...)
    or ``explicit`` (``values``).
    """

    kind: str
    m: int = 0
    coefficients: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.kind == "multiples" and self.m < 1:
            raise InputError("multiples needs m >= 1")
        if self.kind == "polynomial" and not any(self.coefficients):
            raise InputError("polynomial needs a nonzero coefficient")
        if self.kind not in ("squares", "multiples", "polynomial", "explicit"):
            raise InputError(f"unknown shift set kind {self.kind!r}")

    @classmethod
    def squares(cls) -> ShiftSet:
        return cls("squares")

    @classmethod
    def multiples(cls, m: int) -> ShiftSet:
        return cls("multiples", m=int(m))

    @classmethod
    def polynomial(cls, coefficients: Sequence[int]) -> ShiftSet:
        return cls("polynomial", coefficients=tuple(int(c) for c in coefficients))

    @classmethod
    def odds(cls) -> ShiftSet:
        return cls.polynomial([1, 2])

    @classmethod
    def explicit(cls, values: Iterable[int]) -> ShiftSet:
        return cls("explicit", values=tuple(sorted({int(v) for v in values})))

    def elements(self, r_max: int) -> list[int]:
        """Elements of ``R`` in ``[1, r_max]``, increasing."""
        if self.kind == "squares":
            out, n = [], 1
            while n * n <= r_max:
                out.append(n * n)
                n += 1
            return out
        if self.kind == "multiples":
            return list(range(self.m, r_max + 1, self.m))
        if self.kind == "explicit":
            return [v for v in self.values if 1 <= v <= r_max]
        # |p(n)| > r_max once n exceeds r_max plus the lower coefficients' absolute sum
        bound = r_max + sum(abs(c) for c in self.coefficients) + 2
        vals = {sum(c * n ** i for i, c in enumerate(self.coefficients)) for n in range(bound)}
        return sorted(v for v in vals if 1 <= v <= r_max)

    def to_config(self) -> dict:
        if self.kind == "multiples":
            return {"kind": "multiples", "m": self.m}
        if self.kind == "polynomial":
            return {"kind": "polynomial", "coefficients": list(self.coefficients)}
        if self.kind == "explicit":
            return {"kind": "explicit", "values": list(self.values)}
        return {"kind": self.kind}


def shift_set_from_config(cfg) -> ShiftSet:
    if isinstance(cfg, str):
        cfg = {"kind": cfg}
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise InputError("R must be a name or an object with a 'kind' field")
    kind = cfg["kind"]
    if kind == "squares":
        return ShiftSet.squares()
    if kind == "odds":
        return ShiftSet.odds()
    if kind == "multiples":
        return ShiftSet.multiples(cfg.get("m", 0))
    if kind == "polynomial":
        return ShiftSet.polynomial(cfg.get("coefficients", ()))
    if kind == "explicit":
        return ShiftSet.explicit(cfg.get("values", ()))
    raise InputError(f"R.kind: unknown shift set {kind!r}")


def _target(target: Cylinder | None) -> Cylinder:
    return Cylinder.ones([0]) if target is None else target


def return_mass(nu: ShiftMeasure, r: int, target: Cylinder | None = None):
    """``nu(C ∩ sigma^-r C)`` for the target cylinder ``C`` (default ``[w_0 = 1]``)."""
    C = _target(target)
    joint = dict(C.constraints)
    for p, s in C.shift(r).constraints:
        if joint.get(p, s) != s:
            return Fraction(0)
        joint[p] = s
    return nu.cylinder(Cylinder.of(joint))


def recurrence_witness(nu: ShiftMeasure, R: ShiftSet, r_max: int, target: Cylinder | None = None) -> int | None:
    """Least ``r`` in ``R ∩ [1, r_max]`` with ``nu(B ∩ sigma^-r B) > 0``."""
    for r in R.elements(r_max):
        if return_mass(nu, r, target) > 0:
            return r
    return None


def nice_recurrence_witness(nu: ShiftMeasure, R: ShiftSet, eps, r_max: int,
                            target: Cylinder | None = None) -> int | None:
    """Least ``r`` with ``nu(B ∩ sigma^-r B) > nu(B)^2 - eps``."""
    eps = Fraction(eps)
    if eps <= 0:
        raise InputError("eps must be positive")
    with mpmath.workdps(working_digits(nu)):
        mass, eps = align(nu.cylinder(_target(target)), eps)
        level = mass ** 2 - eps
        for r in R.elements(r_max):
            value, level = align(return_mass(nu, r, target), level)
            if value > level:
                return r
    return None


def _set_densities(w, R: ShiftSet, r_max: int, N: int):
    """``d_N(E)`` and ``r -> d_N(E ∩ (E - r))`` for a prefix or a stream."""
    if N <= 0:
        raise InputError("N must be positive")
    if isinstance(w, BitStream):
        return w.density([0], N), (lambda r: w.density([0, r], N))
    w = Word(w)
    if len(w) < N + r_max:
        raise PrefixTooShortError(f"prefix of length {len(w)} < N + r_max = {N + r_max}")
    return intersection_density(w, [0], N), (lambda r: intersection_density(w, [0, r], N))


def nice_intersectivity_witness(w, R: ShiftSet, eps, r_max: int, N: int) -> int | None:
    """Least ``r`` with ``d_N(E ∩ (E - r)) > d_N(E)^2 - eps`` for ``E`` given by ``w``.

    ``w`` is a prefix of the indicator of ``E`` (at least ``N + r_max``
    symbols) or a :class:`~corrset.generic.BitStream`.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise InputError("eps must be positive")
    base, pair = _set_densities(w, R, r_max, N)
    level = base ** 2 - eps
    for r in R.elements(r_max):
        if pair(r) > level:
            return r
    return None


@dataclass(frozen=True)
class Probe:
    r: int
    correlation: object
    empirical: Fraction
    gap: object
    measure_margin: object
    set_margin: object

    @property
    def decisive(self) -> bool:
        """The finite-N deviation is too small to flip the threshold test."""
        return abs(self.set_margin - self.measure_margin) < abs(self.measure_margin)


@dataclass(frozen=True)
class TransferReport:
    measure_witness: int | None
    set_witness: int | None
    N: int
    stage: int
    eps: Fraction
    r_max: int
    probes: list = field(default_factory=list)

    @property
    def agree(self) -> bool:
        return self.measure_witness == self.set_witness

    @property
    def decisive(self) -> bool:
        return all(p.decisive for p in self.probes)

    def as_dict(self) -> dict:
        return {
            "measure_witness": self.measure_witness, "set_witness": self.set_witness,
            "N": self.N, "stage": self.stage, "eps": str(self.eps), "r_max": self.r_max,
            "agree": self.agree, "decisive": self.decisive, "bounded_search": True,
            "probes": [{"r": p.r, "correlation": str(p.correlation), "empirical": str(p.empirical),
                        "gap": str(p.gap), "decisive": p.decisive} for p in self.probes],
        }


def transfer_experiment(system: ShiftMeasure, R: ShiftSet, eps, r_max: int, N: int,
                        stream: BitStream | None = None) -> TransferReport:
    """Compare the exact recurrence witness with the set-side witness on the constructed ``E``.

    ``E`` is the set of ones of the generic stream for ``system``.  Every
    ``r`` up to the later of the two witnesses is probed; when each probe's
    finite-N deviation is smaller than its exact margin the two searches
    must agree, and a disagreement then raises :class:`CertificationError`.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise InputError("eps must be positive")
    stream = stream or generic_stream(system)
    mw = nice_recurrence_witness(system, R, eps, r_max)
    sw = nice_intersectivity_witness(stream, R, eps, r_max, N)
    stage, _ = stream.stage_of(N)
    mass = correlation(system, [0])
    d = stream.density([0], N)
    last = r_max if mw is None or sw is None else max(mw, sw)
    probes = []
    with mpmath.workdps(working_digits(system)):
        for r in R.elements(last):
            c = correlation(system, [0, r])
            e = stream.density([0, r], N)
            c_, e_, m_, d_, eps_ = align(c, e, mass, d, eps)
            probes.append(Probe(r, c, e, abs(e_ - c_), c_ - m_ ** 2 + eps_, e_ - d_ ** 2 + eps_))
    report = TransferReport(mw, sw, N, stage, eps, r_max, probes)
    if report.decisive and not report.agree:
        raise CertificationError(f"decisive probes but witnesses differ: {mw} vs {sw}")
    return report


def r3_set(nu: ShiftMeasure, eps, n_max: int) -> list[int]:
    """``{n <= n_max : nu(B ∩ sigma^-n B ∩ sigma^-2n B) > nu(B)^3 - eps}``."""
    eps = Fraction(eps)
    if eps <= 0:
        raise InputError("eps must be positive")
    with mpmath.workdps(working_digits(nu)):
        mass, eps = align(correlation(nu, [0]), eps)
        level = mass ** 3 - eps
        out = []
        for n in range(1, n_max + 1):
            value, lv = align(correlation(nu, [0, n, 2 * n]), level)
            if value > lv:
                out.append(n)
        return out


def witness_sweep(measures: Sequence[tuple[str, ShiftMeasure]], R: ShiftSet, eps, r_max: int) -> list[dict]:
    """Measure-side witnesses for each member of a finite family of measures."""
    return [{"name": name, "recurrence": recurrence_witness(nu, R, r_max),
             "nice_recurrence": nice_recurrence_witness(nu, R, eps, r_max)} for name, nu in measures]
