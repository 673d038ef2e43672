from fractions import Fraction as F

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrset.core import Cylinder, Word, cylinders_of_order, empirical_measure, full_blocks
from corrset.errors import ConstructionError, InputError
from corrset.measures import Bernoulli, LabeledMarkov, Mixture, PeriodicOrbit, RotationCoding
from corrset.synthesis import (below, block_law, continuation_deviation, cyclic_block_counts, ergodic_word,
                               law_deviation, periodic_approximant, reentry_threshold,
                               _rounded_counts)
from zoo import half_mixture, markov_chain, standard_measures


def exhaustive_deviation(x, nu, k):
    """Max over all cylinders of order <= k, straight from the definitions."""
    def diff(c):
        e, v = empirical_measure(x, c), nu.cylinder(c)
        if isinstance(v, F):
            return abs(e - v)
        return abs(mpmath.mpf(e.numerator) / e.denominator - v)
    with mpmath.workdps(60):
        return max(diff(c) for c in cylinders_of_order(k))


class TestErgodicWord:
    def test_bernoulli_half_pairs_exact(self):
        w = ergodic_word(Bernoulli(F(1, 2)), 2, F(1, 100), n_min=40)
        assert len(w) >= 40
        assert all(empirical_measure(w, c) == F(1, 4) for c in full_blocks(2))

    def test_orbit_is_its_own_word(self):
        w = ergodic_word(PeriodicOrbit("01"), 5, F(1, 1000), n_min=7)
        assert str(w) == "01010101"

    def test_swap_chain(self):
        nu = LabeledMarkov([[0, 1], [1, 0]], [F(1, 2), F(1, 2)], [0, 1])
        w = ergodic_word(nu, 2, F(1, 10))
        assert empirical_measure(w, Cylinder.block("01")) == F(1, 2)
        assert empirical_measure(w, Cylinder.block("10")) == F(1, 2)
        assert empirical_measure(w, Cylinder.block("00")) == 0

    @pytest.mark.parametrize("strategy", ["debruijn", "sample"])
    def test_bound_holds(self, strategy):
        nu = markov_chain()
        eps = F(1, 20)
        w = ergodic_word(nu, 3, eps, strategy=strategy)
        assert exhaustive_deviation(w, nu, 3) < eps

    def test_deterministic(self):
        nu = Bernoulli(F(1, 3))
        assert ergodic_word(nu, 6, F(1, 50)) == ergodic_word(nu, 6, F(1, 50))

    def test_errors(self):
        with pytest.raises(InputError):
            ergodic_word(Bernoulli(F(1, 2)), 2, 0)
        with pytest.raises(InputError):
            ergodic_word(half_mixture(), 2, F(1, 10))
        with pytest.raises(ConstructionError):
            ergodic_word(Bernoulli(F(1, 3)), 8, F(1, 10**6), max_length=1000)

    def test_rounded_counts_are_balanced_and_realised(self):
        law = block_law(markov_chain(), 7)
        counts = _rounded_counts(law, 5000, law.probabilities())
        m = 1 << 6
        codes = np.arange(1 << 7)
        out_deg = np.bincount(codes >> 1, weights=counts, minlength=m)
        in_deg = np.bincount(codes & (m - 1), weights=counts, minlength=m)
        assert np.array_equal(out_deg, in_deg)
        assert np.all(np.abs(counts - law.probabilities() * 5000) < 1)


class TestReentryThreshold:
    def test_examples(self):
        assert reentry_threshold(2, 2, F(1, 10)) == 200
        assert reentry_threshold(10, 1, 1) == 55
        assert reentry_threshold(3, 1, 100) == 3

    def test_invalid(self):
        with pytest.raises(InputError):
            reentry_threshold(0, 1, 1)


class TestPeriodicApproximant:
    def test_orbit_example(self):
        a = periodic_approximant(PeriodicOrbit("10"), 2, F(1, 10))
        assert str(a.x) == "10" and a.p == 2 and a.certificate == 0 and a.R0 == 200

    def test_mixture_example(self):
        eps = F(1, 10)
        a = periodic_approximant(half_mixture(), 1, eps)
        assert a.certificate < F(2, 25)
        assert abs(empirical_measure(a.x, Cylinder.ones([0])) - F(1, 4)) < F(2, 25)
        n1, n2 = a.block_lengths
        assert abs(F(n1, a.p) - F(1, 2)) < F(1, 20)
        assert a.proportions_ok()

    def test_bernoulli_k1(self):
        a = periodic_approximant(Bernoulli(F(1, 2)), 1, F(1, 2))
        assert a.certificate == 0 < F(2, 5)

    def test_certificate_is_exhaustive_max(self, named_measure):
        _, nu = named_measure
        for k, eps in [(2, F(1, 4)), (3, F(1, 10)), (4, F(1, 20))]:
            a = periodic_approximant(nu, k, eps)
            assert a.exhaustive
            assert a.certificate == exhaustive_deviation(a.x, nu, k)
            assert a.certificate < 4 * eps / 5

    def test_tiny_weight_component(self):
        nu = Mixture(((F(1, 1000), PeriodicOrbit("1")), (F(999, 1000), PeriodicOrbit("0"))))
        a = periodic_approximant(nu, 2, F(1, 10))
        assert a.proportions_ok() and a.block_lengths[0] >= a.base_lengths[0]
        a.check()

    def test_rotation(self):
        nu = RotationCoding("sqrt(2) - 1", 0, F(1, 2), 50)
        a = periodic_approximant(nu, 3, F(1, 5))
        assert below(a.certificate, F(4, 25))
        with mpmath.workdps(60):
            assert abs(exhaustive_deviation(a.x, nu, 3) - a.certificate) < mpmath.mpf(10) ** -40

    def test_large_order_uses_total_variation(self):
        a = periodic_approximant(Bernoulli(F(1, 3)), 13, F(1, 13))
        assert not a.exhaustive and a.certificate < F(4, 65)

    def test_deterministic(self):
        nu = markov_chain()
        assert periodic_approximant(nu, 6, F(1, 6)).x == periodic_approximant(nu, 6, F(1, 6)).x


class TestDeviation:
    @settings(max_examples=30, deadline=None)
    @given(st.text(alphabet="01", min_size=4, max_size=30), st.integers(1, 4))
    def test_total_variation_bounds_exact_max(self, w, k):
        nu = Bernoulli(F(2, 5))
        law = block_law(nu, k)
        counts = cyclic_block_counts(Word(w), k)
        exact, _ = law_deviation(counts, len(w), law.numerators, law.denominator, k, exhaustive=True)
        tv, _ = law_deviation(counts, len(w), law.numerators, law.denominator, k, exhaustive=False)
        assert exact == exhaustive_deviation(w, nu, k)
        assert exact <= tv

    @settings(max_examples=30, deadline=None)
    @given(st.text(alphabet="01", min_size=1, max_size=12), st.integers(0, 40), st.integers(1, 4),
           st.text(alphabet="01", min_size=3, max_size=3))
    def test_continuation_matches_definition(self, x, extra, k, tail):
        R = len(x) + extra
        y = Word(x).periodic_prefix(R) + Word(tail)
        got, _ = continuation_deviation(Word(x), R, Word(tail), k, exhaustive=True)
        bits = [int(b) for b in str(y)]
        ref = max(abs(F(sum(all(bits[i + p] == s for p, s in c.constraints) for i in range(R)), R)
                      - empirical_measure(x, c)) for c in cylinders_of_order(k))
        assert got == ref
