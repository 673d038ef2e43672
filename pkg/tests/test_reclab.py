from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from corrset.core import Cylinder, Word
from corrset.errors import InputError, PrefixTooShortError
from corrset.measures import Bernoulli, FiniteMPS, PeriodicOrbit
from corrset.reclab import (ShiftSet, nice_intersectivity_witness, nice_recurrence_witness, r3_set,
                            recurrence_witness, return_mass, shift_set_from_config, transfer_experiment,
                            witness_sweep)
from zoo import half_mixture, markov_chain, z6

EVENS = Word("10" * 600)


class TestShiftSet:
    def test_enumeration(self):
        assert ShiftSet.squares().elements(50) == [1, 4, 9, 16, 25, 36, 49]
        assert ShiftSet.multiples(7).elements(30) == [7, 14, 21, 28]
        assert ShiftSet.odds().elements(10) == [1, 3, 5, 7, 9]
        assert ShiftSet.polynomial([-3, 0, 1]).elements(40) == [1, 6, 13, 22, 33]
        assert ShiftSet.explicit([5, 0, 3, 3, 99]).elements(10) == [3, 5]

    def test_config(self):
        for R in [ShiftSet.squares(), ShiftSet.multiples(3), ShiftSet.odds(), ShiftSet.explicit([2, 4])]:
            assert shift_set_from_config(R.to_config()) == R
        assert shift_set_from_config("odds") == ShiftSet.odds()
        with pytest.raises(InputError):
            shift_set_from_config({"kind": "primes"})
        with pytest.raises(InputError):
            ShiftSet.multiples(0)


class TestMeasureSide:
    def test_recurrence_examples(self):
        assert recurrence_witness(Bernoulli(F(1, 2)), ShiftSet.squares(), 10) == 1
        assert recurrence_witness(PeriodicOrbit("01"), ShiftSet.explicit([1, 3, 5]), 5) is None
        assert recurrence_witness(PeriodicOrbit("01"), ShiftSet.squares(), 10) == 4

    def test_nice_recurrence_examples(self):
        for p in (F(1, 5), F(1, 2), F(9, 10)):
            assert nice_recurrence_witness(Bernoulli(p), ShiftSet.multiples(3), F(1, 1000), 30) == 3
        assert nice_recurrence_witness(PeriodicOrbit("01"), ShiftSet.odds(), F(1, 8), 999) is None
        assert nice_recurrence_witness(half_mixture(), ShiftSet.explicit([2]), F(1, 100), 10) == 2

    def test_custom_target(self):
        target = Cylinder.block("10")
        assert return_mass(PeriodicOrbit("10"), 1, target) == 0
        assert return_mass(PeriodicOrbit("10"), 2, target) == F(1, 2)
        assert recurrence_witness(PeriodicOrbit("100"), ShiftSet.squares(), 20, target) == 9

    @settings(max_examples=30, deadline=None)
    @given(st.sampled_from([F(1, 100), F(1, 20), F(1, 8)]), st.sampled_from([F(1, 5), F(1, 2), F(3, 4)]),
           st.integers(1, 60))
    def test_monotone_in_eps_and_r_max(self, eps, factor, r_max):
        nu, R = markov_chain(), ShiftSet.squares()
        small, large = nice_recurrence_witness(nu, R, eps * factor, r_max), nice_recurrence_witness(nu, R, eps, r_max)
        if small is not None:
            assert large is not None and large <= small
        if nice_recurrence_witness(nu, R, eps, r_max // 2 or 1) is not None:
            assert large is not None

    def test_sweep(self):
        rows = witness_sweep([("orbit", PeriodicOrbit("01")), ("z6", z6())], ShiftSet.odds(), F(1, 8), 9)
        assert [(r["name"], r["recurrence"], r["nice_recurrence"]) for r in rows] == [
            ("orbit", None, None), ("z6", 1, 1)]


class TestSetSide:
    def test_examples(self):
        assert nice_intersectivity_witness(EVENS, ShiftSet.explicit([2]), F(1, 100), 2, 1000) == 2
        assert nice_intersectivity_witness(EVENS, ShiftSet.explicit([1]), F(1, 8), 1, 1000) is None
        assert nice_intersectivity_witness(Word("1" * 1100), ShiftSet.squares(), F(1, 50), 50, 1000) == 1

    def test_prefix_too_short(self):
        with pytest.raises(PrefixTooShortError):
            nice_intersectivity_witness(EVENS, ShiftSet.squares(), F(1, 8), 300, 1000)


class TestTransfer:
    def test_orbit_odds(self):
        rep = transfer_experiment(PeriodicOrbit("01"), ShiftSet.odds(), F(1, 8), 99, 10**5)
        assert rep.measure_witness is None and rep.set_witness is None
        assert rep.decisive and rep.agree

    def test_bernoulli_least_element(self):
        rep = transfer_experiment(Bernoulli(F(1, 2)), ShiftSet.multiples(5), F(1, 8), 99, 10**5)
        assert rep.measure_witness == rep.set_witness == 5

    def test_z6_squares(self):
        rep = transfer_experiment(z6(), ShiftSet.squares(), F(1, 10), 50, 10**5)
        assert rep.measure_witness == 1 and rep.agree
        assert rep.as_dict()["bounded_search"] is True


class TestR3:
    def test_examples(self):
        assert r3_set(Bernoulli(F(1, 2)), F(1, 100), 10) == list(range(1, 11))
        assert r3_set(PeriodicOrbit("01"), F(1, 16), 8) == [2, 4, 6, 8]
        assert r3_set(FiniteMPS((F(1, 3),) * 3, (1, 2, 0), {0}), F(1, 100), 9) == [3, 6, 9]

    @given(st.sampled_from([F(1, 7), F(1, 3), F(4, 5)]), st.sampled_from([F(1, 10**6), F(1, 3)]))
    def test_product_measure_is_everything(self, p, eps):
        assert r3_set(Bernoulli(p), eps, 12) == list(range(1, 13))
