from fractions import Fraction as F
from itertools import product

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from corrset.core import Cylinder, cylinders_of_order, full_blocks
from corrset.errors import MeasureError, PrecisionError
from corrset.measures import (Bernoulli, CircleRotation, FiniteMPS, FiniteSystem, LabeledMarkov, Mixture,
                              PeriodicOrbit, RotationCoding, correlation, cylinder_measure, ergodic_decomposition,
                              measure_from_config, mps_pushforward)
from zoo import MARKOV_P, MARKOV_PI, half_mixture, markov_chain, z6

SQRT2_M1 = "sqrt(2) - 1"


def rotation():
    return RotationCoding(SQRT2_M1, 0, F(1, 2), 50)


class TestExamples:
    def test_bernoulli(self):
        assert cylinder_measure(Bernoulli(F(1, 2)), Cylinder.ones([0, 2])) == F(1, 4)
        assert correlation(Bernoulli(F(1, 3)), [0]) == F(1, 3)

    def test_z6(self):
        assert cylinder_measure(z6(), Cylinder.ones([0, 1])) == F(1, 3)
        assert cylinder_measure(z6(), Cylinder.ones([0, 2])) == F(1, 6)

    def test_z4_pushforward(self):
        nu = mps_pushforward(FiniteSystem([F(1, 4)] * 4, [1, 2, 3, 0], [0, 1]))
        assert cylinder_measure(nu, Cylinder.ones([0, 1])) == F(1, 4)
        assert cylinder_measure(nu, Cylinder()) == 1

    def test_rotation(self):
        with mpmath.workdps(50):
            expected = mpmath.mpf(1) / 2 - (mpmath.sqrt(2) - 1)
            assert abs(cylinder_measure(rotation(), Cylinder.ones([0, 1])) - expected) < mpmath.mpf(10) ** -45
        assert abs(float(expected) - 0.0858) < 1e-4

    def test_mixture(self):
        assert cylinder_measure(half_mixture(), Cylinder.ones([0])) == F(1, 4)

    def test_correlation_examples(self):
        assert correlation(PeriodicOrbit("01"), [0, 1]) == 0
        assert correlation(PeriodicOrbit("110"), [0, 3]) == F(2, 3)


class TestOracles:
    def test_markov_matches_path_enumeration(self):
        nu = markov_chain()
        for c in cylinders_of_order(5):
            assert nu.cylinder(c) == oracles.markov(MARKOV_P, MARKOV_PI, (0, 1), c.constraints)

    def test_labeled_three_state_chain(self):
        P = [[0, F(1, 2), F(1, 2)], [1, 0, 0], [F(1, 2), 0, F(1, 2)]]
        pi = [F(2, 5), F(1, 5), F(2, 5)]
        nu = LabeledMarkov(P, pi, [1, 0, 1])
        for c in cylinders_of_order(4):
            assert nu.cylinder(c) == oracles.markov(P, pi, [1, 0, 1], c.constraints)

    def test_bernoulli_and_periodic(self):
        for c in cylinders_of_order(4):
            assert Bernoulli(F(2, 7)).cylinder(c) == oracles.bernoulli(F(2, 7), c.constraints)
            assert PeriodicOrbit("10110").cylinder(c) == oracles.periodic("10110", c.constraints)

    def test_rotation_matches_cut_oracle(self):
        nu = RotationCoding("(sqrt(5) - 1)/2", "1/5", "7/10", 50)
        with mpmath.workdps(50):
            alpha = (mpmath.sqrt(5) - 1) / 2
        for c in cylinders_of_order(4):
            ref = oracles.rotation(alpha, F(1, 5), F(7, 10), c.constraints)
            assert abs(nu.cylinder(c) - ref) < mpmath.mpf(10) ** -40

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 8).flatmap(lambda m: st.tuples(
        st.permutations(range(m)), st.sets(st.integers(0, m - 1)))))
    def test_finite_system_uniform_weights(self, data):
        perm, A = data
        m = len(perm)
        w = [F(1, m)] * m
        nu = FiniteMPS(w, perm, A)
        for c in cylinders_of_order(4):
            assert nu.cylinder(c) == oracles.finite_system(w, perm, A, c.constraints)


def invariant_weights(perm, raw):
    """Weights constant on the cycles of ``perm``, proportional to ``raw``."""
    seen, w = set(), [0] * len(perm)
    for s in range(len(perm)):
        if s in seen:
            continue
        cyc, x = [], s
        while x not in seen:
            seen.add(x)
            cyc.append(x)
            x = perm[x]
        for x in cyc:
            w[x] = raw[s]
    total = sum(w)
    return [F(v, total) for v in w]


class TestAxioms:
    def variants(self):
        return [Bernoulli(F(1, 3)), markov_chain(), PeriodicOrbit("110"), z6(), half_mixture(),
                FiniteMPS(invariant_weights([1, 0, 2, 4, 3], [1, 1, 3, 2, 2]), [1, 0, 2, 4, 3], [0, 3])]

    def test_normalization_and_consistency(self):
        for nu in self.variants():
            for k in range(1, 5):
                assert sum(nu.cylinder(c) for c in full_blocks(k)) == 1
            for c in cylinders_of_order(4):
                for m in range(4):
                    if m not in c.positions:
                        assert nu.cylinder(c) == nu.cylinder(c.refine(m, 0)) + nu.cylinder(c.refine(m, 1))

    def test_shift_invariance(self):
        for nu in self.variants():
            for c in cylinders_of_order(4):
                assert nu.cylinder(c) == nu.cylinder(c.shift(1))

    def test_block_law_agrees_with_cylinders(self):
        for nu in self.variants() + [rotation()]:
            law = nu.block_law(4)
            for code, c in enumerate(full_blocks(4)):
                if law.exact:
                    assert law.mass(code) == nu.cylinder(c)
                else:
                    assert abs(law.mass(code) - nu.cylinder(c)) < mpmath.mpf(10) ** -40


class TestValidation:
    def test_markov_non_stationary(self):
        with pytest.raises(MeasureError, match="not invariant"):
            LabeledMarkov(MARKOV_P, (F(1, 2), F(1, 2)), (0, 1))

    def test_markov_rows(self):
        with pytest.raises(MeasureError):
            LabeledMarkov(((F(1, 2), F(1, 3)), (0, 1)), (0, 1), (0, 1))

    def test_floats_rejected(self):
        with pytest.raises(ValueError):
            Bernoulli(0.5)

    def test_finite_weights(self):
        with pytest.raises(MeasureError):
            FiniteMPS([F(1, 2), F(1, 3)], [1, 0], [0])
        with pytest.raises(MeasureError):
            FiniteMPS([F(1, 2), F(1, 2)], [0, 0], [0])

    def test_non_invariant_weights_rejected(self):
        with pytest.raises(MeasureError):
            nu = FiniteMPS([F(1, 4), F(3, 4)], [1, 0], [0])
            ergodic_decomposition(nu)

    def test_rotation_interval(self):
        with pytest.raises(MeasureError):
            RotationCoding(SQRT2_M1, F(1, 2), F(1, 4))

    def test_rotation_precision_budget(self):
        nu = RotationCoding(SQRT2_M1, 0, F(1, 2), 20)
        with pytest.raises(PrecisionError):
            nu.cylinder(Cylinder.ones([0, 5]))

    def test_mixture_rules(self):
        with pytest.raises(MeasureError):
            Mixture(((F(1, 2), PeriodicOrbit("1")), (F(1, 3), PeriodicOrbit("0"))))
        with pytest.raises(MeasureError):
            Mixture(((F(1), half_mixture()),))
        with pytest.raises(MeasureError):
            Mixture(((F(1), z6()),))


class TestDecomposition:
    def test_abc_system(self):
        nu = FiniteMPS([F(1, 4), F(1, 4), F(1, 2)], [1, 0, 2], [0])
        comps = ergodic_decomposition(nu)
        assert [(w, str(mu.period_word)) for w, mu in comps] == [(F(1, 2), "10"), (F(1, 2), "0")]

    def test_ergodic_and_mixture(self):
        b = Bernoulli(F(1, 5))
        assert ergodic_decomposition(b) == [(1, b)]
        X, Y = PeriodicOrbit("1"), Bernoulli(F(1, 2))
        assert ergodic_decomposition(Mixture(((F(1, 3), X), (F(2, 3), Y)))) == [(F(1, 3), X), (F(2, 3), Y)]

    def test_exactness(self):
        for nu in [z6(), half_mixture(), FiniteMPS(invariant_weights([2, 0, 1, 4, 3, 5], [1, 1, 1, 2, 2, 5]),
                                                   [2, 0, 1, 4, 3, 5], [0, 4, 5])]:
            comps = ergodic_decomposition(nu)
            assert sum(w for w, _ in comps) == 1
            for c in cylinders_of_order(6):
                assert sum(w * mu.cylinder(c) for w, mu in comps) == nu.cylinder(c)

    def test_reducible_markov_splits(self):
        P = [[1, 0], [0, 1]]
        nu = LabeledMarkov(P, [F(1, 3), F(2, 3)], [0, 1])
        assert not nu.is_ergodic
        comps = ergodic_decomposition(nu)
        assert sorted(w for w, _ in comps) == [F(1, 3), F(2, 3)]
        for c in cylinders_of_order(3):
            assert sum(w * mu.cylinder(c) for w, mu in comps) == nu.cylinder(c)


class TestConfig:
    def test_round_trip(self):
        for nu in [Bernoulli(F(1, 3)), markov_chain(), PeriodicOrbit("110"), z6(), half_mixture(), rotation()]:
            again = measure_from_config(nu.to_config())
            for c in cylinders_of_order(3):
                assert again.cylinder(c) == nu.cylinder(c)

    def test_errors_name_the_field(self):
        with pytest.raises(MeasureError, match=r"measure\.p"):
            measure_from_config({"type": "bernoulli"})
        with pytest.raises(MeasureError, match=r"components\[1\]\.measure"):
            measure_from_config({"type": "mixture", "components": [
                {"weight": "1/2", "measure": {"type": "periodic", "word": "1"}},
                {"weight": "1/2", "measure": {"type": "nope"}}]})

    def test_circle_rotation_system(self):
        nu = mps_pushforward(CircleRotation(SQRT2_M1, 0, F(1, 2)))
        assert abs(nu.cylinder(Cylinder.ones([0])) - mpmath.mpf(1) / 2) < 1e-40
