from fractions import Fraction as F

from corrset.measures import Bernoulli, FiniteMPS, LabeledMarkov, Mixture, PeriodicOrbit

MARKOV_P = ((F(2, 3), F(1, 3)), (F(1, 4), F(3, 4)))
MARKOV_PI = (F(3, 7), F(4, 7))


def markov_chain():
    return LabeledMarkov(MARKOV_P, MARKOV_PI, (0, 1))


def z6():
    return FiniteMPS((F(1, 6),) * 6, (1, 2, 3, 4, 5, 0), frozenset({0, 1, 2}))


def half_mixture():
    return Mixture(((F(1, 2), PeriodicOrbit("01")), (F(1, 2), PeriodicOrbit("0"))))


def standard_measures():
    """The six measures used throughout the acceptance criteria."""
    return {
        "bernoulli_1_2": Bernoulli(F(1, 2)),
        "bernoulli_1_3": Bernoulli(F(1, 3)),
        "markov": markov_chain(),
        "orbit_110": PeriodicOrbit("110"),
        "z6": z6(),
        "mixture": half_mixture(),
    }

