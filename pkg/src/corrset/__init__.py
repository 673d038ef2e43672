"""Correlation sequences, generic points and recurrence experiments on the binary shift."""

from corrset.core import (Cylinder, FolnerSequence, Word, concat, count_intersections, cylinders_of_order,
                          empirical_measure, folner_defect, full_blocks, intersection_density, upper_density)
from corrset.errors import (CertificationError, ConstructionError, CorrsetError, InputError, MeasureError,
                            PrecisionError, PrefixTooShortError, ScheduleError)
from corrset.generic import (BitStream, Schedule, Stage, build_schedule, convergence_report, generic_stream,
                             read_prefix, stage_of, write_prefix)
from corrset.measures import (Bernoulli, BlockLaw, CircleRotation, FiniteMPS, FiniteSystem, LabeledMarkov,
                              Mixture, PeriodicOrbit, RotationCoding, ShiftMeasure, correlation,
                              cylinder_measure, ergodic_decomposition, measure_from_config, mps_pushforward)
from corrset.reclab import (ShiftSet, nice_intersectivity_witness, nice_recurrence_witness, r3_set,
                            recurrence_witness, transfer_experiment)
from corrset.synthesis import Approximant, ergodic_word, periodic_approximant, reentry_threshold

__version__ = "0.1.0"
