"""Random walks on spaces of unimodular lattices: simulation, exact finite
quotients, drift functions and equidistribution checks."""

from .chain import (FiniteChain, ModGroupElement, chain_period, chain_spectrum, enumerate_orbit,
                    exact_distribution, periodicity_witness, stationary_distribution)
from .equidist import (HaarSampler2D, SiegelObservable, equidistribution_report, haar_expectation,
                       haar_sample_2d, siegel_transform, uniform_cesaro_experiment)
from .lattice import (EnumerationBudgetExceeded, GroupElement, LatticePoint, SingularBasisError,
                      apply_group, height, shortest_vector_length, successive_minima)
from .lyapunov import (GrowthProfile, LyapunovSpec, estimate_drift, evaluate_V, fit_contraction,
                       lift_multistep, recurrence_experiment, sublevel_sample, sweep_contraction)
from .walk import (StepMeasure, WalkConfig, cesaro_estimate, discrepancy_series, estimate_pushforward,
                   sample_trajectory)

__version__ = "0.1.0"
