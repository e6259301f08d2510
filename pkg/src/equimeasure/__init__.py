"""Equilibrium measures of branched sphere maps by iterated pullback.

Core objects are re-exported here; see the submodules for the rest.
"""

__version__ = "0.1.0"

from .sphere import (INF, DimensionError, chordal_distance, sample_uniform, stereo_lift,
                     stereo_project)
from .maps import PreimageError, PreimageSet, RationalMap, verify_degree
from .measures import (DiscreteMeasure, ExceptionalSeedWarning, PullbackConfig, pullback_form,
                       pullback_iterate, pullback_once, pushforward_measure)
from .harmonics import TestDictionary, chebyshev_dictionary, harmonic_dictionary
from .potential import (CapacityReport, DeviationSetReport, deviation_set_experiment,
                        equilibrium_weights, riesz_energy, riesz_potential)
from .stats import (ConvergenceReport, atom_scan, balance_residual, convergence_rate,
                    exceptional_scan, invariance_residual, mixing_correlation, support_vs_julia,
                    weak_distance)
from .zorich import ZorichPowerMap

__all__ = [
    "INF", "DimensionError", "chordal_distance", "sample_uniform", "stereo_lift", "stereo_project",
    "PreimageError", "PreimageSet", "RationalMap", "verify_degree",
    "DiscreteMeasure", "ExceptionalSeedWarning", "PullbackConfig", "pullback_form",
    "pullback_iterate", "pullback_once", "pushforward_measure",
    "TestDictionary", "chebyshev_dictionary", "harmonic_dictionary",
    "CapacityReport", "DeviationSetReport", "deviation_set_experiment", "equilibrium_weights",
    "riesz_energy", "riesz_potential",
    "ConvergenceReport", "atom_scan", "balance_residual", "convergence_rate", "exceptional_scan",
    "invariance_residual", "mixing_correlation", "support_vs_julia", "weak_distance",
    "ZorichPowerMap",
]
