"""Desk-scale spectral laboratory for gap-edge eigenvalue counting.

Band functions of fibered magnetic Schrodinger operators with a monotone
edge profile, gap-edge asymptotics, resolvent-route eigenvalue counting,
the exponential/sinc model-operator family, and the geometric constants
of the square-root-of-log accumulation law.
"""

from .counting import CountingReport, LogHermitian, count_above, count_below, n_star
from .errors import (ConstantPotential, ConvergenceFailure, DomainError,
                     EdgegapError, EmptyIntersection, NoGap,
                     NoiseFloorWarning, PrecisionExhausted, ScenarioError,
                     TieWarning, TruncationWarning, WrongPotentialKind)
from .fiber import (BandTable, EdgeComparison, FiberDiscretization,
                    FiberEigenpair, GapModel, band_table, edge_comparison,
                    gap_distance, gap_edges, phi_squared,
                    projection_distance, solve_fiber, trace_norm_distance)
from .geometry import (PolygonDomain, asymptotic_constants, c_minus, c_plus,
                       clip_positive_halfplane, kappa, optimal_disk)
from .operators import DiscretizedOperator, QuadratureSpec
from .potentials import (EdgePotential, Perturbation, finiteness_predicate,
                         gap_condition, step_potential, upper_envelope)
from .scenario import (Scenario, load_scenario, normalized_scenario,
                       scenario_from_dict, schema_json)

__version__ = "0.1.0"

__all__ = [
    "BandTable", "ConstantPotential", "ConvergenceFailure",
    "CountingReport", "DiscretizedOperator", "DomainError",
    "EdgeComparison", "EdgePotential", "EdgegapError", "EmptyIntersection",
    "FiberDiscretization", "FiberEigenpair", "GapModel", "LogHermitian",
    "NoGap", "NoiseFloorWarning", "Perturbation", "PolygonDomain",
    "PrecisionExhausted", "QuadratureSpec", "Scenario", "ScenarioError",
    "TieWarning", "TruncationWarning", "WrongPotentialKind",
    "asymptotic_constants", "band_table", "c_minus", "c_plus",
    "clip_positive_halfplane", "count_above", "count_below",
    "edge_comparison", "finiteness_predicate", "gap_condition",
    "gap_distance", "gap_edges", "kappa", "load_scenario", "n_star",
    "normalized_scenario", "optimal_disk", "phi_squared",
    "projection_distance", "scenario_from_dict", "schema_json",
    "solve_fiber", "step_potential", "trace_norm_distance",
    "upper_envelope",
]
