"""Elephant random walk laboratory: exact laws, reproducible Monte Carlo and
normal-approximation diagnostics."""
from .coeffs import CoeffTable, Regime, asymptotic_constants, build_coeffs, rate_epsilon, rate_reference
from .diagnostics import (
    DiagnosticsReport,
    StandardizedLaw,
    besseen_distance,
    cramer_ratio_curve,
    llt_ratio,
    llt_sup_distance,
    mdp_curve,
    standardize,
)
from .errors import DomainError, ResourceCapError, UndefinedEstimateError, UnsupportedRegimeError
from .exact import ExactDistribution, exact_cdf, exact_moments, exact_pmf, exact_tail
from .inference import ConfidenceQuery, coverage_experiment, p_lower_limit, position_interval
from .model import ERWParams, Path, martingale_view, sample_path_markov, sample_path_memory, transition_prob
from .montecarlo import Ensemble, SimulationPlan, empirical_tail, run_ensemble

__version__ = "0.1.0"
