"""Bayesian preference solicitation and optimal assortment construction.

An agent refines a Gaussian belief over a customer's ideal point through
unit-norm directional queries, then recommends a k-point assortment from
which the customer picks the nearest product.  The package provides the
exact belief updates, water-filling query allocation, closed-form and
quantization-based assortments, the identities and bounds relating
solicitation depth to assortment breadth, a grid posterior engine for
non-Gaussian priors, and a seeded Monte Carlo harness with CSV/SVG output.
"""

from .assortment import HedgingPair, best_k, best_pair, best_single, customer_choice, hedging_gap
from .belief import GaussianBelief, Query, Response, cov_from_information, kalman_update, simulate_response
from .errors import NumericalError, ValidationError
from .generalprior import (
    ConservativeCheck,
    GridPosterior,
    PriorSpec,
    SolicitationValueEstimate,
    conservative_check,
    grid_init,
    grid_update,
    moments,
    tv_to_gaussian,
    vos_general,
)
from .harness import (
    Scenario,
    SweepSummary,
    TrialRecord,
    emit_csv,
    parse_csv,
    run_sweep,
    run_trial,
)
from .quantize import (
    Assortment,
    DistortionEstimate,
    LloydResult,
    ScalarQuantizer,
    distortion_mc,
    lloyd_kd,
    lloyd_max_normal,
    product_quantizer,
    product_quantizer_distortion,
    quantization_efficiency,
)
from .solicitation import (
    GAMMA,
    R2Report,
    SolicitationPlan,
    ThresholdReport,
    greedy_direction,
    k2_plan,
    r2_ratio,
    realize_queries,
    solicitation_lower_bound,
    thresholds_and_ratios,
    vos,
    waterfill,
)
from .svgplot import emit_svg

__version__ = "0.1.0"

__all__ = [
    "Assortment",
    "ConservativeCheck",
    "DistortionEstimate",
    "GAMMA",
    "GaussianBelief",
    "GridPosterior",
    "HedgingPair",
    "LloydResult",
    "NumericalError",
    "PriorSpec",
    "Query",
    "R2Report",
    "Response",
    "ScalarQuantizer",
    "Scenario",
    "SolicitationPlan",
    "SolicitationValueEstimate",
    "SweepSummary",
    "ThresholdReport",
    "TrialRecord",
    "ValidationError",
    "best_k",
    "best_pair",
    "best_single",
    "conservative_check",
    "cov_from_information",
    "customer_choice",
    "distortion_mc",
    "emit_csv",
    "emit_svg",
    "greedy_direction",
    "grid_init",
    "grid_update",
    "hedging_gap",
    "k2_plan",
    "kalman_update",
    "lloyd_kd",
    "lloyd_max_normal",
    "moments",
    "parse_csv",
    "product_quantizer",
    "product_quantizer_distortion",
    "quantization_efficiency",
    "r2_ratio",
    "realize_queries",
    "run_sweep",
    "run_trial",
    "simulate_response",
    "solicitation_lower_bound",
    "thresholds_and_ratios",
    "tv_to_gaussian",
    "vos",
    "vos_general",
    "waterfill",
]
