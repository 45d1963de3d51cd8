"""Analytic performance of layered aerial wireless networks.

Stochastic-geometry models for success probability and area spectral
efficiency of multi-layer aerial networks, with a Monte Carlo simulator for
validation and a CLI for scenario evaluation.
"""

from .channel import (
    ChannelClass,
    Environment,
    FadingParams,
    LosModel,
    PathlossParams,
    los_probability_a2a,
    los_probability_a2g,
    los_probability_exact,
)
from .design import (
    DensityBound,
    OptimizeResult,
    SplitSweepResult,
    density_upper_bound,
    epsilon,
    optimize_density,
    two_layer_split,
)
from .errors import (
    AeronetError,
    DegenerateGeometry,
    DerivativeUnstable,
    DomainError,
    NoCandidate,
    NonConvergent,
    PreconditionViolated,
    SeriesNonConvergent,
    ValidationError,
)
from .geometry import (
    AssociationAnalysis,
    NearestDistanceLaw,
    association_probabilities,
    main_link_pdf,
    nearest_distance_law,
)
from .interference import LaplaceEvaluator, LinkEvent, closed_form_applicable
from .montecarlo import SimSpec, TrialResults, empirical_laplace, run_trials
from .netconfig import (
    AssociationRule,
    Criterion,
    LayerSpec,
    NetworkConfig,
    Orientation,
    Scenario,
    ValidatedConfig,
    load_scenario,
    parse_scenario_text,
    validate,
)
from .numerics import DEFAULT_QUADRATURE, DEFAULT_SERIES, QuadratureSpec, SeriesSpec
from .performance import (
    PerformanceReport,
    conditional_stp,
    layer_ase,
    layer_performance,
    layer_stp,
    network_aggregate,
)

__version__ = "1.0.0"
