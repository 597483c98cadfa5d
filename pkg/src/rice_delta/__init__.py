"""Bivariate Rice densities and their delta-function limit at perfect correlation."""

from .degenerate import (
    ConcentrationMetrics,
    DegenerateJoint,
    DeltaTerm,
    LinearCoefficient,
    NascentDelta,
    concentration_metrics,
    degenerate_joint,
    delta_compose,
    g1_weight,
    g2_weight,
    limit_ratio,
    nascent_delta,
    solve_k,
)
from .distributions import (
    CorrelationState,
    PdfGrid,
    RiceParams,
    bivariate_rice_grid,
    bivariate_rice_log_pdf,
    bivariate_rice_pdf,
    degenerate_rice_factor,
    rice_cdf,
    rice_log_pdf,
    rice_pdf,
    rice_quantile,
)
from .errors import DegeneracyError, DomainError, QuadratureError, RiceDeltaError
from .moments import ComplexMoments, MomentSummary
from .numerics import QuadratureRule, gauss_legendre_rule, log_bessel_i0, log_sum_exp
from .stochastic import (
    SampleBatch,
    complex_corr,
    endpoint_implication_check,
    pearson_corr,
    sample_pairs,
    selection_outage,
)

__version__ = "0.1.0"
