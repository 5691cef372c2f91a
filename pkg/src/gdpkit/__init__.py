"""Gaussian differential privacy accounting: identify, measure, amplify and compose."""

from .compose import (
    CompositionReport,
    CompositionScenario,
    build_report,
    gdp_compose,
    gdp_summarize,
    optimal_profile_pure,
)
from .gdpt import (
    CeilingExceeded,
    GdpInterval,
    MeasurementConfig,
    MeasurementResult,
    gdpt_curve,
    gdpt_eval,
    head_measure,
    mu_gdp,
    mu_gdp_bounds,
    staircase_bounds,
)
from .identify import Classification, HeadTailQuery, NotGdpError, check_condition, classify, tail_limit
from .profiles import (
    PrivacyPoint,
    PrivacyProfile,
    TradeoffEquation,
    gaussian_profile,
    icea_profile,
    implied_delta,
    implies,
    laplace_profile,
    load_profile_csv,
    pure_dp_profile,
    refine,
    sgd_profile,
    tabulated_profile,
)
from .specfun import delta_mu, log_delta_mu
from .transform import ClipRectifySpec, SubsampleSpec, clip_rectify, poisson_subsample, pure_to_gdp

__version__ = "0.1.0"
