"""Wavelet-domain laboratory for Besov integral probability metrics.

Exact coefficient-space metrics between dyadic measures, minimax plug-in
estimation from samples, moment-matched prior construction, finite-sample
lower-bound certificates, and a Monte Carlo harness that measures rate
exponents empirically.
"""

from .besov import (
    SmoothnessParams,
    besov_norm,
    conjugate_index,
    dual_witness,
    exact_w1_1d,
    ipm_closed_form,
    ipm_dual,
    pairing,
)
from .estimator import (
    SmoothedMeasure,
    choose_truncation,
    empirical_coeffs,
    empirical_measure_ipm,
    plugin_ipm,
)
from .haar import (
    DyadicDensity,
    DyadicFunction,
    WaveletCoeffs,
    analyze,
    eval_basis,
    synthesize,
    truncated,
    uniform_density,
)
from .harness import (
    RateReport,
    RateSweepConfig,
    certificate_sweep,
    fit_slope,
    rate_sweep,
    seed_for,
)
from .instances import HardInstance, build_density, draw_theta, sample, true_ipm
from .lecam import (
    LowerBoundCertificate,
    concentration_delta,
    l2_cross,
    l2_distance_sq,
    l2_moment_series,
    lower_bound_certificate,
    separation,
    telescoping_check,
    tv_analytic_envelope,
    tv_upper_bound,
)
from .priors import (
    DiscretePrior,
    PriorPair,
    SolverError,
    choose_K,
    construct_prior_pair,
    mean_abs,
    moment,
)

__version__ = "0.1.0"
