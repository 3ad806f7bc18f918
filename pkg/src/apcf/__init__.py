"""Continued fractions whose digit sequences carry arithmetic progressions.

Exact continued-fraction arithmetic, the Cantor-type sets used for lower
bounds on Hausdorff dimension, covering certificates for upper bounds and
the closed-form dimension formulas.
"""
__version__ = "0.1.0"

from .cf import (
    Convergent,
    FundInterval,
    convergents,
    expand,
    fundamental_interval,
    gauss_map,
    interval_length_den,
    verify_qn_bounds,
)
from .seqspec import SequenceSpec, parse, validate
from .ap import (
    BlockPartition,
    blocks_for_F,
    blocks_for_G,
    check_F_membership,
    check_G_membership,
    find_ap_runs,
    growth_constants,
    is_ap,
)
from .construct import (
    LambdaParams,
    digit_window,
    local_dim_ratio,
    make_params,
    mu_cylinder,
    neighbor_count_check,
    ratio_series,
    sample_point,
)
from .covering import (
    Certificate,
    SeriesEstimate,
    ap_series_bound,
    descend_sum_bound,
    dim_formula,
    dim_upper_scan,
    f_certificate,
    g_certificate,
    h_recursion_audit,
)
