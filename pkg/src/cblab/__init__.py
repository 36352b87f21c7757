"""Convertible-bond pricing and risk laboratory.

Split-discounting binomial lattice, lattice Greeks, delta-hedge stress testing,
Monte Carlo VaR with full repricing, and an explicit finite-difference solver of
the underlying coupled PDE system for cross-validation.
"""

from .errors import (
    CBLabError,
    ConfigurationError,
    DomainError,
    NumericalError,
    TermSheetError,
)
from .termsheet import (
    CallTerms,
    ConversionTerms,
    ConvertibleTerms,
    CouponSchedule,
    DayCount,
    MarketParams,
    PutTerms,
    accrued_interest,
    conversion_value,
    dirty_call_price,
    dirty_put_price,
    dump_terms,
    load_terms,
    reference_market,
    reference_terms,
    reference_terms_path,
    year_fraction,
)
from .lattice import (
    BindCounts,
    LatticeParams,
    NodeValue,
    PriceResult,
    apply_constraints,
    build_crr_params,
    price_profile_raw,
    price_tf_crr,
    rollback_batch,
)
from .sensitivities import GreekPoint, Surface, delta, delta_pct, gamma, greek_point, surface
from .hedge import HedgeStressSpec, hedge_increment, hedged_position, stress_curve
from .var import (
    VaRResult,
    VaRSpec,
    density_histogram,
    revalue,
    run_var,
    simulate_stock,
    var_quantile,
)
from .fd import FDGrid, FDSolution, fd_profile, solve_tf_fd

__version__ = "0.1.0"
