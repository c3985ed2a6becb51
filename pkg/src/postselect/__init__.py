"""Postselected quantum hypothesis testing.

Closed-form optimal errors when an inconclusive outcome is allowed and errors
are conditioned on a conclusive result, together with optimal measurements,
channel and composite variants, cone-ordered generalisations and independent
numerical checks.
"""

from .asym import (
    AsymReport,
    ThreeOutcomePovm,
    beta_zero,
    exponent_asym,
    optimal_povm_asym,
    postselected_beta,
    product_strategy_asym,
    sandwich_bounds,
)
from .channels import (
    QuantumChannel,
    channel_beta,
    channel_composite_omega,
    channel_exponents,
    channel_omega,
    channel_perr,
    channel_xi,
    choi_of,
    depolarizing,
)
from .composite import CompositeReport, ConvexStateSet, composite_beta, omega_min
from .divergence import WeightedPair, d_omega, d_xi, dmax, helstrom_error, omega, xi, xi_weighted
from .errors import ComputationError, PostselectError, ValidationError
from .sym import SymReport, exact_ncopy_perr, exponent_sym, optimal_povm_sym, postselected_perr

__version__ = "0.1.0"
