"""Exact p-adic moment sequences of the Todd and Witten orientations."""

from .scalars import (INFINITY, NonIntegralError, PadicInteger, bernoulli,
                      padic_log, padic_log_partial_sum, reduce_rational, valuation)
from .qt_series import (NonTerminatingError, PrecisionProfile, ProfileMismatchError,
                        QTSeries, XSeries, exp0, frobenius, invert, log1p,
                        minus_log_one_minus_t, xcompose_shift, xeval, xinvert,
                        xlog, xreverse, zeta_tail_polynomial)
from .elliptic import (WSeries, compose_at_minus_log, divisor_sigma,
                       eisenstein_g, sigma_log, weierstrass_P)
from .orientations import (MomentSequence, OrientationKind, SharpMismatchError,
                           exponential, fgl_add, finite_difference,
                           internal_profile, moment_sequence,
                           moment_sequence_generating, moments_closed_form,
                           moments_from_nepers, nepers, sharp,
                           sharped_exponential)
from .congruence import (CongruenceReport, DigitTable, TestPolynomial,
                         canonical_family, digit_table, digit_table_fixed_n,
                         expected_digit_period, pair, periodicity_check, verify)

__version__ = "0.1.0"

__all__ = [
    "INFINITY", "NonIntegralError", "PadicInteger", "bernoulli", "padic_log",
    "padic_log_partial_sum", "reduce_rational", "valuation",
    "NonTerminatingError", "PrecisionProfile", "ProfileMismatchError",
    "QTSeries", "XSeries", "exp0", "frobenius", "invert", "log1p",
    "minus_log_one_minus_t", "xcompose_shift", "xeval", "xinvert", "xlog",
    "xreverse", "zeta_tail_polynomial",
    "WSeries", "compose_at_minus_log", "divisor_sigma", "eisenstein_g",
    "sigma_log", "weierstrass_P",
    "MomentSequence", "OrientationKind", "SharpMismatchError", "exponential",
    "fgl_add", "finite_difference", "internal_profile", "moment_sequence",
    "moment_sequence_generating", "moments_closed_form", "moments_from_nepers",
    "nepers", "sharp", "sharped_exponential",
    "CongruenceReport", "DigitTable", "TestPolynomial", "canonical_family",
    "digit_table", "digit_table_fixed_n", "expected_digit_period", "pair",
    "periodicity_check", "verify",
]
