"""Averaging and maximal averaging operators for product varieties
{x in F_q^d : x_1 ... x_d = j} over odd prime fields."""
from .field import FieldCtx, additive_character, arith, make_field
from .grid import (GridFunction, convolve, counting_norm, hat_transform, lp_norm,
                   vee_transform)
from .operators import (MAXIMAL, ExponentPair, average, extremizer, maximal_average,
                        opnorm_lower_bound, predicted_exponents, ratio, region_membership)
from .spectral import decay_certificate, decompose, nk_hat_norm, omega_sup, spectral_table
from .variety import (product_variety, surface_measure, zero_count,
                      zero_pattern_indicator)

__version__ = "0.1.0"

__all__ = [
    "FieldCtx", "additive_character", "arith", "make_field",
    "GridFunction", "convolve", "counting_norm", "hat_transform", "lp_norm", "vee_transform",
    "MAXIMAL", "ExponentPair", "average", "extremizer", "maximal_average",
    "opnorm_lower_bound", "predicted_exponents", "ratio", "region_membership",
    "decay_certificate", "decompose", "nk_hat_norm", "omega_sup", "spectral_table",
    "product_variety", "surface_measure", "zero_count", "zero_pattern_indicator",
]
