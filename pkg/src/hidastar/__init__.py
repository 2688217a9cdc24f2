"""Deformation quantization on Hida test-function spaces.

Sparse Fock series with the Wick product, the loop-space Poisson bracket and
Hida star product, the perturbed cotangent product and its gauge transform,
weighted norms and nuclearity diagnostics, and a dense oracle for testing.
"""

__version__ = "0.1.0"

from .fock import (
    CanonicalError,
    FockSeries,
    annihilate,
    annihilate_seq,
    canonicalize,
    linear_combine,
    mi,
    wick_exponential,
    wick_product,
)
from .norms import NormParams, continuity_probe, hida_norm, hida_weight, hs_embedding_norm, nuclearity_sum
from .scalar import GaussianRational, Mode, ModeError
from .star import (
    BRACKET_NORMALIZED,
    PAPER,
    Convention,
    DeformationSeries,
    d_star,
    exchange_check,
    gauge_equivalence_check,
    p_l,
    star,
    star_a,
    t1,
    t_prime,
)
from .symplectic import (
    CotangentModel,
    DiagonalOperator,
    LoopModel,
    c1a,
    e_a_form,
    h_pairing,
    omega_inverse_entry,
    poisson_bracket,
)

__all__ = [
    "__version__",
    "CanonicalError",
    "FockSeries",
    "annihilate",
    "annihilate_seq",
    "canonicalize",
    "linear_combine",
    "mi",
    "wick_exponential",
    "wick_product",
    "NormParams",
    "continuity_probe",
    "hida_norm",
    "hida_weight",
    "hs_embedding_norm",
    "nuclearity_sum",
    "GaussianRational",
    "Mode",
    "ModeError",
    "BRACKET_NORMALIZED",
    "PAPER",
    "Convention",
    "DeformationSeries",
    "d_star",
    "exchange_check",
    "gauge_equivalence_check",
    "p_l",
    "star",
    "star_a",
    "t1",
    "t_prime",
    "CotangentModel",
    "DiagonalOperator",
    "LoopModel",
    "c1a",
    "e_a_form",
    "h_pairing",
    "omega_inverse_entry",
    "poisson_bracket",
]
