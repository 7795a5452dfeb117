"""Joint spectral multipliers, discrete Riesz transforms on (Z_K)^d and
truncated Hermite expansions, plus operator p-norm estimation."""

from ._core import (  # noqa: F401
    DEFAULT_SEED,
    CyclicSystem,
    HermiteSystem,
    NormEstimate,
    __version__,
    gauss_hermite,
    interp_upper,
    lp_norm,
    m_sigma,
    matrix_opnorm,
    p_star,
    sector_sup,
)

__all__ = [
    "DEFAULT_SEED",
    "CyclicSystem",
    "HermiteSystem",
    "NormEstimate",
    "gauss_hermite",
    "interp_upper",
    "lp_norm",
    "m_sigma",
    "matrix_opnorm",
    "p_star",
    "sector_sup",
]
