"""Sub-Gaussian norm and optimal variance proxy of real random variables."""

from .distributions import (
    RADEMACHER,
    STANDARD_GAUSSIAN,
    CenteredBinaryShape,
    Distribution,
    FiniteDistribution,
    LawKind,
    NamedLaw,
    centered,
    make_centered_binary,
    make_finite,
    mean,
    mgf,
    psi2_moment,
    scaled,
    variance,
)
from .subgaussian import (
    NormResult,
    RatioResult,
    psi2_norm,
    ratio,
    variance_proxy,
    variance_proxy_binary,
)

__all__ = [
    "RADEMACHER",
    "STANDARD_GAUSSIAN",
    "CenteredBinaryShape",
    "Distribution",
    "FiniteDistribution",
    "LawKind",
    "NamedLaw",
    "NormResult",
    "RatioResult",
    "centered",
    "make_centered_binary",
    "make_finite",
    "mean",
    "mgf",
    "psi2_moment",
    "psi2_norm",
    "ratio",
    "scaled",
    "variance",
    "variance_proxy",
    "variance_proxy_binary",
]
