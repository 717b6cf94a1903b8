"""Brute-force reference numerics.

Nothing here calls the closed forms it is used to check: the Gaussian
integral is done by composite Simpson quadrature, the variance proxy by a
plain dense grid, and derivatives by central differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .distributions import Distribution, as_finite
from .exceptions import KTooSmall


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Simpson on ``[-half_width, half_width]`` with ``panels`` panels."""

    half_width: float
    panels: int = 4096
    rule: str = "simpson"

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        if self.panels < 2 or self.panels % 2:
            raise ValueError("panels must be an even integer >= 2")
        if self.rule != "simpson":
            raise ValueError(f"unknown rule {self.rule!r}")

    def truncation_bound(self, K: float) -> float:
        """Upper bound on the mass of ``e^{x^2/K^2} phi(x)`` outside the window.

        With ``a = 1/2 - 1/K^2`` the integrand is ``e^{-a x^2} / sqrt(2 pi)``
        and the Gaussian tail bound gives ``e^{-a R^2} / (a R sqrt(2 pi))``.
        """
        a = 0.5 - 1.0 / (K * K)
        r = self.half_width
        return math.exp(-a * r * r) / (a * r * math.sqrt(2.0 * math.pi))


def default_quadrature(K: float, panels: int = 4096) -> QuadratureSpec:
    """Window with ``(K^2 - 2) R^2 / (2 K^2) = 40``, i.e. tail below ``e^{-40}``."""
    r = math.sqrt(80.0 * K * K / (K * K - 2.0))
    return QuadratureSpec(r, panels)


def simpson(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, panels: int) -> float:
    x = np.linspace(a, b, panels + 1)
    y = f(x)
    h = (b - a) / panels
    return h / 3.0 * (y[0] + y[-1] + 4.0 * y[1:-1:2].sum() + 2.0 * y[2:-1:2].sum())


def quad_gaussian_psi2(K: float, spec: QuadratureSpec | None = None) -> float:
    """``int exp(x^2/K^2) phi(x) dx`` for the standard normal density ``phi``."""
    if not K > math.sqrt(2.0):
        raise KTooSmall(f"integral diverges for K <= sqrt(2), got K={K}")
    if spec is None:
        spec = default_quadrature(K)
    inv = 1.0 / (K * K)

    def integrand(x):
        return np.exp(x * x * inv - 0.5 * x * x) / math.sqrt(2.0 * math.pi)

    r = spec.half_width
    return simpson(integrand, -r, r, spec.panels)


def grid_sup_proxy(d: Distribution, s_max: float, n: int) -> float:
    """Lower estimate of ``sigma^2`` from ``n`` equispaced ``s`` in ``[-s_max, s_max]``.

    Grids with ``n`` and ``2n - 1`` points are nested, so the estimate is
    nondecreasing along that sequence.
    """
    if n < 3 or not s_max > 0:
        raise ValueError("need n >= 3 and s_max > 0")
    f = as_finite(d)
    x = f.x - np.dot(f.p, f.x)
    p = f.p
    var = float(np.dot(p, x * x))
    if np.all(x == 0.0):
        return 0.0
    k = np.arange(n) - (n - 1) / 2.0
    s = k[k != 0.0] * (2.0 * s_max / (n - 1))
    best = var
    for chunk in np.array_split(s, max(1, s.size // 20_000)):
        y = chunk[:, None] * x[None, :]
        top = y.max(axis=1)
        log_m = top + np.log(np.exp(y - top[:, None]) @ p)
        best = max(best, float(np.max(2.0 * log_m / (chunk * chunk))))
    return best


def finite_diff(f: Callable[[float], float], x: float, order: int = 1, h: float = 1e-5) -> float:
    """Central-difference estimate of the ``order``-th derivative, error ``O(h^2)``."""
    if not h > 0:
        raise ValueError("h must be positive")
    if order == 1:
        return (f(x + h) - f(x - h)) / (2.0 * h)
    if order == 2:
        return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
    if order == 3:
        return (f(x + 2 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2 * h)) / (2.0 * h ** 3)
    raise ValueError(f"order must be 1, 2 or 3, got {order}")
