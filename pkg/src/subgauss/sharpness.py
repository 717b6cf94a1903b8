"""Certificate functions for the sharp constants and scans of the moment sets.

Notation: a centered two-point law is written in the ``(u, x1)`` form of
:class:`~subgauss.distributions.CenteredBinaryShape`, and

    G(u, t) = u/(1+u) e^t + 1/(1+u) e^{u^2 t}

is ``E exp(X^2)`` for that law when ``t = x1^2``. With
``alpha(u) = 2 log 2 log(u) / (u^2 - 1)`` the two-point bound
``sigma <= sqrt(log 2)`` is equivalent to ``F(u) = G(u, alpha(u)) >= 2``,
which follows from ``F(1) = 2`` and ``F' >= 0``. The helpers ``h1``, ``h2``
and ``h = h1 + h2`` carry the sign of ``F'``.

Every certificate here is a grid check with a stated margin, not a proof.
Near ``u = 1`` all of these quantities vanish to high order, so they are
evaluated through algebraically equivalent forms built on
``log1p(e) - e + e^2/2`` with ``e = u - 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import minimize_scalar

from .distributions import Distribution, as_finite, mean, psi2_moment
from .exceptions import KTooSmall, NotInMomentSet, PreconditionNotMet, UOutOfRange
from .subgaussian import SQRT_LOG2, variance_proxy, variance_proxy_binary

LOG2 = math.log(2.0)
_ALPHA_SERIES = 1e-8
_R3_SERIES = 0.1
_STABLE_BELOW = 1.0


@dataclass(frozen=True)
class CertificateReport:
    """Outcome of one inequality check.

    ``min_margin`` is the worst slack found (negative means violated) and
    ``passed`` is ``min_margin >= -tolerance``. Checks that combine several
    conditions fold each condition's own tolerance into the margin and use
    ``tolerance = 0``.
    """

    name: str
    grid: str
    min_margin: float
    worst_point: Any
    passed: bool
    tolerance: float = 0.0
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "grid": self.grid,
            "min_margin": self.min_margin,
            "worst_point": _jsonable(self.worst_point),
            "passed": self.passed,
            "tolerance": self.tolerance,
            "details": _jsonable(self.details),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def make_report(name, grid, margin, worst_point, tolerance=0.0, **details) -> CertificateReport:
    margin = float(margin)
    return CertificateReport(
        name=name,
        grid=grid,
        min_margin=margin,
        worst_point=worst_point,
        passed=bool(margin >= -tolerance),
        tolerance=tolerance,
        details=details,
    )


def _check_u(u: float, strict: bool = False) -> float:
    u = float(u)
    if (strict and not u > 1.0) or not u >= 1.0:
        raise UOutOfRange(f"u must be {'>' if strict else '>='} 1, got {u}")
    return u


def u_grid(u_max: float, n: int, e_min: float = 1e-6) -> np.ndarray:
    """``n`` points in ``(1, u_max]`` geometric in ``u - 1``."""
    return 1.0 + np.geomspace(e_min, u_max - 1.0, n)


# ---------------------------------------------------------------------------
# certificate functions


def alpha(u: float) -> float:
    u = _check_u(u)
    e = u - 1.0
    if e < _ALPHA_SERIES:
        return LOG2 * (1.0 - e + 5.0 * e * e / 6.0)
    return 2.0 * LOG2 * math.log1p(e) / (e * (2.0 + e))


def big_g(u: float, t: float) -> float:
    """``E exp(X^2)`` of the two-point law with ``x1^2 = t``."""
    u = float(u)
    a = math.log(u / (1.0 + u)) + t
    b = -math.log1p(u) + u * u * t
    if max(a, b) > 700.0:
        top = max(a, b)
        log_val = top + math.log1p(math.exp(min(a, b) - top))
        return math.inf if log_val > 709.0 else math.exp(log_val)
    return u / (1.0 + u) * math.exp(t) + math.exp(u * u * t) / (1.0 + u)


def big_f(u: float) -> float:
    u = _check_u(u)
    if u == 1.0:
        return 2.0
    return big_g(u, alpha(u))


def _r3(e: float) -> float:
    """``log1p(e) - e + e^2/2``."""
    if e < _R3_SERIES:
        acc = 0.0
        for k in range(40, 2, -1):
            acc = acc * e + (1.0 if k % 2 else -1.0) / k
        return acc * e ** 3
    return math.log1p(e) - e + 0.5 * e * e


def _a_b(u: float) -> tuple[float, float, float]:
    """``A = u^2 - 1 - 2u^2 log u``, ``B = u^3 - u - 2u log u`` and ``A + B``."""
    e = u - 1.0
    if e < _STABLE_BELOW:
        r = _r3(e)
        a = -2.0 * e * e + e ** 4 - 2.0 * (1.0 + e) ** 2 * r
        b = u * (2.0 * e * e - 2.0 * r)
        ab = 2.0 * e ** 3 + e ** 4 - 2.0 * r * (1.0 + e) * (2.0 + e)
        return a, b, ab
    lu = math.log(u)
    a = u * u - 1.0 - 2.0 * u * u * lu
    b = u ** 3 - u - 2.0 * u * lu
    return a, b, u ** 3 + u * u - u - 1.0 - 2.0 * u * u * lu - 2.0 * u * lu


def h_functions(u: float) -> tuple[float, float, float]:
    """``(h1(u), h2(u), h(u))`` with ``h = h1 + h2``."""
    u = _check_u(u)
    e = u - 1.0
    a, b, ab = _a_b(u)
    tail = (1.0 + u) * e * e
    return 2.0 * LOG2 * a + tail, 2.0 * LOG2 * b - tail, 2.0 * LOG2 * ab


def h_simplified(u: float) -> float:
    """Single-expression form of ``h``, evaluated literally."""
    lu = math.log(u)
    return 2.0 * LOG2 * (u ** 3 + u * u - u - 1.0 - 2.0 * u * u * lu - 2.0 * u * lu)


def h_third_derivatives(u: float) -> tuple[float, float]:
    """``(h2'''(u), h'''(u))``."""
    u = _check_u(u)
    h2_3 = 2.0 * LOG2 * (6.0 + 2.0 / u ** 2) - 6.0
    h_3 = 2.0 * LOG2 * (6.0 - 4.0 / u + 2.0 / u ** 2)
    return h2_3, h_3


def f_prime(u: float) -> float:
    """Derivative of ``F``; defined for ``u > 1``.

    Equal to ``(h1 e^alpha + h2 e^{u^2 alpha}) / ((1+u)(u^2-1)^2)``. Since
    ``u^2 alpha = alpha + 2 log 2 log u`` the numerator is rewritten as
    ``e^alpha (h + h2 (u^{2 log 2} - 1))``, which avoids the cancellation
    between the two terms as ``u -> 1`` and the overflow of ``e^{u^2 alpha}``.
    """
    u = _check_u(u, strict=True)
    e = u - 1.0
    _, h2, h = h_functions(u)
    lift = math.expm1(2.0 * LOG2 * math.log1p(e))
    denom = (1.0 + u) * (e * (2.0 + e)) ** 2
    return math.exp(alpha(u)) * (h + h2 * lift) / denom


def w(t: float, s: float, const: float = 0.0) -> float:
    """``t^2 - s t + log(1 + 2 t^2) + const``; convex in ``t``."""
    return t * t - s * t + math.log1p(2.0 * t * t) + const


def w_second(t: float) -> float:
    t2 = t * t
    return (6.0 + 8.0 * t2 * t2) / (1.0 + 2.0 * t2) ** 2


def vandermonde_like_det(x1: float, x2: float, x3: float) -> float:
    """Determinant of rows ``(1,1,1)``, ``(x1,x2,x3)``, ``(e^{x1^2}, e^{x2^2}, e^{x3^2})``."""
    e1, e2, e3 = math.exp(x1 * x1), math.exp(x2 * x2), math.exp(x3 * x3)
    return (x2 * e3 - x3 * e2) - (x1 * e3 - x3 * e1) + (x1 * e2 - x2 * e1)


# ---------------------------------------------------------------------------
# two-point laws on the boundary of the moment set


def t_star(u: float, tol: float = 1e-15) -> float:
    """Solve ``G(u, t) = 2`` for ``t`` in ``[0, log 2]`` by bisection."""
    u = _check_u(u)
    if u == 1.0:
        return LOG2
    lo, hi = 0.0, LOG2
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if big_g(u, mid) <= 2.0:
            lo = mid
        else:
            hi = mid
    return lo


def t_star_array(u: np.ndarray, iterations: int = 64) -> np.ndarray:
    """Vectorized :func:`t_star`; returns the feasible end of each bracket."""
    u = np.asarray(u, dtype=float)
    lo = np.zeros_like(u)
    hi = np.full_like(u, LOG2)
    p, q = u / (1.0 + u), 1.0 / (1.0 + u)
    with np.errstate(over="ignore"):
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            ok = p * np.exp(mid) + q * np.exp(u * u * mid) <= 2.0
            lo = np.where(ok, mid, lo)
            hi = np.where(ok, hi, mid)
    return np.where(u == 1.0, LOG2, lo)


def binary_ratio(u: float, tol: float = 1e-15) -> float:
    """``sigma / ||X||_psi2`` of the two-point law with shape ``u``.

    The ratio does not depend on the scale ``x1``; at ``x1^2 = t*(u)`` the
    law has psi_2 norm exactly 1, so the ratio is its sigma.
    """
    u = _check_u(u)
    return variance_proxy_binary(u, math.sqrt(t_star(u, tol)))


def scan_h2_max_ratio(u_max: float, n: int) -> CertificateReport:
    """``binary_ratio`` on a geometric grid of ``n`` points in ``[1, u_max]``.

    Passes iff every ratio is at most ``sqrt(log 2) + 1e-8`` and the grid
    maximum is within 1e-6 of the value at ``u = 1``.
    """
    us = np.geomspace(1.0, u_max, n)
    ratios = np.array([binary_ratio(u) for u in us])
    i = int(np.argmax(ratios))
    upper_slack = SQRT_LOG2 + 1e-8 - ratios[i]
    attain_slack = ratios[0] + 1e-6 - ratios[i]
    return make_report(
        "h2_max_ratio",
        f"geometric u in [1, {u_max:g}], n={n}",
        min(upper_slack, attain_slack),
        float(us[i]),
        max_ratio=float(ratios[i]),
        min_ratio=float(ratios.min()),
        ratio_at_1=float(ratios[0]),
    )


# ---------------------------------------------------------------------------
# MGF maximization over two-point and three-point laws


def _binary_boundary_mgf(u: np.ndarray, s: float, inner: np.ndarray | None = None) -> np.ndarray:
    """Largest MGF at ``s`` among two-point laws of shape ``u`` in the moment set.

    Both orientations are tried. ``inner`` holds fractions of the boundary
    displacement to also evaluate (defensive check of monotonicity).
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    x = np.sqrt(t_star_array(u))
    fr = np.ones(1) if inner is None else np.concatenate([[1.0], inner])
    xs = x[:, None] * fr[None, :]
    p = (u / (1.0 + u))[:, None]
    q = (1.0 / (1.0 + u))[:, None]
    uu = u[:, None]
    with np.errstate(over="ignore"):
        heavy_up = p * np.exp(s * xs) + q * np.exp(-s * uu * xs)
        heavy_down = p * np.exp(-s * xs) + q * np.exp(s * uu * xs)
    return np.maximum(heavy_up, heavy_down).max(axis=1)


def h2_mgf_max(s: float, tol: float = 1e-12, u_max: float = 100.0, n: int = 400) -> float:
    """``sup M_mu(s)`` over centered two-point laws with ``E exp(X^2) <= 2``.

    For a fixed shape ``u`` the MGF of a centered law grows with the scale,
    so ``x1^2`` sits at ``t*(u)``; 20 interior scales per grid point are
    still evaluated. The ``u`` grid is extended tenfold while the best point
    lies at its upper end, then the best cell is refined.
    """
    s = float(s)
    if s == 0.0:
        return 1.0
    inner = np.linspace(0.05, 0.95, 20)
    while True:
        us = np.geomspace(1.0, u_max, n)
        vals = _binary_boundary_mgf(us, s, inner)
        i = int(np.argmax(vals))
        if i < n - 1 or u_max >= 1e12:
            break
        u_max *= 10.0
    best = float(vals[i])
    lo, hi = us[max(i - 1, 0)], us[min(i + 1, n - 1)]
    res = minimize_scalar(
        lambda u: -float(_binary_boundary_mgf(u, s)[0]),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": max(tol, 1e-14 * hi)},
    )
    return max(best, -float(res.fun))


def sample_h3(rng: np.random.Generator, trials: int, box: float = 2.5,
              batch: int = 200_000) -> tuple[np.ndarray, np.ndarray]:
    """Rejection-sample ``trials`` three-point laws from the moment set.

    Atoms are uniform in ``[-box, box]``; ``p3`` is uniform and ``p1, p2``
    solve ``sum p = 1``, ``sum p x = 0`` exactly. Returns ``(p, x)`` arrays of
    shape ``(trials, 3)``.
    """
    ps, xs = [], []
    have = 0
    while have < trials:
        x = rng.uniform(-box, box, size=(batch, 3))
        p3 = rng.uniform(0.0, 1.0, size=batch)
        with np.errstate(divide="ignore", invalid="ignore"):
            p1 = (-p3 * x[:, 2] - (1.0 - p3) * x[:, 1]) / (x[:, 0] - x[:, 1])
        p2 = 1.0 - p3 - p1
        p = np.column_stack([p1, p2, p3])
        gaps = np.abs(x[:, [0, 0, 1]] - x[:, [1, 2, 2]]).min(axis=1)
        ok = np.all(p > 0, axis=1) & (gaps > 1e-12)
        ok &= np.einsum("ij,ij->i", p, np.exp(x * x)) <= 2.0
        ps.append(p[ok])
        xs.append(x[ok])
        have += int(ok.sum())
    return np.concatenate(ps)[:trials], np.concatenate(xs)[:trials]


def _scale_to_boundary(p: np.ndarray, x: np.ndarray, iterations: int = 60) -> np.ndarray:
    """Factor ``c >= 1`` per row with ``sum p exp(c^2 x^2) = 2``."""
    lo = np.ones(p.shape[0])
    # Jensen: sum p exp(c^2 x^2) >= exp(c^2 sum p x^2)
    hi = np.sqrt(np.maximum(LOG2 / np.einsum("ij,ij->i", p, x * x), 1.0))
    x2 = x * x
    with np.errstate(over="ignore"):
        for _ in range(iterations):
            mid = 0.5 * (lo + hi)
            ok = np.einsum("ij,ij->i", p, np.exp(mid[:, None] ** 2 * x2)) <= 2.0
            lo = np.where(ok, mid, lo)
            hi = np.where(ok, hi, mid)
    return lo


def scan_h3_no_improvement(s: float, trials: int = 100_000, seed: int = 0) -> CertificateReport:
    """Check that no sampled three-point law beats the two-point MGF maximum.

    Each accepted sample is evaluated as drawn and also rescaled onto the
    boundary ``E exp(X^2) = 2`` (rescaling keeps it centered and can only
    raise its MGF). Passes iff no value exceeds ``h2_mgf_max(s) + 1e-7``.
    """
    rng = np.random.default_rng(seed)
    p, x = sample_h3(rng, trials)
    c = _scale_to_boundary(p, x)
    with np.errstate(over="ignore"):
        m_raw = np.einsum("ij,ij->i", p, np.exp(s * x))
        m_edge = np.einsum("ij,ij->i", p, np.exp(s * c[:, None] * x))
    m = np.maximum(m_raw, m_edge)
    i = int(np.argmax(m))
    target = h2_mgf_max(s)
    scale = c[i] if m_edge[i] >= m_raw[i] else 1.0
    return make_report(
        "h3_no_improvement",
        f"{trials} rejection samples, atoms in [-2.5, 2.5], seed={seed}, s={s:g}",
        target - m[i],
        {"p": p[i].tolist(), "x": (scale * x[i]).tolist()},
        tolerance=1e-7,
        h2_max=target,
        h3_best=float(m[i]),
        all_equal_one=bool(np.all(np.abs(m - 1.0) < 1e-12)),
    )


# ---------------------------------------------------------------------------
# inequalities for individual laws


def check_tail_bound(d: Distribution, s: float, K: float) -> CertificateReport:
    """Tail bounds for laws with ``E exp(X^2) <= 2``.

    ``E[e^{|sX|}; |X| >= K] <= 2 e^{-K^2/2}`` for ``K >= 2|s|``, and, when
    ``K >= 2``, also ``E[|X|; |X| >= K] <= 2 e^{-K^2/2}``.
    """
    f = as_finite(d)
    if psi2_moment(f, 1.0) > 2.0 + 1e-12:
        raise NotInMomentSet("E exp(X^2) exceeds 2")
    if K < 2.0 * abs(s):
        raise KTooSmall(f"need K >= 2|s|, got K={K}, s={s}")
    rhs = 2.0 * math.exp(-K * K / 2.0)
    tail = np.abs(f.x) >= K
    lhs_exp = float(np.dot(f.p[tail], np.exp(np.abs(s * f.x[tail]))))
    margins = {"exponential": rhs - lhs_exp}
    if K >= 2.0:
        margins["first_moment"] = rhs - float(np.dot(f.p[tail], np.abs(f.x[tail])))
    worst = min(margins, key=margins.get)
    return make_report(
        "tail_bound",
        f"exact evaluation over {f.size} atoms, s={s:g}, K={K:g}",
        margins[worst],
        worst,
        tolerance=1e-15,
        rhs=rhs,
        margins=margins,
    )


def check_lower_bound_inequality(d: Distribution, K: float, tol: float = 1e-9,
                                 proxy_tol: float = 1e-8) -> CertificateReport:
    """``E exp(X^2/K^2) <= (1 - 2 sigma^2/K^2)^{-1/2}`` for ``K > sqrt(2) sigma``."""
    m = mean(d)
    if abs(m) > 1e-12 * max(1.0, math.sqrt(d.variance())):
        raise PreconditionNotMet(f"law must be centered, mean is {m}")
    sigma = variance_proxy(d, proxy_tol).value
    if not K > math.sqrt(2.0) * sigma:
        raise PreconditionNotMet(f"need K > sqrt(2) sigma = {math.sqrt(2.0) * sigma}")
    rhs = (1.0 - 2.0 * sigma * sigma / (K * K)) ** -0.5
    lhs = psi2_moment(d, K)
    return make_report(
        "lower_bound_inequality",
        f"single point K={K:.12g}",
        rhs * (1.0 + tol) - lhs,
        K,
        lhs=lhs,
        rhs=rhs,
        sigma=sigma,
    )
