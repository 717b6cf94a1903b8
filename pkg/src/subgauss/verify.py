"""The default verification battery run by ``subgauss verify``."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable

import numpy as np

from . import sharpness as sh
from .distributions import (
    RADEMACHER,
    STANDARD_GAUSSIAN,
    FiniteDistribution,
    centered,
    make_centered_binary,
    make_finite,
    scaled,
)
from .oracle import finite_diff, grid_sup_proxy, quad_gaussian_psi2
from .subgaussian import SQRT_3_8, SQRT_LOG2, psi2_norm, ratio, variance_proxy, variance_proxy_binary

H3_SIGNS = (0.5, 1.0, 2.0, 4.0)


def random_centered_laws(rng: np.random.Generator, count: int, max_atoms: int = 6,
                         box: float = 2.0) -> list[FiniteDistribution]:
    """Centered finite laws with 2..max_atoms atoms drawn uniformly from ``[-box, box]``."""
    laws = []
    while len(laws) < count:
        m = int(rng.integers(2, max_atoms + 1))
        x = rng.uniform(-box, box, m)
        p = rng.dirichlet(np.ones(m))
        if np.min(p) < 1e-9:
            continue
        d = centered(make_finite(x, p))
        if d.size >= 2:
            laws.append(d)
    return laws


def thread_count() -> int | None:
    """Worker cap from ``SUBGAUSS_THREADS``; ``None`` lets the executor decide."""
    raw = os.environ.get("SUBGAUSS_THREADS", "0").strip() or "0"
    n = int(raw)
    return None if n <= 0 else n


def check_named_examples() -> sh.CertificateReport:
    g_norm = psi2_norm(STANDARD_GAUSSIAN).value
    r_norm = psi2_norm(RADEMACHER).value
    r_sig = variance_proxy(RADEMACHER).value
    errs = {
        "gaussian_psi2": abs(g_norm - math.sqrt(8.0 / 3.0)) - 1e-9,
        "rademacher_psi2": abs(r_norm - 1.0 / SQRT_LOG2) - 1e-9,
        "rademacher_sigma": abs(r_sig - 1.0) - 1e-6,
        "gaussian_ratio": abs(ratio(STANDARD_GAUSSIAN).ratio - SQRT_3_8) - 1e-6,
        "rademacher_ratio": abs(ratio(RADEMACHER).ratio - SQRT_LOG2) - 1e-6,
    }
    worst = max(errs, key=errs.get)
    return sh.make_report("named_examples", "Gaussian and Rademacher", -errs[worst], worst)


def check_f_certificate(u_max: float = 100.0, n: int = 10_000) -> sh.CertificateReport:
    us = sh.u_grid(u_max, n)
    f_slack = np.array([sh.big_f(u) - 2.0 for u in us])
    fp = np.array([sh.f_prime(u) for u in us])
    margins = np.minimum(f_slack, fp)
    i = int(np.argmin(margins))
    return sh.make_report(
        "F_certificate", f"u-1 geometric in [1e-6, {u_max - 1:g}], n={n}",
        margins[i], float(us[i]), tolerance=1e-12,
        min_F_minus_2=float(f_slack.min()), min_F_prime=float(fp.min()),
    )


def check_h_certificate(u_max: float = 100.0, n: int = 10_000) -> sh.CertificateReport:
    us = sh.u_grid(u_max, n)
    hs = np.array([sh.h_functions(u) for u in us])
    margins = np.minimum(hs[:, 1], hs[:, 2])
    i = int(np.argmin(margins))
    return sh.make_report(
        "h_certificate", f"u-1 geometric in [1e-6, {u_max - 1:g}], n={n}",
        margins[i], float(us[i]), tolerance=1e-12,
        min_h2=float(hs[:, 1].min()), min_h=float(hs[:, 2].min()),
    )


def check_f_prime_fd(n: int = 200) -> sh.CertificateReport:
    us = np.geomspace(1.01, 50.0, n)
    rel = np.array([
        abs(finite_diff(sh.big_f, u, 1, 1e-6 * u) / sh.f_prime(u) - 1.0) for u in us
    ])
    i = int(np.argmax(rel))
    return sh.make_report(
        "F_prime_vs_finite_difference", f"geometric u in [1.01, 50], n={n}",
        1e-5 - rel[i], float(us[i]), max_relative_error=float(rel[i]),
    )


def check_h_third_fd(n: int = 50) -> sh.CertificateReport:
    us = np.linspace(1.1, 10.0, n)
    worst, at = 0.0, float(us[0])
    for u in us:
        step = 1e-3 * u
        h2_3, h_3 = sh.h_third_derivatives(u)
        fd_h2 = finite_diff(lambda v: sh.h_functions(v)[1], u, 3, step)
        fd_h = finite_diff(lambda v: sh.h_functions(v)[2], u, 3, step)
        rel = max(abs(fd_h2 / h2_3 - 1.0), abs(fd_h / h_3 - 1.0))
        if rel > worst:
            worst, at = rel, float(u)
    return sh.make_report(
        "h_third_derivatives_vs_finite_difference", f"u in [1.1, 10], n={n}",
        1e-3 - worst, at, max_relative_error=worst,
    )


def check_w_second(n: int = 2001) -> sh.CertificateReport:
    ts = np.linspace(-10.0, 10.0, n)
    ws = np.array([sh.w_second(t) for t in ts])
    floor = 8.0 * ts ** 4 / (1.0 + 2.0 * ts ** 2) ** 2
    pos = ws - floor - 1e-12
    fd_err = max(
        abs(finite_diff(lambda t: sh.w(t, 0.7, 0.3), t, 2, 1e-4) - sh.w_second(t))
        for t in (-1.0, 0.3, 2.0)
    )
    i = int(np.argmin(pos))
    return sh.make_report(
        "w_second_positive", f"t in [-10, 10], n={n}",
        min(float(pos[i]), 1e-5 - fd_err), float(ts[i]), finite_difference_error=fd_err,
    )


def _moment_set_battery(rng: np.random.Generator, count: int = 20) -> list[FiniteDistribution]:
    """Random centered laws rescaled into ``E exp(X^2) <= 2``."""
    laws = [scaled(RADEMACHER, SQRT_LOG2), make_centered_binary(3, 0.3).to_finite()]
    for d in random_centered_laws(rng, count):
        k = psi2_norm(d).bracket_hi
        laws.append(scaled(d, 1.0 / k))
    return laws


def check_tail_bounds(seed: int) -> sh.CertificateReport:
    rng = np.random.default_rng(seed)
    worst = None
    for d in _moment_set_battery(rng):
        for s in (0.0, 0.4, 1.0, 2.0):
            for K in sorted({2.0 * s, 0.8, 1.0, 2.0, 4.0, 2.0 * s + 0.5}):
                if K <= 0 or K < 2.0 * s:
                    continue
                rep = sh.check_tail_bound(d, s, K)
                if worst is None or rep.min_margin < worst[0]:
                    worst = (rep.min_margin, {"law": list(d.points), "s": s, "K": K})
    return sh.make_report("tail_bounds", "moment-set battery x s x K", worst[0], worst[1],
                          tolerance=1e-15)


def check_lower_bound(seed: int, count: int = 100) -> sh.CertificateReport:
    rng = np.random.default_rng(seed + 1)
    g = sh.check_lower_bound_inequality(STANDARD_GAUSSIAN, 2.0)
    equality_gap = abs(g.details["lhs"] - g.details["rhs"])
    margins = [(1e-8 - equality_gap, "gaussian K=2 equality")]
    margins.append((sh.check_lower_bound_inequality(RADEMACHER, 2.0).min_margin, "rademacher K=2"))
    for i, d in enumerate(random_centered_laws(rng, count)):
        sigma = variance_proxy(d).value
        margins.append((sh.check_lower_bound_inequality(d, 2.0 * sigma).min_margin, f"random law {i}"))
    m, where = min(margins, key=lambda t: t[0])
    return sh.make_report("lower_bound_inequality", f"Gaussian, Rademacher, {count} random laws",
                          m, where, gaussian_equality_gap=equality_gap)


def check_h2_mgf_band(n: int = 49) -> sh.CertificateReport:
    ss = np.linspace(-6.0, 6.0, n)
    worst, at = math.inf, 0.0
    for s in ss:
        v = sh.h2_mgf_max(s)
        upper = math.exp(math.log(2.0) * s * s / 2.0) * (1.0 + 1e-9) - v
        lower = v - math.cosh(s * SQRT_LOG2) + 1e-12
        m = min(upper / max(1.0, v), lower)
        if m < worst:
            worst, at = m, float(s)
    return sh.make_report("h2_mgf_band", f"s in [-6, 6], n={n}", worst, at)


def check_ratio_band(seed: int, count: int) -> sh.CertificateReport:
    rng = np.random.default_rng(seed + 2)
    lo, hi = math.inf, -math.inf
    for d in random_centered_laws(rng, count):
        r = ratio(d).ratio
        lo, hi = min(lo, r), max(hi, r)
    margin = min(lo - (SQRT_3_8 - 1e-6), SQRT_LOG2 + 1e-6 - hi)
    return sh.make_report("ratio_band", f"{count} random centered laws, <=6 atoms in [-2, 2]",
                          margin, {"min_ratio": lo, "max_ratio": hi})


def check_oracles(n_u: int = 10, n_x: int = 5) -> sh.CertificateReport:
    quad_err = abs(quad_gaussian_psi2(math.sqrt(8.0 / 3.0)) - 2.0)
    worst = 0.0
    for u in np.linspace(1.0, 20.0, n_u):
        for x1 in np.linspace(0.05, 1.0, n_x):
            g = grid_sup_proxy(make_centered_binary(u, x1), 20.0 / (u * x1), 100_001)
            worst = max(worst, abs(math.sqrt(g) - variance_proxy_binary(u, x1)))
    return sh.make_report("oracle_cross_checks", f"quadrature at sqrt(8/3); {n_u}x{n_x} (u, x1) grid",
                          min(1e-8 - quad_err, 1e-6 - worst), None,
                          quadrature_error=quad_err, proxy_error=worst)


def check_determinant() -> sh.CertificateReport:
    dup = max(abs(sh.vandermonde_like_det(*t)) for t in [(0, 1, 1), (0.3, 0.3, -2), (1.5, -1, 1.5)])
    exact = abs(sh.vandermonde_like_det(0, 1, 2) - (math.e ** 4 - 2 * math.e + 1))
    distinct = abs(sh.vandermonde_like_det(-1.0, 0.5, 2.0))
    margin = min(-dup, 1e-10 - exact, distinct - 1e-9)
    return sh.make_report("vandermonde_determinant", "fixed triples", margin, None)


def default_battery(seed: int = 42, trials: int = 100_000, laws: int = 1000,
                    u_max: float = 50.0, grid: int = 500) -> list[Callable[[], sh.CertificateReport]]:
    jobs = [
        check_named_examples,
        check_f_certificate,
        check_h_certificate,
        check_f_prime_fd,
        check_h_third_fd,
        check_w_second,
        lambda: check_tail_bounds(seed),
        lambda: check_lower_bound(seed),
        check_h2_mgf_band,
        lambda: sh.scan_h2_max_ratio(u_max, grid),
        lambda: check_ratio_band(seed, laws),
        check_oracles,
        check_determinant,
    ]
    for s in H3_SIGNS:
        jobs.append(lambda s=s: sh.scan_h3_no_improvement(s, trials, seed))
    return jobs


def run_battery(seed: int = 42, trials: int = 100_000, laws: int = 1000,
                u_max: float = 50.0, grid: int = 500) -> list[sh.CertificateReport]:
    jobs = default_battery(seed, trials, laws, u_max, grid)
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        return list(pool.map(lambda job: job(), jobs))
