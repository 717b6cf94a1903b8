"""Acceptance criteria, one test per criterion, each with its runtime budget."""

import math
import time

import numpy as np
import pytest

from subgauss import sharpness as sh
from subgauss.distributions import RADEMACHER, STANDARD_GAUSSIAN, make_centered_binary
from subgauss.oracle import finite_diff, grid_sup_proxy, quad_gaussian_psi2
from subgauss.subgaussian import (
    SQRT_3_8,
    SQRT_LOG2,
    psi2_norm,
    ratio,
    variance_proxy,
    variance_proxy_binary,
)
from subgauss.verify import random_centered_laws

LOG2 = math.log(2.0)


def timed(fn, repeat=1):
    """Return (result of the last call, best wall time over ``repeat`` calls)."""
    best, out = math.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def test_c01_gaussian_psi2_norm(criterion):
    res, dt = timed(lambda: psi2_norm(STANDARD_GAUSSIAN), repeat=20)
    err = abs(res.value - math.sqrt(8 / 3))
    ok = err <= 1e-9 and dt < 1e-3
    criterion(1, f"Gaussian psi2 norm {res.value:.12f}, |err|={err:.1e}, {dt * 1e3:.3f} ms", ok)
    assert err <= 1e-9
    assert dt < 1e-3


def test_c02_rademacher_psi2_norm(criterion):
    res, dt = timed(lambda: psi2_norm(RADEMACHER), repeat=20)
    err = abs(res.value - 1 / SQRT_LOG2)
    ok = err <= 1e-9 and dt < 1e-3
    criterion(2, f"Rademacher psi2 norm {res.value:.12f}, |err|={err:.1e}, {dt * 1e3:.3f} ms", ok)
    assert err <= 1e-9
    assert dt < 1e-3


def test_c03_variance_proxies(criterion):
    (rad, gau), dt = timed(lambda: (variance_proxy(RADEMACHER), variance_proxy(STANDARD_GAUSSIAN)), repeat=5)
    err = abs(rad.value - 1.0)
    ok = err <= 1e-6 and gau.value == 1.0 and dt < 0.05
    criterion(3, f"proxy Rademacher |err|={err:.1e}, Gaussian={gau.value!r}, {dt * 1e3:.2f} ms", ok)
    assert err <= 1e-6
    assert gau.value == 1.0
    assert dt < 0.05


def test_c04_sharp_ratios(criterion):
    (rg, rr), dt = timed(lambda: (ratio(STANDARD_GAUSSIAN), ratio(RADEMACHER)), repeat=5)
    eg = abs(rg.ratio - SQRT_3_8)
    er = abs(rr.ratio - SQRT_LOG2)
    ok = eg <= 1e-6 and er <= 1e-6 and dt < 0.1
    criterion(4, f"ratio Gaussian |err|={eg:.1e}, Rademacher |err|={er:.1e}, {dt * 1e3:.2f} ms", ok)
    assert eg <= 1e-6
    assert er <= 1e-6
    assert dt < 0.1


def test_c05_ratio_band_on_random_laws(criterion):
    def body():
        laws = random_centered_laws(np.random.default_rng(20240501), 1000, max_atoms=6, box=2.0)
        return np.array([ratio(d).ratio for d in laws]), laws

    (rs, laws), dt = timed(body)
    assert len(laws) == 1000
    assert all(d.size <= 6 and d.max_abs() <= 4.0 for d in laws)
    lo_ok = rs.min() >= SQRT_3_8 - 1e-6
    hi_ok = rs.max() <= SQRT_LOG2 + 1e-6
    ok = lo_ok and hi_ok and dt < 30
    criterion(5, f"1000 random laws: ratio in [{rs.min():.6f}, {rs.max():.6f}], {dt:.1f} s", ok)
    assert lo_ok and hi_ok
    assert dt < 30


def test_c06_certificate_suite(criterion):
    def body():
        us = sh.u_grid(100.0, 10_000)
        f = np.array([sh.big_f(u) for u in us])
        fp = np.array([sh.f_prime(u) for u in us])
        hs = np.array([sh.h_functions(u) for u in us])
        fd_us = np.geomspace(1.01, 50.0, 200)
        rel = max(abs(finite_diff(sh.big_f, u, 1, 1e-6 * u) / sh.f_prime(u) - 1.0) for u in fd_us)
        return us, f, fp, hs, rel

    (us, f, fp, hs, rel), dt = timed(body)
    assert us.size == 10_000 and us[0] > 1.0 and us[-1] == pytest.approx(100.0)
    checks = {
        "F>=2": f.min() >= 2.0 - 1e-12,
        "F'>=0": fp.min() >= -1e-12,
        "h>=0": hs[:, 2].min() >= -1e-12,
        "h2>=0": hs[:, 1].min() >= -1e-12,
        "F' vs FD": rel <= 1e-5,
    }
    ok = all(checks.values()) and dt < 5
    criterion(6, f"min F-2={f.min() - 2:.1e}, min F'={fp.min():.1e}, min h={hs[:, 2].min():.1e}, "
                 f"min h2={hs[:, 1].min():.1e}, FD rel={rel:.1e}, {dt:.2f} s", ok)
    assert all(checks.values()), checks
    assert dt < 5


def test_c07_binary_boundary_scan(criterion):
    rep, dt = timed(lambda: sh.scan_h2_max_ratio(50, 500))
    err = abs(rep.details["max_ratio"] - SQRT_LOG2)
    at_one = rep.worst_point == 1.0
    ok = err <= 1e-6 and at_one and dt < 5
    criterion(7, f"max ratio |err|={err:.1e} at u={rep.worst_point}, {dt:.2f} s", ok)
    assert err <= 1e-6
    assert at_one
    assert dt < 5


def test_c08_boundary_mgf_envelope(criterion):
    ss = [-4.0, -2.0, -1.0, -0.5, 0.5, 1.0, 2.0, 4.0]
    vals, dt = timed(lambda: [sh.h2_mgf_max(s) for s in ss])
    slack = [math.exp(LOG2 * s * s / 2) * (1 + 1e-9) - v for s, v in zip(ss, vals)]
    ok = min(slack) >= 0 and dt < 5
    criterion(8, f"h2_mgf_max below exp(log2 s^2/2) on s in +-{{0.5,1,2,4}}, min slack {min(slack):.2e}, {dt:.2f} s", ok)
    assert min(slack) >= 0
    assert dt < 5


def test_c09_three_point_scan(criterion):
    reps, dt = timed(lambda: [sh.scan_h3_no_improvement(s, 100_000, 0) for s in (0.5, 1.0, 2.0, 4.0)])
    worst = min(r.min_margin for r in reps)
    ok = all(r.passed for r in reps) and dt < 60
    criterion(9, f"H3 scans, 4 x 1e5 trials, worst margin {worst:.2e}, {dt:.1f} s", ok)
    for r in reps:
        assert r.details["h3_best"] <= r.details["h2_max"] + 1e-7
    assert dt < 60


def test_c10_lower_bound_inequality(criterion):
    def body():
        g = sh.check_lower_bound_inequality(STANDARD_GAUSSIAN, 2.0)
        laws = random_centered_laws(np.random.default_rng(7), 100)
        reps = [sh.check_lower_bound_inequality(d, 2.0 * variance_proxy(d).value) for d in laws]
        return g, reps

    (g, reps), dt = timed(body)
    gap = abs(g.details["lhs"] - g.details["rhs"])
    ok = gap <= 1e-8 and all(r.passed for r in reps) and dt < 5
    criterion(10, f"Gaussian K=2 gap {gap:.1e}, {sum(r.passed for r in reps)}/100 random laws pass, {dt:.2f} s", ok)
    assert gap <= 1e-8
    assert all(r.passed for r in reps)
    assert dt < 5


def test_c11_oracle_cross_checks(criterion):
    def body():
        q = quad_gaussian_psi2(math.sqrt(8 / 3))
        worst = 0.0
        for u in np.linspace(1.0, 20.0, 50):
            for x1 in np.linspace(0.05, 1.0, 20):
                g = grid_sup_proxy(make_centered_binary(u, x1), 20.0 / (u * x1), 100_001)
                worst = max(worst, abs(math.sqrt(g) - variance_proxy_binary(u, x1)))
        return q, worst

    (q, worst), dt = timed(body)
    qerr = abs(q - 2.0)
    ok = qerr <= 1e-8 and worst <= 1e-6 and dt < 30
    criterion(11, f"quadrature |err|={qerr:.1e}, 50x20 binary grid worst {worst:.1e}, {dt:.1f} s", ok)
    assert qerr <= 1e-8
    assert worst <= 1e-6
    assert dt < 30


def test_c12_determinant(criterion):
    def body():
        dups = [sh.vandermonde_like_det(*t) for t in [(0, 1, 1), (0.3, 0.3, -2), (1.5, -1, 1.5)]]
        return dups, sh.vandermonde_like_det(0, 1, 2)

    (dups, v), dt = timed(body, repeat=20)
    err = abs(v - (math.e ** 4 - 2 * math.e + 1))
    ok = all(d == 0.0 for d in dups) and err <= 1e-10 and dt < 1e-3
    criterion(12, f"duplicates give {dups}, det(0,1,2) |err|={err:.1e}, {dt * 1e6:.1f} us", ok)
    assert all(d == 0.0 for d in dups)
    assert err <= 1e-10
    assert dt < 1e-3
