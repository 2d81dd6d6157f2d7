"""Built-in oracle suite behind the `selftest` CLI subcommand.

Each check recomputes a quantity through an independent route (series,
quadrature, closed identity, or Monte Carlo moments) and compares at a fixed
tolerance.  The statistical checks run at reduced sample counts so the whole
table stays interactive; the full-size versions live in the test suite.
Checks read module-level coefficient tables live, so a perturbed coefficient
(negative control) must flip the corresponding row to FAIL.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import quad
from scipy.special import ive

from . import special_functions as sf
from .channel import array_response, optimal_phase_shifts, sample_ppp_disk
from .distributions import cdf_gamma_d, eve_model, legit_model
from .montecarlo import ks_distance, sample_gamma_d
from .presets import fig3_config
from .sop import RationalExponent, sop_alpha2_freespace, sop_closed, sop_quadrature

__all__ = ["CheckResult", "run_all_checks"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _laguerre_series_exact(x: float, terms: int = 120) -> float:
    """Confluent-hypergeometric series of L_{1/2}(-x) in exact rationals."""
    xf = Fraction(x)
    total = Fraction(1)
    term = Fraction(1)
    poch = Fraction(1)
    fact = Fraction(1)
    for n in range(1, terms):
        poch *= Fraction(2 * n - 3, 2)          # (-1/2)_n
        fact *= n
        term = poch * (-xf) ** n / (fact * fact)
        total += term
    return float(total)


def _marcum_quad_oracle(a: float, b: float) -> float:
    f = lambda x: x * math.exp(-0.5 * (x - a) ** 2) * float(ive(0, a * x))
    val, _ = quad(f, 0.0, b, epsabs=1e-13, epsrel=1e-12, limit=300)
    return 1.0 - val


def _bessel_k_quad_oracle(nu: float, x: float) -> float:
    f = lambda t: math.exp(-x * math.cosh(t)) * math.cosh(nu * t)
    val, _ = quad(f, 0.0, 60.0, epsabs=1e-13, epsrel=1e-12, limit=300)
    return val


def _check_laguerre() -> CheckResult:
    worst = 0.0
    for x in (0.5, 2.0, 7.5, 13.0, 20.0):
        a = sf.laguerre_half(x)
        b = _laguerre_series_exact(x)
        worst = max(worst, abs(a - b) / b)
    ok = worst < 1e-12 and sf.laguerre_half(10.0) > sf.laguerre_half(2.0) \
        and sf.laguerre_half(0.0) == 1.0
    return CheckResult("laguerre_half vs exact-rational series",
                       ok, f"worst rel err {worst:.2e} (tol 1e-12)")


def _check_incomplete_gamma() -> CheckResult:
    worst = 0.0
    for a, x in ((2.5, 3.0), (3.2, 5.0), (0.7, 0.2), (12.0, 9.0)):
        total = sf.lower_incomplete_gamma(a, x) + sf.upper_incomplete_gamma(a, x)
        worst = max(worst, abs(total - math.gamma(a)) / math.gamma(a))
    closed = abs(sf.lower_incomplete_gamma(1.0, 2.0) - (1.0 - math.exp(-2.0)))
    ok = worst < 1e-12 and closed < 1e-14 and sf.lower_incomplete_gamma(3.0, 0.0) == 0.0
    return CheckResult("incomplete gamma complementarity",
                       ok, f"worst rel err {worst:.2e} (tol 1e-12)")


def _check_marcum_exact() -> CheckResult:
    worst = 0.0
    for a, b in ((1.0, 1.0), (0.5, 2.0), (3.0, 2.0), (2.0, 4.0)):
        worst = max(worst, abs(sf.marcum_q1(a, b) - _marcum_quad_oracle(a, b)))
    edge = max(abs(sf.marcum_q1(a, 0.0) - 1.0) for a in (0.0, 1.0, 5.0))
    edge = max(edge, max(abs(sf.marcum_q1(0.0, b) - math.exp(-b * b / 2.0))
                         for b in (1.0, 2.0)))
    rng = np.random.default_rng(5)
    mono = True
    for _ in range(60):
        a = rng.uniform(0.0, 5.0)
        b1, b2 = sorted(rng.uniform(0.0, 8.0, 2))
        mono &= sf.marcum_q1(a, b1) >= sf.marcum_q1(a, b2) - 1e-13
    ok = worst < 1e-10 and edge < 1e-14 and mono
    return CheckResult("marcum_q1 vs integral oracle + monotonicity",
                       ok, f"worst abs err {worst:.2e} (tol 1e-10)")


def _check_marcum_approx() -> CheckResult:
    gap = abs(sf.marcum_q1_poly_approx(1.0, 2.0) - sf.marcum_q1(1.0, 2.0))
    # direct evaluation of the printed quartic fits at (0.5, 0.5)
    v = sf._poly(sf.MARCUM_POLY_V, 0.5)
    mu = sf._poly(sf.MARCUM_POLY_MU, 0.5)
    frozen = math.exp(-math.exp(v) * 0.5 ** mu)
    reg = abs(sf.marcum_q1_poly_approx(0.5, 0.5) - frozen)
    at_zero = sf.marcum_q1_poly_approx(3.0, 0.0)
    ok = gap < 0.05 and reg < 1e-15 and at_zero == 1.0
    return CheckResult("marcum polynomial fit error budget",
                       ok, f"|approx-exact|(1,2) = {gap:.4f} (budget 0.05)")


def _check_bessel_k() -> CheckResult:
    worst_half = max(
        abs(sf.bessel_k(0.5, x) - math.sqrt(math.pi / (2 * x)) * math.exp(-x))
        for x in (0.5, 1.0, 3.0))
    worst_rec = 0.0
    for nu, x in ((1.0, 2.0), (2.3, 1.7), (0.8, 4.0)):
        lhs = sf.bessel_k(nu + 1.0, x)
        rhs = sf.bessel_k(nu - 1.0, x) + (2 * nu / x) * sf.bessel_k(nu, x)
        worst_rec = max(worst_rec, abs(lhs - rhs) / rhs)
    worst_int = abs(sf.bessel_k(2.0, 1.0) - _bessel_k_quad_oracle(2.0, 1.0))
    ok = worst_half < 1e-12 and worst_rec < 1e-10 and worst_int < 1e-9
    return CheckResult("bessel_k closed form / recurrence / integral",
                       ok, f"half-order err {worst_half:.2e}, rec {worst_rec:.2e}")


def _check_meijer() -> CheckResult:
    worst_exp = max(
        abs(sf.meijer_g_m0_0m(sf.MeijerGRestricted((0.0,), z)) - math.exp(-z))
        for z in (0.1, 1.0, 5.0))
    g = sf.meijer_g_m0_0m(sf.MeijerGRestricted((0.5, -0.5), 0.25))
    bessel_id = abs(g - 2.0 * sf.bessel_k(1.0, 1.0))
    worst_overlap = 0.0
    for z in (0.3, 0.7, 1.0, 1.6, 3.0):
        gg = sf.MeijerGRestricted((0.0, 0.45, 1.3, 2.85), z)
        ls, ss, _ = sf.meijer_g_m0_0m_log(gg, method="series")
        lc, sc, _ = sf.meijer_g_m0_0m_log(gg, method="contour")
        worst_overlap = max(worst_overlap, abs(math.exp(ls - lc) - 1.0))
    ok = worst_exp < 1e-12 and bessel_id < 1e-10 and worst_overlap < 1e-8
    return CheckResult("meijer-G identities + series/contour overlap",
                       ok, f"overlap rel err {worst_overlap:.2e} (tol 1e-8)")


def _check_phase_optimality() -> CheckResult:
    rng = np.random.default_rng(11)
    n = 16
    a_n = array_response(n, 0.4, 1.1, 0.5)
    ok = True
    for _ in range(50):
        h = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2)
        theta = optimal_phase_shifts(h, a_n)
        best = np.abs(np.sum(np.exp(1j * theta) * np.conj(h) * a_n)) ** 2
        rand_th = rng.uniform(0, 2 * math.pi, (200, n))
        rand = np.abs((np.exp(1j * rand_th) * (np.conj(h) * a_n)[None, :])
                      .sum(axis=1)) ** 2
        ok &= best >= rand.max() - 1e-9
        ok &= abs(math.sqrt(best) - np.abs(h).sum()) < 1e-10
    return CheckResult("phase alignment beats random search", ok, "200x50 draws")


def _check_ppp() -> CheckResult:
    rng = np.random.default_rng(13)
    mean = 1e-3 * math.pi * 200.0 ** 2
    counts = [len(sample_ppp_disk(1e-3, 200.0, rng)) for _ in range(3000)]
    se = math.sqrt(mean / 3000)
    ok = abs(np.mean(counts) - mean) < 3 * se
    ok &= len(sample_ppp_disk(0.0, 10.0, rng)) == 0
    return CheckResult("PPP disk count moment",
                       ok, f"mean {np.mean(counts):.2f} vs {mean:.2f}")


def _check_gamma_fit() -> CheckResult:
    cfg = fig3_config()
    model = legit_model(cfg)
    samples = sample_gamma_d(cfg, 100000, seed=3)
    ks = ks_distance(samples, lambda x: cdf_gamma_d(model, x))
    return CheckResult("user SNR Gamma fit (1e5 draws)",
                       ks < 0.02, f"KS = {ks:.4f} (tol 0.02)")


def _check_sop_consistency() -> CheckResult:
    cfg = fig3_config()
    lm = legit_model(cfg)
    ev = eve_model(cfg)
    quad_res = sop_quadrature(lm, ev, cfg.c_th, "infinite_re")
    closed = sop_closed(lm, ev, cfg.c_th, RationalExponent(2, 1))
    cor = sop_alpha2_freespace(lm, ev, cfg.c_th)
    d1 = abs(quad_res.value - closed.value)
    d2 = abs(closed.value - cor.value)
    ok = d1 < 1e-6 and d2 < 1e-10
    return CheckResult("closed form vs quadrature vs free-space case",
                       ok, f"|closed-quad| = {d1:.2e}, |closed-cor1| = {d2:.2e}")


def run_all_checks() -> list[CheckResult]:
    checks = (
        _check_laguerre,
        _check_incomplete_gamma,
        _check_marcum_exact,
        _check_marcum_approx,
        _check_bessel_k,
        _check_meijer,
        _check_phase_optimality,
        _check_ppp,
        _check_gamma_fit,
        _check_sop_consistency,
    )
    results = []
    for fn in checks:
        try:
            results.append(fn())
        except Exception as exc:  # a crash is a failure, not an abort
            results.append(CheckResult(fn.__name__, False, f"raised {exc!r}"))
    return results
