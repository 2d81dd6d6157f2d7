"""Numerical kernels for the special functions used by the secrecy analysis.

Everything here is pure and stateless.  The only nontrivial machinery is the
restricted Meijer G evaluator: for arguments of the form G^{m,0}_{0,m}(z | b)
it switches between a residue series (small z) and numerical Mellin-Barnes
contour integration through the real saddle point (large z or degenerate
parameter spacing).  Both paths work on log-magnitudes with explicit signs so
that parameter vectors with entries of order several hundred, as produced by
large reflecting arrays, do not overflow double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import (
    digamma,
    gammainc,
    gammaincc,
    gammaln,
    gammasgn,
    ive,
    kv,
    loggamma,
)

__all__ = [
    "ConvergenceError",
    "MeijerGRestricted",
    "MARCUM_POLY_V",
    "MARCUM_POLY_MU",
    "laguerre_half",
    "lower_incomplete_gamma",
    "upper_incomplete_gamma",
    "marcum_q1",
    "marcum_q1_poly_approx",
    "bessel_k",
    "meijer_g_m0_0m",
    "meijer_g_m0_0m_log",
]


class ConvergenceError(RuntimeError):
    """Raised when an iterative evaluation cannot reach the requested tolerance.

    Carries the best error estimate achieved in ``achieved_tol``.
    """

    def __init__(self, message: str, achieved_tol: float):
        super().__init__(f"{message} (achieved tolerance {achieved_tol:.3e})")
        self.achieved_tol = achieved_tol


def laguerre_half(x: float) -> float:
    """Laguerre function of order 1/2 at negative argument, L_{1/2}(-x).

    Uses the modified-Bessel identity
    L_{1/2}(-x) = e^{-x/2} [(1+x) I_0(x/2) + x I_1(x/2)],
    evaluated with exponentially scaled Bessel functions so the result stays
    finite for any x >= 0.  The value is >= 1 and strictly increasing.
    """
    if x < 0:
        raise ValueError(f"laguerre_half requires x >= 0, got {x}")
    return float((1.0 + x) * ive(0, x / 2.0) + x * ive(1, x / 2.0))


def lower_incomplete_gamma(a: float, x: float) -> float:
    """Lower incomplete gamma function gamma(a, x), non-regularized."""
    if a <= 0:
        raise ValueError(f"lower_incomplete_gamma requires a > 0, got a={a}")
    if x < 0:
        raise ValueError(f"lower_incomplete_gamma requires x >= 0, got x={x}")
    return float(gammainc(a, x)) * math.exp(gammaln(a))


def upper_incomplete_gamma(a: float, x: float) -> float:
    """Upper incomplete gamma function Gamma(a, x), non-regularized."""
    if a <= 0:
        raise ValueError(f"upper_incomplete_gamma requires a > 0, got a={a}")
    if x < 0:
        raise ValueError(f"upper_incomplete_gamma requires x >= 0, got x={x}")
    return float(gammaincc(a, x)) * math.exp(gammaln(a))


# Beyond this head start the scaled-series terms are below 1e-140 of the
# result; the Gaussian tail value is then exact to double precision.
_MARCUM_TAIL_CUT = 26.0


def _marcum_series(ab: float, ratio: float, k_start: int, tol: float) -> float:
    """sum_{k >= k_start} ratio^k Ie_k(ab) for 0 <= ratio <= 1."""
    total = 0.0
    rk = ratio ** k_start
    k = k_start
    while True:
        term = rk * float(ive(k, ab))
        total += term
        # past the Bessel turnover (k > ab) the terms decay faster than
        # geometrically, so stopping on term size is safe
        if k > ab and term < tol * max(total, 1e-300):
            return total
        if k > 200000:
            raise ConvergenceError("marcum_q1 series did not converge",
                                   term / max(total, 1e-300))
        rk *= ratio
        k += 1


def marcum_q1(a: float, b: float, tol: float = 1e-14) -> float:
    """First-order Marcum Q-function Q_1(a, b).

    Canonical Bessel-I series with exponentially scaled terms:
    Q_1 = e^{-(a-b)^2/2} sum_{k>=0} (a/b)^k Ie_k(ab) for b > a, and the
    complementary form 1 - e^{-(a-b)^2/2} sum_{k>=1} (b/a)^k Ie_k(ab)
    otherwise, so the power ratio never exceeds 1.  Truncation is by term
    ratio once past the Bessel turnover.  Far in the tails (|b - a| > 26,
    value within 1e-140 of 0 or 1) the limit is returned directly.
    """
    if a < 0 or b < 0:
        raise ValueError(f"marcum_q1 requires a, b >= 0, got a={a}, b={b}")
    if b == 0.0:
        return 1.0
    if a == 0.0:
        return math.exp(-b * b / 2.0)
    d = b - a
    if d > _MARCUM_TAIL_CUT:
        return 0.0
    if -d > _MARCUM_TAIL_CUT:
        return 1.0
    ab = a * b
    pref = math.exp(-d * d / 2.0)
    if b > a:
        return min(1.0, pref * _marcum_series(ab, a / b, 0, tol))
    return min(1.0, max(0.0, 1.0 - pref * _marcum_series(ab, b / a, 1, tol)))


# Quartic fits for the exponential Marcum approximation
# Q_1(a, b) ~= exp(-e^{v(a)} b^{mu(a)}); coefficients in ascending order.
MARCUM_POLY_V = (-0.840, 0.327, -0.740, 0.083, -0.004)
MARCUM_POLY_MU = (2.174, -0.592, 0.593, -0.092, 0.005)


def _poly(coeffs, x: float) -> float:
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def marcum_q1_poly_approx(a: float, b: float) -> float:
    """Exponential approximation of Q_1(a, b) with quartic-fit exponents.

    Fast and integrable in closed form, but only an approximation: the error
    against :func:`marcum_q1` can reach a few percent in the transition
    region.  Callers that need the discrepancy should report it rather than
    hide it.
    """
    if a < 0 or b < 0:
        raise ValueError(f"marcum_q1_poly_approx requires a, b >= 0, got a={a}, b={b}")
    if b == 0.0:
        return 1.0
    v = _poly(MARCUM_POLY_V, a)
    mu = _poly(MARCUM_POLY_MU, a)
    return math.exp(-math.exp(v) * b ** mu)


def bessel_k(nu: float, x: float) -> float:
    """Modified Bessel function of the second kind K_nu(x), x > 0."""
    if x <= 0:
        raise ValueError(f"bessel_k requires x > 0, got x={x}")
    return float(kv(nu, x))


@dataclass(frozen=True)
class MeijerGRestricted:
    """Argument bundle for the G^{m,0}_{0,m}(z | -; b) family.

    Only the all-lower-parameter case is representable; that is the family
    the closed-form outage expression lives in.

    b_params: the ordered lower parameter vector (length >= 1).
    z: positive real argument.
    """

    b_params: tuple[float, ...]
    z: float

    def __post_init__(self):
        if len(self.b_params) < 1:
            raise ValueError("b_params must contain at least one entry")
        if not self.z > 0:
            raise ValueError(f"argument z must be positive, got {self.z}")
        object.__setattr__(self, "b_params", tuple(float(b) for b in self.b_params))

    @property
    def order(self) -> int:
        return len(self.b_params)

    def degenerate(self, tol: float = 1e-9) -> bool:
        """True when two parameters differ by (nearly) an integer.

        Integer spacing puts double poles on the Mellin-Barnes integrand's
        pole lattice, which breaks the simple residue series; the contour
        path has no such restriction.
        """
        b = np.asarray(self.b_params)
        d = np.subtract.outer(b, b)[~np.eye(len(b), dtype=bool)]
        return bool(np.any(np.abs(d - np.round(d)) < tol))


def _signed_logsumexp(logs: np.ndarray, signs: np.ndarray) -> tuple[float, float, float]:
    """Sum of signed exponentials in log space.

    Returns (log|sum|, sign, cancellation), where cancellation is the factor
    exp(max_log - log|sum|) by which significance was lost.
    """
    m = float(np.max(logs))
    if not np.isfinite(m):
        return -math.inf, 1.0, 1.0
    s = float(np.sum(signs * np.exp(logs - m)))
    if s == 0.0:
        return -math.inf, 1.0, math.inf
    return m + math.log(abs(s)), math.copysign(1.0, s), 1.0 / abs(s)


def _meijer_series_log(z: float, b: np.ndarray, rtol: float,
                       max_terms: int = 600) -> tuple[float, float, float]:
    """Residue-series evaluation about z -> 0.

    G^{m,0}_{0,m}(z|b) = sum_l sum_k [prod_{j!=l} Gamma(b_j - b_l - k)]
                         (-1)^k z^{b_l + k} / k!,
    with coefficients advanced by the Gamma recurrence and every term held as
    (log-magnitude, sign).  Returns (log|G|, sign, error estimate).
    """
    m = len(b)
    lz = math.log(z)
    logs: list[float] = []
    signs: list[float] = []
    tail_bound_log = -math.inf
    for l in range(m):
        diff = np.delete(b, l) - b[l]
        lc = float(np.sum(gammaln(diff)))
        sc = float(np.prod(gammasgn(diff)))
        block_peak = -math.inf
        prev_lt = math.inf
        for k in range(max_terms):
            lt = lc + (b[l] + k) * lz
            logs.append(lt)
            signs.append(sc)
            block_peak = max(block_peak, lt)
            den = diff - (k + 1)
            lc = lc - math.log1p(k) - float(np.sum(np.log(np.abs(den))))
            sc *= -float(np.prod(np.sign(den)))
            # once terms fall 60 nats under the block peak while shrinking,
            # the geometric tail is negligible against the block itself
            if k >= 2 and lt < block_peak - 60.0 and lt < prev_lt:
                tail_bound_log = max(tail_bound_log, lt)
                break
            prev_lt = lt
        else:
            raise ConvergenceError("Meijer-G residue series did not converge",
                                   math.exp(lt - block_peak))
    log_val, sign, cancel = _signed_logsumexp(np.array(logs), np.array(signs))
    # error: truncation tail + significance lost to cancellation
    err = math.exp(min(tail_bound_log - log_val, 700.0)) if np.isfinite(log_val) else math.inf
    err += np.finfo(float).eps * cancel * len(logs)
    return log_val, sign, err


def _meijer_contour_log(z: float, b: np.ndarray, rtol: float) -> tuple[float, float, float]:
    """Mellin-Barnes contour quadrature through the real saddle point.

    G = (1/pi) * Re int_0^inf exp(sum_j logGamma(b_j+u+it) - (u+it) log z) dt
    with u chosen where sum_j psi(b_j+u) = log z, so the integrand is a
    damped peak at t = 0.  All magnitudes are normalized by the saddle value.
    """
    lz = math.log(z)

    def dlog(u: float) -> float:
        return float(np.sum(digamma(b + u))) - lz

    lo = -float(np.min(b)) + 1e-6
    if dlog(lo) >= 0.0:
        u = lo + 0.5
    else:
        hi = max(1.0, lo + 1.0)
        while dlog(hi) < 0.0:
            hi *= 2.0
            if hi > 1e14:
                raise ConvergenceError("Meijer-G saddle search failed", math.inf)
        u = brentq(dlog, lo, hi)
    peak = float(np.sum(gammaln(b + u))) - u * lz

    def integrand(t: float) -> float:
        g = np.sum(loggamma(b + u + 1j * t)) - (u + 1j * t) * lz
        return float(np.real(np.exp(g - peak)))

    # cutoff where the integrand envelope has fallen ~60 nats
    T = 1.0
    while True:
        env = float(np.real(np.sum(loggamma(b + u + 1j * T)))) - u * lz - peak
        if env < -60.0 or T > 1e9:
            break
        T *= 1.6
    val, abserr = quad(integrand, 0.0, T, epsabs=1e-300, epsrel=rtol, limit=500)
    if val == 0.0:
        return -math.inf, 1.0, math.inf
    if abserr > 10.0 * rtol * abs(val) + 1e-290:
        raise ConvergenceError("Meijer-G contour quadrature did not converge",
                               abserr / abs(val))
    return peak + math.log(abs(val) / math.pi), math.copysign(1.0, val), abserr / abs(val)


def meijer_g_m0_0m_log(g: MeijerGRestricted, rtol: float = 1e-10,
                       method: str = "auto", zswitch: float = 1.0,
                       ) -> tuple[float, float, float]:
    """Log-space evaluation of G^{m,0}_{0,m}(z | -; b).

    Returns (log-magnitude, sign, relative error estimate).  ``method`` is
    one of ``auto`` (series below ``zswitch``, contour above, contour for
    degenerate parameter spacing), ``series`` or ``contour``.

    The log form exists because the outage prefactors routinely produce
    values like exp(+-1500) that the plain evaluator cannot represent.
    """
    b = np.asarray(g.b_params, dtype=float)
    if method == "series" or (method == "auto" and g.z <= zswitch):
        if g.degenerate():
            if method == "series":
                raise ValueError(
                    "degenerate parameter spacing (integer differences); "
                    "the residue series is invalid, use the contour method")
            return _meijer_contour_log(g.z, b, rtol)
        return _meijer_series_log(g.z, b, rtol)
    return _meijer_contour_log(g.z, b, rtol)


def meijer_g_m0_0m(g: MeijerGRestricted, rtol: float = 1e-10,
                   method: str = "auto", zswitch: float = 1.0) -> float:
    """G^{m,0}_{0,m}(z | -; b) as a plain float (may overflow to inf)."""
    log_val, sign, _ = meijer_g_m0_0m_log(g, rtol=rtol, method=method, zswitch=zswitch)
    if log_val > 709.0:
        return sign * math.inf
    return sign * math.exp(log_val)
