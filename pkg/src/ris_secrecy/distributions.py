"""Closed-form SNR distribution machinery.

Two models are built from a :class:`~ris_secrecy.channel.SystemConfig`:

* :class:`LegitSnrModel` -- the Gamma moment-match of the user's cascaded
  amplitude (shape k, scale theta), giving the CDF/PDF of gamma_D.
* :class:`EveSnrModel` -- the Gaussian-sum constants of a single
  eavesdropper's combining variable plus the aggregate-field constants
  (varpi, Xi, t0..t4) that enter the PPP-averaged CDF of the strongest
  eavesdropper's SNR.

The aggregate CDF exists in two grades: ``exact`` integrates the true Marcum
kernel over the disk; ``closed`` uses the exponential Marcum fit that admits
the incomplete-gamma antiderivative.  The closed finite-radius CDF has an
atom at zero of mass exp(-lambda_e pi r_e^2) (the no-eavesdropper event);
the printed density is the density of the absolutely continuous part only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gammainc, gammaln

from .channel import SystemConfig
from .special_functions import (
    MARCUM_POLY_MU,
    MARCUM_POLY_V,
    _poly,
    laguerre_half,
    marcum_q1,
)

__all__ = [
    "LegitSnrModel",
    "EveSnrModel",
    "dirichlet_ratio",
    "legit_model",
    "eve_model",
    "cdf_gamma_d",
    "pdf_gamma_d",
    "eve_pointwise_cdf",
    "eve_aggregate_cdf_exact",
    "eve_aggregate_cdf_closed",
    "eve_aggregate_pdf",
]


@dataclass(frozen=True)
class LegitSnrModel:
    """Gamma(k, theta) model of the user amplitude sqrt(gamma_D / rho_d)."""

    gamma_shape: float   # k
    gamma_scale: float   # theta, amplitude units
    rho_d: float         # transmit SNR P_T / sigma_D^2


@dataclass(frozen=True)
class EveSnrModel:
    """Constants of the aggregate eavesdropper SNR distribution.

    varpi is the (radius-independent) Marcum noncentrality s/sigma; xi maps
    SNR to the Marcum threshold via b = xi sqrt(x) r^{alpha2/2}; t0..t4 are
    the incomplete-gamma constants of the closed aggregate CDF.  mean_scale
    and var_scale give the single-eavesdropper Gaussian moments at unit
    large-scale fade.
    """

    varpi: float
    xi: float
    t0: float
    t1: float
    t2: float
    t3: float
    t4: float
    delta1: float
    delta2: float
    mean_scale: float    # |M| at unit mu
    var_scale: float     # V at unit mu
    alpha2: float
    eve_density: float
    eve_radius: float

    @property
    def atom(self) -> float:
        """No-eavesdropper probability mass at gamma_E = 0 (finite radius)."""
        return math.exp(-self.eve_density * math.pi * self.eve_radius ** 2)


def dirichlet_ratio(delta: float, n_elements: int, spacing_ratio: float,
                    singular_tol: float = 1e-8) -> float:
    """Array-gain kernel sin(pi (d/l) sqrt(N) delta) / sin(pi (d/l) delta).

    At the zeros of the denominator the removable limit
    sqrt(N) cos(sqrt(N) A delta) / cos(A delta) is used (equals sqrt(N) at
    delta = 0); delta1 = delta2 = 0 is the legitimate aligned-eavesdropper
    configuration, not an error.
    """
    root = math.sqrt(n_elements)
    a = math.pi * spacing_ratio
    den = math.sin(a * delta)
    if abs(den) < singular_tol:
        return root * math.cos(root * a * delta) / math.cos(a * delta)
    return math.sin(root * a * delta) / den


def legit_model(cfg: SystemConfig) -> LegitSnrModel:
    """Moment-matched Gamma fit of the optimally combined user amplitude.

    Per-element Rician amplitude moments give
    k = N (pi/4) L^2 / (1 + eps - (pi/4) L^2) and
    theta = sqrt(K) sqrt(mu_D nu / (eps+1)) (1 + eps - (pi/4) L^2)
            / ((sqrt(pi)/2) L),
    with L = L_{1/2}(-eps).  The shape k does not depend on K.
    """
    eps = cfg.rician_eps
    L = laguerre_half(eps)
    pil2 = (math.pi / 4.0) * L * L
    denom = 1.0 + eps - pil2
    k = cfg.n_ris * pil2 / denom
    theta = (math.sqrt(cfg.n_tx) * math.sqrt(cfg.mu_d * cfg.nu / (eps + 1.0))
             * denom / ((math.sqrt(math.pi) / 2.0) * L))
    return LegitSnrModel(gamma_shape=k, gamma_scale=theta, rho_d=cfg.rho_d)


def eve_model(cfg: SystemConfig) -> EveSnrModel:
    """Aggregate eavesdropper-field constants for the configured geometry."""
    eps = cfg.rician_eps
    L = laguerre_half(eps)
    pil2 = (math.pi / 4.0) * (eps + 1.0) * L * L     # (pi/4)(eps+1) L^2
    scatter = 1.0 - eps * eps / pil2                 # -> 0 as eps -> inf
    if scatter < 1e-8:
        raise ValueError(
            "single-eavesdropper variance vanished (Rician factor too large "
            "for the Gaussian model); use the deterministic LoS limit instead")
    var_scale = cfg.n_ris * scatter
    d1 = (math.sin(cfg.psi_rd_a) * math.sin(cfg.psi_rd_e)
          - math.sin(cfg.psi_re_a) * math.sin(cfg.psi_re_e))
    d2 = math.cos(cfg.psi_rd_e) - math.cos(cfg.psi_re_e)
    ratio = abs(dirichlet_ratio(d1, cfg.n_ris, cfg.spacing_ratio)
                * dirichlet_ratio(d2, cfg.n_ris, cfg.spacing_ratio))
    mean_scale = math.sqrt(eps * eps / pil2) * ratio
    if eps > 0.0:
        varpi = (math.sqrt(2.0) * ratio
                 / math.sqrt(cfg.n_ris * (pil2 / (eps * eps) - 1.0)))
    else:
        varpi = 0.0
    xi = math.sqrt(2.0) / math.sqrt(
        cfg.n_ris * cfg.n_tx * cfg.nu * cfg.beta0 * cfg.rho_e
        * (1.0 - eps * eps / pil2))
    if varpi > 30.0:
        raise ValueError(
            f"noncentrality varpi={varpi:.2f} is far outside the quartic "
            "Marcum fit's sane range; the closed aggregate CDF would be "
            "meaningless for this reflection geometry")
    v = _poly(MARCUM_POLY_V, varpi)
    mu = _poly(MARCUM_POLY_MU, varpi)
    a2 = cfg.alpha2
    half_a2_mu = (a2 / 2.0) * mu
    t0 = (2.0 * math.pi * cfg.eve_density
          / (half_a2_mu * math.exp(4.0 * v / (a2 * mu)) * xi ** (4.0 / a2)))
    t1 = 2.0 / half_a2_mu
    t2 = math.exp(v) * xi ** mu * cfg.eve_radius ** half_a2_mu
    t3 = mu / 2.0
    t4 = 2.0 / a2
    return EveSnrModel(varpi=varpi, xi=xi, t0=t0, t1=t1, t2=t2, t3=t3, t4=t4,
                       delta1=d1, delta2=d2, mean_scale=mean_scale,
                       var_scale=var_scale, alpha2=a2,
                       eve_density=cfg.eve_density, eve_radius=cfg.eve_radius)


# -- legitimate user ---------------------------------------------------------

def cdf_gamma_d(model: LegitSnrModel, x) -> np.ndarray | float:
    """CDF of gamma_D: regularized gamma(k, sqrt(x/rho_d)/theta)."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("gamma_D CDF argument must be >= 0")
    out = gammainc(model.gamma_shape,
                   np.sqrt(x / model.rho_d) / model.gamma_scale)
    return float(out) if out.ndim == 0 else out


def pdf_gamma_d(model: LegitSnrModel, x) -> np.ndarray | float:
    """Density of gamma_D, evaluated in log space to survive large shape k.

    For shape k < 2 the density diverges as x -> 0+; the log-space form
    returns the correct (possibly huge but finite) value down to
    denormal-range arguments.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("gamma_D PDF argument must be > 0")
    k = model.gamma_shape
    with np.errstate(divide="ignore"):
        log_y = 0.5 * (np.log(x) - math.log(model.rho_d)) - math.log(model.gamma_scale)
        log_pdf = (k * log_y - np.exp(log_y) - gammaln(k)
                   - math.log(2.0) - np.log(x))
    out = np.exp(log_pdf)
    return float(out) if out.ndim == 0 else out


# -- single eavesdropper -----------------------------------------------------

def eve_pointwise_cdf(cfg: SystemConfig, r: float, x: float) -> float:
    """CDF of one eavesdropper's SNR at disk radius r: 1 - Q_1(varpi, b).

    b = Xi sqrt(x) r^{alpha2/2}; varpi and Xi come from the Gaussian model of
    the combining variable, so this is the noncentral-chi-squared CDF that
    the aggregate analysis integrates over the disk.
    """
    if not 0.0 < r <= cfg.eve_radius:
        raise ValueError(f"radius must lie in (0, {cfg.eve_radius}], got {r}")
    if x < 0:
        raise ValueError("SNR argument must be >= 0")
    model = eve_model(cfg)
    b = model.xi * math.sqrt(x) * r ** (cfg.alpha2 / 2.0)
    return 1.0 - marcum_q1(model.varpi, b)


# -- aggregate field ---------------------------------------------------------

def eve_aggregate_cdf_exact(cfg: SystemConfig, x: float,
                            epsabs: float = 1e-10, epsrel: float = 1e-8) -> float:
    """Aggregate CDF by the PPP generating functional with the exact Marcum.

    F(x) = exp[-2 pi lambda_e int_0^{r_e} Q_1(varpi, Xi sqrt(x) r^{a2/2}) r dr].
    """
    if x <= 0:
        raise ValueError("aggregate CDF argument must be > 0")
    model = eve_model(cfg)
    sx = math.sqrt(x)

    def integrand(r: float) -> float:
        return marcum_q1(model.varpi, model.xi * sx * r ** (cfg.alpha2 / 2.0)) * r

    val, err = quad(integrand, 0.0, cfg.eve_radius,
                    epsabs=epsabs, epsrel=epsrel, limit=400)
    if err > 1e-6 * max(val, 1.0):
        raise RuntimeError(f"disk quadrature did not converge (error {err:.2e})")
    return math.exp(-2.0 * math.pi * cfg.eve_density * val)


def _log_sf_closed(model: EveSnrModel, x, variant: str):
    """log of -log F for the closed aggregate CDF (elementwise)."""
    x = np.asarray(x, dtype=float)
    t0, t1, t2, t3, t4 = model.t0, model.t1, model.t2, model.t3, model.t4
    if variant == "infinite_re":
        inc = math.exp(gammaln(t1)) * np.ones_like(x)
    else:
        inc = gammainc(t1, t2 * x ** t3) * math.exp(gammaln(t1))
    return t0 * inc * x ** (-t4)


def eve_aggregate_cdf_closed(model: EveSnrModel, x,
                             variant: str = "finite_re") -> np.ndarray | float:
    """Closed-form aggregate CDF from the exponential Marcum fit.

    finite_re:   exp[-t0 (Gamma(t1) - Gamma(t1, t2 x^{t3})) / x^{t4}];
                 approaches the zero atom exp(-lambda_e pi r_e^2) as x -> 0+.
    infinite_re: exp[-t0 Gamma(t1) x^{-t4}] (unbounded disk limit).
    """
    if variant not in ("finite_re", "infinite_re"):
        raise ValueError(f"unknown variant {variant!r}")
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("aggregate CDF argument must be > 0")
    out = np.exp(-_log_sf_closed(model, x, variant))
    return float(out) if out.ndim == 0 else out


def eve_aggregate_pdf(model: EveSnrModel, x,
                      variant: str = "finite_re") -> np.ndarray | float:
    """Density of the absolutely continuous part of the aggregate SNR.

    finite_re: t0 x^{-t4-1} [t4 g(t1, t2 x^{t3}) - t3 (t2 x^{t3})^{t1}
               e^{-t2 x^{t3}}] exp[-t0 x^{-t4} g(t1, t2 x^{t3})]
    with g the lower incomplete gamma; integrates to 1 - atom.  The
    infinite_re variant is the Frechet density t0 t4 Gamma(t1) x^{-t4-1}
    exp(-t0 Gamma(t1) x^{-t4}), integrating to 1.
    """
    if variant not in ("finite_re", "infinite_re"):
        raise ValueError(f"unknown variant {variant!r}")
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("aggregate PDF argument must be > 0")
    t0, t1, t2, t3, t4 = model.t0, model.t1, model.t2, model.t3, model.t4
    expo = np.exp(-_log_sf_closed(model, x, variant))
    if variant == "infinite_re":
        out = t0 * t4 * math.exp(gammaln(t1)) * x ** (-t4 - 1.0) * expo
        return float(out) if out.ndim == 0 else out
    y = t2 * x ** t3
    lower = gammainc(t1, y) * math.exp(gammaln(t1))
    with np.errstate(divide="ignore", invalid="ignore"):
        spike = np.where(y > 0, np.exp(t1 * np.log(y) - y), 0.0)
    out = t0 * x ** (-t4 - 1.0) * (t4 * lower - t3 * spike) * expo
    out = np.maximum(out, 0.0)
    return float(out) if out.ndim == 0 else out
