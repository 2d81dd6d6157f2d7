"""System geometry, channel sampling, optimal reflection phases, per-draw SNRs.

The transmitter-to-surface link is pure line-of-sight (a rank-1 outer product
of planar array responses); the surface-to-ground links are Rician.  All
element indexing on the planar array is row-major: element n maps to grid
coordinates (x, y) = (n // sqrt(Z), n % sqrt(Z)).
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, asdict, replace as dc_replace
from fractions import Fraction

import numpy as np

__all__ = [
    "SystemConfig",
    "ChannelRealization",
    "EveSample",
    "InternalConsistencyError",
    "array_response",
    "sample_rician_vector",
    "optimal_phase_shifts",
    "sample_ppp_disk",
    "sample_realization",
    "snr_legit",
    "snr_eve",
]


class InternalConsistencyError(AssertionError):
    """Two mathematically equivalent computation paths disagreed.

    This always signals an indexing or bookkeeping bug, never a numerical
    tolerance issue.
    """


def _is_perfect_square(n: int) -> bool:
    r = math.isqrt(n)
    return r * r == n


@dataclass(frozen=True)
class SystemConfig:
    """All physical and geometric parameters of the wiretap system.

    Angles are radians.  Powers are watts (linear).  ``alpha2`` must be a
    rational number; it is reduced internally for the closed-form machinery.
    """

    n_ris: int               # reflecting elements N (perfect square)
    n_tx: int                # transmit antennas K (perfect square)
    d_sr: float              # transmitter -> surface distance [m]
    d_rd: float              # surface -> legitimate user distance [m]
    alpha1: float            # path-loss exponent of the S-RIS link
    alpha2: float            # path-loss exponent of the RIS-ground links
    rician_eps: float        # Rician factor of the RIS-ground links
    beta0: float = 1e-3      # path loss at 1 m (linear)
    eve_density: float = 1e-3    # eavesdropper PPP density [1/m^2]
    eve_radius: float = 200.0    # eavesdropper disk radius [m]
    p_tx: float = 1.0        # transmit power [W]
    noise_d: float = 1e-3    # noise power at the legitimate user [W]
    noise_e: float = 1e-3    # noise power at the eavesdroppers [W]
    spacing_ratio: float = 0.5   # element spacing over wavelength d/lambda
    c_th: float = 0.05       # target secrecy rate [nats]
    # reference angles (radians): transmitter AoA at the surface, AoD at the
    # transmitter, AoD toward the user, AoD toward the reference eavesdropper
    phi_sr_a: float = math.radians(20.0)
    phi_sr_e: float = math.radians(60.0)
    psi_sr_a: float = math.radians(-15.0)
    psi_sr_e: float = math.radians(85.0)
    psi_rd_a: float = math.radians(30.0)
    psi_rd_e: float = math.radians(70.0)
    psi_re_a: float = math.radians(120.0)
    psi_re_e: float = math.radians(20.0)

    def __post_init__(self):
        if self.n_ris < 1 or not _is_perfect_square(self.n_ris):
            raise ValueError(f"n_ris must be a positive perfect square, got {self.n_ris}")
        if self.n_tx < 1 or not _is_perfect_square(self.n_tx):
            raise ValueError(f"n_tx must be a positive perfect square, got {self.n_tx}")
        if self.d_sr <= 0 or self.d_rd <= 0:
            raise ValueError("distances must be positive")
        if self.alpha1 < 2:
            raise ValueError(f"alpha1 must be >= 2, got {self.alpha1}")
        if self.alpha2 <= 0:
            raise ValueError(f"alpha2 must be positive, got {self.alpha2}")
        if self.rician_eps < 0:
            raise ValueError(f"rician_eps must be >= 0, got {self.rician_eps}")
        if self.beta0 <= 0:
            raise ValueError(f"beta0 must be positive, got {self.beta0}")
        if self.eve_density < 0:
            raise ValueError(f"eve_density must be >= 0, got {self.eve_density}")
        if self.eve_radius <= 0:
            raise ValueError(f"eve_radius must be positive, got {self.eve_radius}")
        if self.p_tx <= 0 or self.noise_d <= 0 or self.noise_e <= 0:
            raise ValueError("p_tx, noise_d, noise_e must be positive")
        if self.spacing_ratio <= 0:
            raise ValueError(f"spacing_ratio must be positive, got {self.spacing_ratio}")
        if self.c_th < 0:
            raise ValueError(f"c_th must be >= 0, got {self.c_th}")

    # -- derived quantities -------------------------------------------------

    @property
    def rho_d(self) -> float:
        """Transmit SNR toward the legitimate user, P_T / sigma_D^2."""
        return self.p_tx / self.noise_d

    @property
    def rho_e(self) -> float:
        """Transmit SNR toward the eavesdroppers, P_T / sigma_E^2."""
        return self.p_tx / self.noise_e

    @property
    def nu(self) -> float:
        """Large-scale fade of the transmitter-surface link."""
        return self.beta0 * self.d_sr ** (-self.alpha1)

    @property
    def mu_d(self) -> float:
        """Large-scale fade of the surface-user link."""
        return self.beta0 * self.d_rd ** (-self.alpha2)

    def alpha2_fraction(self, max_denominator: int = 128) -> Fraction:
        """alpha2 as a reduced rational p/q."""
        frac = Fraction(self.alpha2).limit_denominator(max_denominator)
        if abs(float(frac) - self.alpha2) > 1e-9 * self.alpha2:
            raise ValueError(
                f"alpha2={self.alpha2} is not a rational with denominator "
                f"<= {max_denominator}")
        return frac

    def replace(self, **kwargs) -> "SystemConfig":
        return dc_replace(self, **kwargs)

    def with_rho_d_db(self, rho_db: float) -> "SystemConfig":
        """Same system with the legitimate-user transmit SNR set in dB."""
        return self.replace(noise_d=self.p_tx / 10.0 ** (rho_db / 10.0))

    def with_rho_e_db(self, rho_db: float) -> "SystemConfig":
        return self.replace(noise_e=self.p_tx / 10.0 ** (rho_db / 10.0))

    def config_hash(self) -> str:
        payload = json.dumps(asdict(self), sort_keys=True, default=float)
        return hashlib.sha256(payload.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class EveSample:
    """One eavesdropper position draw with its sampled channel."""

    radius: float
    azimuth: float
    elevation: float
    h_re: np.ndarray


@dataclass(frozen=True)
class ChannelRealization:
    """One full draw: LoS transmit matrix, user channel, eavesdropper set."""

    h_sr: np.ndarray          # N x K, rank 1, entries of magnitude sqrt(nu)
    h_rd: np.ndarray          # N
    eves: tuple[EveSample, ...]
    seed: int


def array_response(z: int, azimuth: float, elevation: float,
                   spacing_ratio: float) -> np.ndarray:
    """Planar array response vector of a sqrt(z) x sqrt(z) array.

    Entry n, at grid position (x, y) = (n // sqrt(z), n % sqrt(z)), equals
    exp(j 2 pi (d/lambda) (x sin(az) sin(el) + y cos(el))).  All entries have
    unit modulus.
    """
    root = math.isqrt(z)
    if root * root != z or z < 1:
        raise ValueError(f"array size must be a positive perfect square, got {z}")
    n = np.arange(z)
    x = n // root
    y = n % root
    phase = 2.0 * math.pi * spacing_ratio * (
        x * math.sin(azimuth) * math.sin(elevation) + y * math.cos(elevation))
    return np.exp(1j * phase)


def sample_rician_vector(mu: float, eps: float, los: np.ndarray,
                         rng: np.random.Generator) -> np.ndarray:
    """Rician channel draw sqrt(mu) (sqrt(eps/(eps+1)) los + sqrt(1/(eps+1)) w).

    ``w`` has i.i.d. standard complex Gaussian entries, so each output entry
    has second moment mu.
    """
    n = len(los)
    w = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / math.sqrt(2.0)
    return math.sqrt(mu) * (math.sqrt(eps / (eps + 1.0)) * los
                            + math.sqrt(1.0 / (eps + 1.0)) * w)


def optimal_phase_shifts(h_rd: np.ndarray, a_n_sr: np.ndarray) -> np.ndarray:
    """Reflection phases maximizing the user's received power under MRT.

    theta_n = -angle(conj(h_rd[n]) * a_n_sr[n]); with these phases the
    cascaded scalar sum_n e^{j theta_n} conj(h_rd[n]) a_n_sr[n] is real and
    equals sum_n |h_rd[n]| when the array response has unit modulus.
    Entries where the product vanishes get phase 0 by convention.
    """
    if len(h_rd) != len(a_n_sr):
        raise ValueError("h_rd and a_n_sr must have the same length")
    prod = np.conj(h_rd) * a_n_sr
    return np.where(np.abs(prod) == 0.0, 0.0, -np.angle(prod))


def sample_ppp_disk(density: float, radius: float,
                    rng: np.random.Generator) -> list[tuple[float, float]]:
    """Homogeneous PPP on a disk; returns (radial distance, azimuth) pairs.

    The count is Poisson(density * pi * radius^2); conditioned on the count,
    points are uniform on the disk (radius via inverse CDF r = R sqrt(u)).
    """
    if density < 0:
        raise ValueError("density must be >= 0")
    if radius <= 0:
        raise ValueError("radius must be positive")
    count = rng.poisson(density * math.pi * radius * radius)
    r = radius * np.sqrt(rng.random(count))
    az = rng.uniform(0.0, 2.0 * math.pi, count)
    return list(zip(r.tolist(), az.tolist()))


def sample_realization(cfg: SystemConfig, rng: np.random.Generator,
                       angle_mode: str = "angle_locked",
                       seed: int = -1) -> ChannelRealization:
    """Draw one full channel realization.

    angle_mode 'angle_locked': every eavesdropper uses the configured
    reference departure angles (the convention the aggregate analysis
    assumes).  'geometric': the departure azimuth is the sampled position's
    azimuth, elevation stays at the configured reference.
    """
    if angle_mode not in ("angle_locked", "geometric"):
        raise ValueError(f"unknown angle_mode {angle_mode!r}")
    a_n = array_response(cfg.n_ris, cfg.phi_sr_a, cfg.phi_sr_e, cfg.spacing_ratio)
    a_k = array_response(cfg.n_tx, cfg.psi_sr_a, cfg.psi_sr_e, cfg.spacing_ratio)
    h_sr = math.sqrt(cfg.nu) * np.outer(a_n, np.conj(a_k))
    los_rd = array_response(cfg.n_ris, cfg.psi_rd_a, cfg.psi_rd_e, cfg.spacing_ratio)
    h_rd = sample_rician_vector(cfg.mu_d, cfg.rician_eps, los_rd, rng)
    eves = []
    for r, az in sample_ppp_disk(cfg.eve_density, cfg.eve_radius, rng):
        el = cfg.psi_re_e
        az_dep = cfg.psi_re_a if angle_mode == "angle_locked" else az
        los_re = array_response(cfg.n_ris, az_dep, el, cfg.spacing_ratio)
        mu_e = cfg.beta0 * r ** (-cfg.alpha2)
        h_re = sample_rician_vector(mu_e, cfg.rician_eps, los_re, rng)
        eves.append(EveSample(radius=r, azimuth=az_dep, elevation=el, h_re=h_re))
    return ChannelRealization(h_sr=h_sr, h_rd=h_rd, eves=tuple(eves), seed=seed)


def _cascade_gain(cfg: SystemConfig, real: ChannelRealization,
                  h_rx: np.ndarray) -> float:
    """|h_rx^H Theta* H_SR f|^2 through the full matrix product (MRT f)."""
    a_n = array_response(cfg.n_ris, cfg.phi_sr_a, cfg.phi_sr_e, cfg.spacing_ratio)
    theta = optimal_phase_shifts(real.h_rd, a_n)
    phases = np.exp(1j * theta)
    g_d = np.conj(real.h_sr).T @ (np.conj(phases) * real.h_rd)  # g_D = (g_D^H)^H
    norm = np.linalg.norm(g_d)
    if norm == 0.0:
        return 0.0
    f = g_d / norm
    rx = (np.conj(h_rx) * phases) @ real.h_sr @ f
    return float(np.abs(rx) ** 2)


def snr_legit(cfg: SystemConfig, real: ChannelRealization) -> float:
    """Legitimate-user SNR rho_d |A|^2 under optimal phases and MRT.

    Computed two ways -- the full cascaded product and the simplified
    amplitude sum sqrt(K nu) sum_n |h_rd[n]| -- and cross-checked to 1e-9
    relative.  A mismatch raises InternalConsistencyError.
    """
    amp = math.sqrt(cfg.n_tx * cfg.nu) * float(np.sum(np.abs(real.h_rd)))
    simplified = cfg.rho_d * amp * amp
    cascaded = cfg.rho_d * _cascade_gain(cfg, real, real.h_rd)
    scale = max(simplified, cascaded, 1e-300)
    if abs(simplified - cascaded) > 1e-9 * scale:
        raise InternalConsistencyError(
            f"legitimate SNR paths disagree: simplified={simplified!r} "
            f"cascaded={cascaded!r}")
    return simplified


def snr_eve(cfg: SystemConfig, real: ChannelRealization, eve_index: int) -> float:
    """Eavesdropper SNR rho_e K nu |Z|^2 with the user-optimal phases.

    Z = sum_n conj(h_re[n]) e^{-j angle(conj(h_rd[n]))}; validated against
    the full cascaded product like :func:`snr_legit`.
    """
    eve = real.eves[eve_index]
    z = np.sum(np.conj(eve.h_re) * np.exp(1j * np.angle(real.h_rd)))
    simplified = cfg.rho_e * cfg.n_tx * cfg.nu * float(np.abs(z) ** 2)
    cascaded = cfg.rho_e * _cascade_gain(cfg, real, eve.h_re)
    scale = max(simplified, cascaded, 1e-300)
    if abs(simplified - cascaded) > 1e-9 * scale:
        raise InternalConsistencyError(
            f"eavesdropper SNR paths disagree: simplified={simplified!r} "
            f"cascaded={cascaded!r}")
    return simplified
