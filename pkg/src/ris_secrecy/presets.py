"""Built-in configurations and JSON config I/O.

The two reference setups mirror the published simulation captions.  The
captions pin the geometry, densities and eavesdropper-side SNR but leave the
1 m reference path loss and the departure angles unstated; the values below
are the toolkit's documented defaults and every emitted sidecar records
them.  Config files carry angles in degrees for readability; the in-memory
representation is radians.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict
from pathlib import Path

from .channel import SystemConfig

__all__ = [
    "fig3_config",
    "fig7_config",
    "config_to_dict",
    "config_from_dict",
    "load_config",
    "save_config",
]

_ANGLE_FIELDS = (
    "phi_sr_a", "phi_sr_e", "psi_sr_a", "psi_sr_e",
    "psi_rd_a", "psi_rd_e", "psi_re_a", "psi_re_e",
)


def fig3_config(n_ris: int = 64, n_tx: int = 16, rho_d_db: float = 30.0) -> SystemConfig:
    """SOP-vs-rho_d setup: alpha1=alpha2=2, eps=2, d_SR=30 m, d_RD=40 m,
    r_e=200 m, lambda_e=1e-3, C_th=0.05 nats, rho_e=30 dB."""
    cfg = SystemConfig(
        n_ris=n_ris, n_tx=n_tx,
        d_sr=30.0, d_rd=40.0,
        alpha1=2.0, alpha2=2.0,
        rician_eps=2.0,
        eve_density=1e-3, eve_radius=200.0,
        c_th=0.05,
    )
    return cfg.with_rho_d_db(rho_d_db).with_rho_e_db(30.0)


def fig7_config(alpha2: float = 2.0, rho_d_db: float = 80.0) -> SystemConfig:
    """Diversity-order setup: K=N=16, alpha1=2, variable alpha2,
    rho_e=60 dB, otherwise as :func:`fig3_config`."""
    cfg = SystemConfig(
        n_ris=16, n_tx=16,
        d_sr=30.0, d_rd=40.0,
        alpha1=2.0, alpha2=alpha2,
        rician_eps=2.0,
        eve_density=1e-3, eve_radius=200.0,
        c_th=0.05,
    )
    return cfg.with_rho_d_db(rho_d_db).with_rho_e_db(60.0)


def config_to_dict(cfg: SystemConfig) -> dict:
    """JSON-ready dict with angles converted to degrees."""
    d = asdict(cfg)
    for f in _ANGLE_FIELDS:
        d[f] = math.degrees(d[f])
    return d


def config_from_dict(d: dict) -> SystemConfig:
    """Inverse of :func:`config_to_dict`; unknown keys are rejected."""
    d = dict(d)
    allowed = set(SystemConfig.__dataclass_fields__)
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    for f in _ANGLE_FIELDS:
        if f in d:
            d[f] = math.radians(d[f])
    return SystemConfig(**d)


def load_config(path: str | Path) -> SystemConfig:
    with open(path) as fh:
        return config_from_dict(json.load(fh))


def save_config(cfg: SystemConfig, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(config_to_dict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")
