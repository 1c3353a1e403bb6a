"""Run configurations for sweeps and batch verification."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

DEFAULT_TOL = 1e-10
TOL_ENV = "FLUXNET_TOL"


def residual_tolerance(default: float = DEFAULT_TOL) -> float:
    """Identity tolerance, overridable through ``FLUXNET_TOL``."""
    raw = os.environ.get(TOL_ENV)
    if raw is None or raw.strip() == "":
        return default
    val = float(raw)
    if not (val > 0 and val < float("inf")):
        raise ValueError(f"{TOL_ENV} must be a positive finite number, got {raw!r}")
    return val


@dataclass
class VerifyConfig:
    samples: int = 100
    seed: int = 0
    tol: float = DEFAULT_TOL
    contraction_tol: float = 1e-8
    legendre_tol: float = 1e-6
    inequality_tol: float = 1e-6
    spread: float = 1.0
    path_intervals: int = 100
    n_paths: int | None = None  # default: max(2, samples // 10)
    kurtz_volumes: tuple = (1e2, 1e3, 1e4)
    kurtz_seeds: int = 5
    kurtz_T: float = 2.0


@dataclass
class SweepConfig:
    n_networks: int = 50
    states_per_network: int = 100
    seed: int = 20240601
    species: tuple = (2, 6)
    pairs: tuple = (1, 5)
    detailed_balance: bool = False


@dataclass
class FirSweepConfig:
    n_networks: int = 10
    paths_per_network: int = 20
    n_intervals: int = 200
    T: float = 1.0
    seed: int = 7
    amplitude: float = 0.5
    kernel_scale: float = 1.0


@dataclass
class KurtzConfig:
    kf: float = 1.0
    kb: float = 1.0
    c0: tuple = (2.0, 0.0)
    T: float = 5.0
    volumes: tuple = (1e2, 1e3, 1e4)
    seeds: tuple = field(default_factory=lambda: tuple(range(20)))
    n_eval: int = 2001


@dataclass
class ReversalLawConfig:
    kf: float = 1.0
    kb: float = 1.0
    ceq: tuple = (1.0, 1.0)
    V: float = 200.0
    T: float = 2.0
    n_traj: int = 10_000
    seed: int = 11
    alpha: float = 0.01
