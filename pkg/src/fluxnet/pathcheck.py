"""Time-integrated functionals along discretized paths.

All integrals use the midpoint rule on the path's own grid: interval ``i``
is evaluated at ``c_i* = (c_i + c_{i+1}) / 2`` with the interval's
piecewise-constant flux. Both sides of every inequality use the same rule.
Intervals whose endpoints or midpoint touch the boundary of the orthant
skip force-based terms and are listed in ``skipped``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BoundaryStart, ConditionViolated, GradientUndefined
from .kinetics import Equilibrium, free_energy, mass_action_rates, relative_residual, reversed_rates
from .ldcost import (
    entropic_cost,
    fisher_asym,
    fisher_sym,
    net_cost,
    phi,
    phi_star,
)
from .netcore import NetworkSpec, Path, transpose_flux

__all__ = [
    "Path",
    "FirReport",
    "InequalityReport",
    "ReversalReport",
    "validate_path",
    "cost_density",
    "integrate_cost",
    "fir_gap",
    "fir_asym_gap",
    "irreversible_work_bound",
    "time_reversal_residual",
    "integrated_time_reversal",
]

CONTINUITY_TOL = 1e-9


def validate_path(net: NetworkSpec, path: Path, tol: float = CONTINUITY_TOL) -> None:
    path.check_shape(net)
    if np.any(path.states < 0):
        raise ValueError("path has negative concentrations")
    res = path.continuity_residual(net)
    if res > tol:
        raise ValueError(f"path violates discrete continuity (residual {res:.3e})")


def _interval_rates(net, path, eq=None, reversed_=False):
    mids = path.midpoints
    if reversed_:
        if eq is None:
            raise ValueError("reversed rates need an equilibrium")
        return mids, np.array([reversed_rates(net, c, eq) for c in mids])
    return mids, np.array([mass_action_rates(net, c) for c in mids])


def _touching_boundary(path: Path) -> np.ndarray:
    s = path.states
    return np.any(s[:-1] <= 0, axis=1) | np.any(s[1:] <= 0, axis=1) | np.any(path.midpoints <= 0, axis=1)


def _reject_boundary_start(path: Path) -> None:
    if np.any(path.states[0] <= 0):
        raise BoundaryStart("path starts on the boundary of the orthant")


def cost_density(net: NetworkSpec, path: Path, mode: str = "forward", eq: Equilibrium | None = None) -> np.ndarray:
    """Per-interval cost rate; one-way ``S(j|kappa)`` if available, else ``L(c, jbar)``."""
    if mode not in ("forward", "reversed"):
        raise ValueError(f"unknown mode {mode!r}")
    validate_path(net, path)
    _, rates = _interval_rates(net, path, eq, mode == "reversed")
    out = np.empty(len(path.dt))
    for i, kap in enumerate(rates):
        if path.oneway_fluxes is not None:
            out[i] = entropic_cost(path.oneway_fluxes[i], kap)
        else:
            out[i] = net_cost(net, None, path.net_fluxes[i], kap)
    return out


def integrate_cost(net: NetworkSpec, path: Path, mode: str = "forward", eq: Equilibrium | None = None) -> float:
    """Midpoint-rule action ``sum_i cost(c_i*, flux_i) dt_i`` under forward or reversed rates."""
    return float((cost_density(net, path, mode, eq) * path.dt).sum())


def _jsonable(x):
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        v = float(arr)
        return v if np.isfinite(v) else None
    return [v if np.isfinite(v) else None for v in arr.tolist()]


@dataclass
class FirReport:
    action: float
    fisher_integral: float
    boundary: float
    gap: float
    intervals: dict = field(default_factory=dict)
    skipped: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "schema_version": "1",
            "action": _jsonable(self.action),
            "fisher_integral": _jsonable(self.fisher_integral),
            "boundary": _jsonable(self.boundary),
            "gap": _jsonable(self.gap),
            "intervals": {k: _jsonable(v) for k, v in self.intervals.items()},
            "skipped": list(self.skipped),
        }


def fir_gap(net: NetworkSpec, path: Path, eq: Equilibrium) -> FirReport:
    """``int L - int Fi_a^s - (I0(c(T)) - I0(c(0))) / 2`` with per-interval breakdown."""
    validate_path(net, path)
    _reject_boundary_start(path)
    mids, kap = _interval_rates(net, path)
    rev = np.array([reversed_rates(net, c, eq) for c in mids])
    dt = path.dt
    act = np.array([net_cost(net, None, jb, k) for jb, k in zip(path.net_fluxes, kap)]) * dt
    fis = np.array([fisher_sym(net, k, r) for k, r in zip(kap, rev)]) * dt
    I0 = np.array([free_energy(c, eq, gradient=False).value for c in path.states])
    bnd = 0.5 * np.diff(I0)
    gaps = act - fis - bnd
    skipped = np.flatnonzero(_touching_boundary(path)).tolist()
    return FirReport(
        action=float(act.sum()),
        fisher_integral=float(fis.sum()),
        boundary=float(0.5 * (I0[-1] - I0[0])),
        gap=float(act.sum() - fis.sum() - 0.5 * (I0[-1] - I0[0])),
        intervals={"action": act, "fisher": fis, "boundary": bnd, "gap": gaps},
        skipped=skipped,
    )


@dataclass
class InequalityReport:
    """``gap = rhs - lhs`` of an integrated inequality ``lhs <= rhs``."""

    lhs: float
    rhs: float
    gap: float
    intervals: np.ndarray
    skipped: list = field(default_factory=list)


def _asym_force(net, kappa, kappa_rev, interval):
    """``1/2 log(<-kappa_bw / kappa_bw)`` per forward pair, checking they vanish together."""
    m = net.fw_count
    rb, kb = kappa_rev[m:], kappa[m:]
    bad = np.flatnonzero((rb == 0) ^ (kb == 0))
    if bad.size:
        raise ConditionViolated(interval, int(bad[0]),
                                f"reversed and forward backward rates differ in support on interval {interval}, pair {bad[0]}")
    zero = kb == 0
    with np.errstate(divide="ignore"):
        return np.where(zero, 0.0, 0.5 * (np.log(np.where(zero, 1.0, rb)) - np.log(np.where(zero, 1.0, kb))))


def fir_asym_gap(net: NetworkSpec, path: Path, eq: Equilibrium) -> InequalityReport:
    """``int L + int F_asym . jbar - int Fi_s^a``, required to be ``>= 0``.

    Needs ``kappa_r`` and ``<-kappa_r`` to vanish together on every interval;
    a violation raises :class:`ConditionViolated` naming the interval and
    reaction.
    """
    validate_path(net, path)
    _reject_boundary_start(path)
    mids, kap = _interval_rates(net, path)
    skip = _touching_boundary(path)
    dt = path.dt
    gaps = np.zeros(len(dt))
    lhs = rhs = 0.0
    for i, (c, k) in enumerate(zip(mids, kap)):
        if skip[i]:
            continue
        rev = reversed_rates(net, c, eq)
        bad = np.flatnonzero((k == 0) ^ (rev == 0))
        if bad.size:
            raise ConditionViolated(i, int(bad[0]))
        Fa = _asym_force(net, k, rev, i)
        jb = path.net_fluxes[i]
        L = net_cost(net, None, jb, k)
        fi = fisher_asym(net, k, rev)
        lhs += fi * dt[i]
        rhs += (L + Fa @ jb) * dt[i]
        gaps[i] = (L + Fa @ jb - fi) * dt[i]
    return InequalityReport(float(lhs), float(rhs), float(gaps.sum()), gaps, np.flatnonzero(skip).tolist())


def irreversible_work_bound(net: NetworkSpec, path: Path, eq: Equilibrium) -> InequalityReport:
    """``int F_asym . jbar <= int Phi(c, jbar) + Phi*(c, F_asym)``."""
    validate_path(net, path)
    mids, kap = _interval_rates(net, path)
    skip = _touching_boundary(path)
    dt = path.dt
    gaps = np.zeros(len(dt))
    lhs = rhs = 0.0
    for i, (c, k) in enumerate(zip(mids, kap)):
        if skip[i]:
            continue
        Fa = _asym_force(net, k, reversed_rates(net, c, eq), i)
        jb = path.net_fluxes[i]
        w = Fa @ jb
        bound = phi(net, k, jb) + phi_star(net, k, Fa)
        lhs += w * dt[i]
        rhs += bound * dt[i]
        gaps[i] = (bound - w) * dt[i]
    return InequalityReport(float(lhs), float(rhs), float(gaps.sum()), gaps, np.flatnonzero(skip).tolist())


def time_reversal_residual(net: NetworkSpec, c, j, eq: Equilibrium) -> float:
    """Residual of ``S(j|kappa) - S(j^T|<-kappa) = grad I0 . Gamma j`` at an interior state.

    Scaled by ``1 + max(S(j|kappa), S(j^T|<-kappa), |grad I0 . Gamma j|)`` so
    cancellation between two large entropies does not inflate it.
    """
    c = np.asarray(c, dtype=float)
    j = np.asarray(j, dtype=float)
    grad = free_energy(c, eq).gradient
    s1 = entropic_cost(j, mass_action_rates(net, c))
    s2 = entropic_cost(transpose_flux(net, j), reversed_rates(net, c, eq))
    if not (np.isfinite(s1) and np.isfinite(s2)):
        raise ValueError("entropic costs must be finite")
    rhs = float(grad @ (net.gamma_matrix @ j))
    return abs((s1 - s2) - rhs) / (1.0 + max(s1, s2, abs(rhs)))


@dataclass
class ReversalReport:
    lhs: float
    rhs: float
    residual: float


def integrated_time_reversal(net: NetworkSpec, path: Path, eq: Equilibrium) -> ReversalReport:
    """Compare ``I0(c(0)) + int S(j|kappa)`` with ``I0(c(T)) + int S(j^T|<-kappa)``."""
    validate_path(net, path)
    if path.oneway_fluxes is None:
        raise ValueError("integrated time reversal needs one-way fluxes")
    _reject_boundary_start(path)
    if np.any(path.states <= 0):
        raise GradientUndefined("path leaves the interior")
    mids = path.midpoints
    dt = path.dt
    fwd = sum(entropic_cost(j, mass_action_rates(net, c)) * h for c, j, h in zip(mids, path.oneway_fluxes, dt))
    bwd = sum(entropic_cost(transpose_flux(net, j), reversed_rates(net, c, eq)) * h
              for c, j, h in zip(mids, path.oneway_fluxes, dt))
    lhs = free_energy(path.states[0], eq, gradient=False).value + fwd
    rhs = free_energy(path.states[-1], eq, gradient=False).value + bwd
    return ReversalReport(float(lhs), float(rhs), relative_residual(lhs, rhs))
