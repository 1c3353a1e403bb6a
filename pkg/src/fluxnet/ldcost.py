"""Large-deviation cost at a single state.

Everything here is evaluated from rate vectors: ``kappa`` (forward model)
and ``kappa_rev`` (time-reversed model), both indexed over all reactions,
plus forward-indexed force or flux vectors. Mobility ``sigma_r`` is
``sqrt(kappa_r kappa_bw(r))``.

Conventions: ``0 log 0 = 0``; a pair with both rates zero has force 0 and
contributes nothing to any potential; a flux on a zero rate costs ``inf``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import kl_div

from .errors import WeakDBViolated
from .kinetics import Equilibrium, check_rate_relations, mass_action_rates, relative_residual, reversed_rates
from .netcore import NetworkSpec, net_of_oneway

__all__ = [
    "ForceDecomposition",
    "StateReport",
    "entropic_cost",
    "mobility",
    "net_cost",
    "net_cost_pairs",
    "net_cost_reversed",
    "optimal_oneway",
    "force",
    "force_split",
    "phi_star",
    "phi",
    "phi_star_modified",
    "pairing",
    "fisher_sym",
    "fisher_asym",
    "zero_cost_flux",
    "decomposition_residuals",
    "state_report",
]

# beyond this |zeta|, cosh is evaluated in log space
COSH_LOG_CUTOFF = 700.0


def entropic_cost(j, kappa) -> float:
    """Relative entropy ``sum j log(j/kappa) - j + kappa`` (``inf`` if ``j_r > 0 = kappa_r``)."""
    j = np.asarray(j, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    if np.any(j < 0) or np.any(kappa < 0):
        raise ValueError("fluxes and rates must be nonnegative")
    return float(kl_div(j, kappa).sum())


def mobility(net: NetworkSpec, kappa) -> np.ndarray:
    kappa = np.asarray(kappa, dtype=float)
    m = net.fw_count
    return np.sqrt(kappa[:m]) * np.sqrt(kappa[m:])


def optimal_oneway(net: NetworkSpec, jbar, kappa) -> np.ndarray:
    """Cheapest one-way flux with net flux ``jbar`` (minimiser of the contraction).

    Pairs with a vanishing rate are forced: the flux on the zero-rate
    reaction is zero when the sign of ``jbar`` allows it. Pairs where no
    finite-cost flux exists get ``nan`` entries.
    """
    jbar = np.asarray(jbar, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    m = net.fw_count
    kf, kb = kappa[:m], kappa[m:]
    s = np.sqrt(kf) * np.sqrt(kb)
    h = 0.5 * jbar
    root = np.hypot(h, s)
    with np.errstate(divide="ignore", invalid="ignore"):
        # cancellation-free branches: one side is h + root, the other sigma^2 / (h + root)
        jf = np.where(h >= 0, h + root, s * s / (root - h))
        jb = np.where(h >= 0, s * s / (root + h), root - h)
    deg = s == 0
    if np.any(deg):
        fwd_only = deg & (kf > 0)
        bwd_only = deg & (kb > 0)
        none = deg & (kf == 0) & (kb == 0)
        jf = np.where(fwd_only, np.where(jbar >= 0, jbar, np.nan), jf)
        jb = np.where(fwd_only, np.where(jbar >= 0, 0.0, np.nan), jb)
        jf = np.where(bwd_only, np.where(jbar <= 0, 0.0, np.nan), jf)
        jb = np.where(bwd_only, np.where(jbar <= 0, -jbar, np.nan), jb)
        jf = np.where(none, np.where(jbar == 0, 0.0, np.nan), jf)
        jb = np.where(none, np.where(jbar == 0, 0.0, np.nan), jb)
    return np.concatenate([jf, jb])


def net_cost_pairs(net: NetworkSpec, jbar, kappa) -> np.ndarray:
    """Per-pair contributions to the net-flux cost ``L(c, jbar)``."""
    kappa = np.asarray(kappa, dtype=float)
    j = optimal_oneway(net, jbar, kappa)
    m = net.fw_count
    bad = np.isnan(j[:m]) | np.isnan(j[m:])
    jj = np.where(np.isnan(j), 0.0, j)
    terms = kl_div(jj, kappa)
    out = terms[:m] + terms[m:]
    return np.where(bad, np.inf, out)


def net_cost(net: NetworkSpec, c, jbar, kappa=None) -> float:
    """Contracted cost ``inf { S(j | kappa) : j - j^T = jbar }`` in closed form."""
    if kappa is None:
        kappa = mass_action_rates(net, c)
    return float(net_cost_pairs(net, jbar, kappa).sum())


def net_cost_reversed(net: NetworkSpec, c, jbar, kappa_rev) -> float:
    return net_cost(net, c, jbar, kappa_rev)


def _half_log_ratio(num, den):
    with np.errstate(divide="ignore"):
        return 0.5 * (np.log(num) - np.log(den))


def force(net: NetworkSpec, kappa) -> np.ndarray:
    """Affinities ``F_r = 1/2 log(kappa_r / kappa_bw(r))`` over forward reactions."""
    kappa = np.asarray(kappa, dtype=float)
    m = net.fw_count
    kf, kb = kappa[:m], kappa[m:]
    zf, zb = kf == 0, kb == 0
    bad = np.flatnonzero(zf ^ zb)
    if bad.size:
        raise WeakDBViolated(bad.tolist(), "kappa ~ kappa_bw")
    both = zf & zb
    return np.where(both, 0.0, _half_log_ratio(np.where(both, 1.0, kf), np.where(both, 1.0, kb)))


@dataclass
class ForceDecomposition:
    F: np.ndarray
    F_sym: np.ndarray
    F_asym: np.ndarray
    weak_db_ok: np.ndarray
    sym_residual: Optional[float] = None


def force_split(net: NetworkSpec, kappa, kappa_rev, grad_I0=None) -> ForceDecomposition:
    """Split ``F = F_sym + F_asym`` using the reversed rates.

    ``F_sym_r = 1/2 log(kappa_r / <-kappa_bw(r))`` and
    ``F_asym_r = 1/2 log(<-kappa_bw(r) / kappa_bw(r))``. Needs, per forward
    pair, that ``kappa_r``, ``<-kappa_bw(r)`` and ``kappa_bw(r)`` vanish
    together. If ``grad_I0`` is given, ``sym_residual`` compares ``F_sym``
    with ``-1/2 Gamma^T grad I0``.
    """
    kappa = np.asarray(kappa, dtype=float)
    kappa_rev = np.asarray(kappa_rev, dtype=float)
    m = net.fw_count
    kf, kb = kappa[:m], kappa[m:]
    rb = kappa_rev[m:]  # <-kappa_bw(r) for forward r
    z = np.vstack([kf == 0, rb == 0, kb == 0])
    ok = np.all(z, axis=0) | ~np.any(z, axis=0)
    if not np.all(ok):
        bad = np.flatnonzero(~ok).tolist()
        if np.any((z[0] ^ z[2])[~ok]):
            cond = "kappa ~ kappa_bw"
        else:
            cond = "kappa ~ reversed kappa_bw"
        raise WeakDBViolated(bad, cond)
    zero = z[0]
    one = np.ones(m)
    F = np.where(zero, 0.0, _half_log_ratio(np.where(zero, one, kf), np.where(zero, one, kb)))
    Fs = np.where(zero, 0.0, _half_log_ratio(np.where(zero, one, kf), np.where(zero, one, rb)))
    Fa = np.where(zero, 0.0, _half_log_ratio(np.where(zero, one, rb), np.where(zero, one, kb)))
    res = None
    if grad_I0 is not None:
        target = -0.5 * (net.gamma_fw.T @ np.asarray(grad_I0, dtype=float))
        res = relative_residual(np.where(zero, target, Fs), target)
    return ForceDecomposition(F, Fs, Fa, ok, res)


def _cosh_m1_scaled(weight, z):
    """``weight * (cosh z - 1)`` elementwise, stable near 0 and for huge ``|z|``."""
    z = np.asarray(z, dtype=float)
    weight = np.asarray(weight, dtype=float)
    az = np.abs(z)
    big = az > COSH_LOG_CUTOFF
    small = np.where(big, 0.0, z)
    out = weight * 2.0 * np.sinh(0.5 * small) ** 2
    if np.any(big):
        with np.errstate(divide="ignore", over="ignore"):
            logv = np.log(np.where(weight > 0, weight, 1.0)) + az - np.log(2.0)
            val = np.where(weight > 0, np.exp(np.minimum(logv, 1e4)), 0.0)
        out = np.where(big, val, out)
    return out


def phi_star(net: NetworkSpec, kappa, zeta) -> float:
    """Dual dissipation potential ``2 sum sigma_r (cosh zeta_r - 1)``."""
    sigma = mobility(net, kappa)
    return float(_cosh_m1_scaled(2.0 * sigma, zeta).sum())


def phi(net: NetworkSpec, kappa, jbar) -> float:
    """Primal dissipation potential, the Legendre dual of :func:`phi_star`.

    Per pair, with ``s = jbar / (2 sigma)``:
    ``2 sigma (s asinh s - sqrt(1 + s^2) + 1)``; ``inf`` if ``sigma = 0 != jbar``.
    """
    sigma = mobility(net, kappa)
    jbar = np.asarray(jbar, dtype=float)
    pos = sigma > 0
    s = np.where(pos, jbar / np.where(pos, 2.0 * sigma, 1.0), 0.0)
    root = np.sqrt(1.0 + s * s)
    # sqrt(1+s^2) - 1 = s^2 / (sqrt(1+s^2) + 1), avoids cancellation for small s
    val = 2.0 * sigma * (s * np.arcsinh(s) - s * s / (root + 1.0))
    val = np.where(pos, val, np.where(jbar == 0, 0.0, np.inf))
    return float(val.sum())


def phi_star_modified(net: NetworkSpec, kappa, zeta, xi) -> float:
    """``2 sum sigma_r cosh(zeta_r) (cosh(xi_r) - 1)``."""
    sigma = mobility(net, kappa)
    zeta = np.asarray(zeta, dtype=float)
    return float(_cosh_m1_scaled(2.0 * sigma * np.cosh(zeta), xi).sum())


def pairing(net: NetworkSpec, kappa, xi, zeta) -> float:
    """Nonlinear pairing ``4 sum sigma_r sinh(xi_r) sinh(zeta_r)``."""
    sigma = mobility(net, kappa)
    return float((4.0 * sigma * np.sinh(np.asarray(xi, float)) * np.sinh(np.asarray(zeta, float))).sum())


def fisher_sym(net: NetworkSpec, kappa, kappa_rev) -> float:
    """``1/2 sum_r (sqrt kappa_r - sqrt <-kappa_bw(r))^2`` over all reactions."""
    kappa = np.asarray(kappa, dtype=float)
    kappa_rev = np.asarray(kappa_rev, dtype=float)
    d = np.sqrt(kappa) - np.sqrt(kappa_rev[net.bw_index])
    return float(0.5 * (d * d).sum())


def fisher_asym(net: NetworkSpec, kappa, kappa_rev) -> float:
    """``1/2 sum_r (sqrt kappa_r - sqrt <-kappa_r)^2``; zero under detailed balance."""
    d = np.sqrt(np.asarray(kappa, dtype=float)) - np.sqrt(np.asarray(kappa_rev, dtype=float))
    return float(0.5 * (d * d).sum())


def zero_cost_flux(net: NetworkSpec, kappa) -> np.ndarray:
    """Flux response ``2 sigma sinh(F)`` to the force field."""
    F = force(net, kappa)
    return 2.0 * mobility(net, kappa) * np.sinh(F)


def decomposition_residuals(net: NetworkSpec, kappa, kappa_rev, jbar, grad_I0) -> dict:
    """Relative residuals of every force/dissipation identity at one state.

    Keys:
      force_structure     L = Phi + Phi*(F) - F.jbar
      fisher_sym_split    Phi*(F) = Phi*_{Fa}(Fs) + Phi*(Fa)
      fisher_asym_split   Phi*(F) = Phi*(Fs) + Phi*_{Fs}(Fa)
      cost_sym_split      L expanded around (Fa, Fs) incl. 1/2 grad I0 . Gamma jbar
      cost_asym_split     L expanded around (Fs, Fa)
      dual_split_sym      Phi*(xi+zeta) = Phi*_zeta(xi) + <xi,zeta> + Phi*(zeta)
      dual_split_asym     Phi*(xi+zeta) = Phi*(xi) + <xi,zeta> + Phi*_xi(zeta)
      pairing_difference  <xi,zeta> = Phi*(xi+zeta) - Phi*(xi-zeta)
      orthogonality       <Fs, Fa> relative to 1 + 4 sum sigma |sinh Fs| |sinh Fa|
      fisher_sym_closed   Fi_a^s = Phi*_{Fa}(Fs)
      fisher_asym_closed  Fi_s^a = Phi*_{Fs}(Fa)
      sym_gradient        Fs = -1/2 Gamma^T grad I0
      force_sum           F + <-F = -Gamma^T grad I0
      potential_reversal  Phi*(F) = Phi*(<-F) and sigma = <-sigma

    (xi, zeta) = (F_sym, F_asym) throughout.
    """
    kappa = np.asarray(kappa, dtype=float)
    kappa_rev = np.asarray(kappa_rev, dtype=float)
    jbar = np.asarray(jbar, dtype=float)
    grad = np.asarray(grad_I0, dtype=float)
    dec = force_split(net, kappa, kappa_rev, grad)
    F, Fs, Fa = dec.F, dec.F_sym, dec.F_asym
    F_rev = force(net, kappa_rev)
    sigma = mobility(net, kappa)
    L = net_cost(net, None, jbar, kappa)
    Ph = phi(net, kappa, jbar)
    PsF = phi_star(net, kappa, F)
    PsFs = phi_star(net, kappa, Fs)
    PsFa = phi_star(net, kappa, Fa)
    mod_a_s = phi_star_modified(net, kappa, Fa, Fs)
    mod_s_a = phi_star_modified(net, kappa, Fs, Fa)
    pair = pairing(net, kappa, Fs, Fa)
    half_work = 0.5 * float(grad @ (net.gamma_fw @ jbar))
    fis = fisher_sym(net, kappa, kappa_rev)
    fia = fisher_asym(net, kappa, kappa_rev)
    r = relative_residual
    return {
        "force_structure": r(L, Ph + PsF - F @ jbar),
        "fisher_sym_split": r(PsF, mod_a_s + PsFa),
        "fisher_asym_split": r(PsF, PsFs + mod_s_a),
        "cost_sym_split": r(L, Ph + PsFa - Fa @ jbar + mod_a_s + half_work),
        "cost_asym_split": r(L, Ph + PsFs + half_work + mod_s_a - Fa @ jbar),
        "dual_split_sym": r(phi_star(net, kappa, Fs + Fa), mod_a_s + pair + PsFa),
        "dual_split_asym": r(phi_star(net, kappa, Fs + Fa), PsFs + pair + mod_s_a),
        "pairing_difference": r(pair, phi_star(net, kappa, Fs + Fa) - phi_star(net, kappa, Fs - Fa)),
        "orthogonality": abs(pair) / (1.0 + float((4 * sigma * np.abs(np.sinh(Fs)) * np.abs(np.sinh(Fa))).sum())),
        "fisher_sym_closed": r(fis, mod_a_s),
        "fisher_asym_closed": r(fia, mod_s_a),
        "sym_gradient": dec.sym_residual,
        "force_sum": r(F + F_rev, -(net.gamma_fw.T @ grad)),
        "potential_reversal": max(r(PsF, phi_star(net, kappa_rev, F_rev)), r(sigma, mobility(net, kappa_rev))),
    }


def _jsonable(x):
    if x is None:
        return None
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        v = float(arr)
        return v if np.isfinite(v) else None
    return [v if np.isfinite(v) else None for v in arr.tolist()]


@dataclass
class StateReport:
    kappa: np.ndarray
    kappa_rev: np.ndarray
    sigma: np.ndarray
    F: Optional[np.ndarray]
    F_sym: Optional[np.ndarray]
    F_asym: Optional[np.ndarray]
    fisher_sym: float
    fisher_asym: float
    phi_star_F: Optional[float]
    residuals: dict = field(default_factory=dict)
    weak_db_violation: Optional[str] = None

    @property
    def forces_defined(self) -> bool:
        return self.weak_db_violation is None

    def to_json(self) -> dict:
        return {
            "schema_version": "1",
            "kappa": _jsonable(self.kappa),
            "kappa_rev": _jsonable(self.kappa_rev),
            "sigma": _jsonable(self.sigma),
            "F": _jsonable(self.F),
            "F_sym": _jsonable(self.F_sym),
            "F_asym": _jsonable(self.F_asym),
            "fisher_sym": _jsonable(self.fisher_sym),
            "fisher_asym": _jsonable(self.fisher_asym),
            "phi_star_F": _jsonable(self.phi_star_F),
            "forces_defined": self.forces_defined,
            "weak_db_violation": self.weak_db_violation,
            "residuals": _jsonable(self.residuals),
        }


def state_report(net: NetworkSpec, c, eq: Equilibrium) -> StateReport:
    """Rates, forces, Fisher informations and identity residuals at ``c``.

    Forces are left undefined (``None``) at states violating the vanishing
    compatibility; the Fisher informations are always reported. Identity
    residuals are evaluated at the zero-cost flux ``kappa_fw - kappa_bw``.
    """
    c = np.asarray(c, dtype=float)
    kap = mass_action_rates(net, c)
    rev = reversed_rates(net, c, eq)
    rep = StateReport(
        kappa=kap, kappa_rev=rev, sigma=mobility(net, kap), F=None, F_sym=None, F_asym=None,
        fisher_sym=fisher_sym(net, kap, rev), fisher_asym=fisher_asym(net, kap, rev), phi_star_F=None,
    )
    interior = bool(np.all(c > 0))
    if interior:
        rep.residuals.update({f"rate_{k}": v for k, v in check_rate_relations(net, c, eq).items()})
    try:
        dec = force_split(net, kap, rev, np.log(c / eq.c_eq) if interior else None)
    except WeakDBViolated as e:
        rep.weak_db_violation = str(e)
        try:
            rep.F = force(net, kap)
            rep.phi_star_F = phi_star(net, kap, rep.F)
        except WeakDBViolated:
            pass
        return rep
    rep.F, rep.F_sym, rep.F_asym = dec.F, dec.F_sym, dec.F_asym
    rep.phi_star_F = phi_star(net, kap, dec.F)
    if interior:
        rep.residuals.update(decomposition_residuals(net, kap, rev, net_of_oneway(net, kap), np.log(c / eq.c_eq)))
    return rep
