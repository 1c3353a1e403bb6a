"""Mass-action rates, CME propensities, equilibria, free energy and reversed rates.

The free energy is the relative entropy with respect to a positive
equilibrium, ``I0(c) = sum c log(c/c_eq) - c + c_eq``. With that choice the
reversed rates are again of mass-action form: the reverse of ``r`` is the
reaction ``bw(r)`` with rate constant ``omega_r * c_eq**(alpha_r - beta_r)``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import lgamma

import numpy as np
from scipy import integrate, linalg

from .errors import GradientUndefined, NoPositiveEquilibrium, StepSizeTooLarge
from .netcore import NetworkSpec, Path, conservation_laws, net_of_oneway

log = logging.getLogger(__name__)

__all__ = [
    "Equilibrium",
    "FreeEnergy",
    "mass_action_rates",
    "cme_propensities",
    "find_equilibrium",
    "free_energy",
    "reversed_omega",
    "reversed_network",
    "reversed_rates",
    "check_rate_relations",
    "detailed_balance_check",
    "ode_solve",
    "relative_residual",
]


def relative_residual(a, b) -> float:
    """``|a - b| / (1 + max(|a|, |b|))``, maximised over entries."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.size == 0:
        return 0.0
    return float(np.max(np.abs(a - b) / (1.0 + np.maximum(np.abs(a), np.abs(b)))))


def _monomial(c: np.ndarray, expo: np.ndarray) -> np.ndarray:
    # prod_y c_y**expo[r, y] with 0**0 = 1; c may carry leading batch axes
    c = np.asarray(c, dtype=float)
    e = expo.astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logc = np.log(c)
        # zero exponents must not multiply log(0) = -inf
        terms = np.where(e == 0, 0.0, logc[..., None, :] * e)
    return np.exp(terms.sum(axis=-1))


def mass_action_rates(net: NetworkSpec, c) -> np.ndarray:
    """``kappa_r(c) = omega_r prod_y c_y**alpha_ry`` for every reaction."""
    c = np.asarray(c, dtype=float)
    if np.any(c < 0):
        raise ValueError("concentrations must be nonnegative")
    return net.omega * _monomial(c, net.alpha)


def cme_propensities(net: NetworkSpec, n, V: float) -> np.ndarray:
    """Combinatorial propensities ``omega V prod_y V**-alpha alpha! binom(n_y, alpha)``.

    ``n`` holds integer copy numbers (``c = n / V``).
    """
    n = np.asarray(n)
    if V <= 0:
        raise ValueError("volume must be positive")
    out = np.empty(net.n_reactions)
    for r in range(net.n_reactions):
        k = net.omega[r] * V
        for y in range(net.n_species):
            a = int(net.alpha[r, y])
            if a == 0:
                continue
            ny = int(n[y])
            if ny < a:
                k = 0.0
                break
            # falling factorial n (n-1) ... (n-a+1)
            k *= np.exp(lgamma(ny + 1) - lgamma(ny - a + 1)) if a > 20 else _falling(ny, a)
            k /= V**a
        out[r] = k
    return out


def _falling(n: int, a: int) -> float:
    p = 1.0
    for i in range(a):
        p *= n - i
    return p


@dataclass(frozen=True)
class Equilibrium:
    c_eq: np.ndarray
    residual: float
    conserved_class: np.ndarray

    @classmethod
    def prescribed(cls, net: NetworkSpec, c_eq) -> "Equilibrium":
        """Wrap a user-supplied reference state without searching.

        The residual is recorded but not enforced, so non-stationary
        references (as in the two-state textbook example) are allowed.
        """
        c_eq = np.asarray(c_eq, dtype=float)
        if np.any(c_eq <= 0):
            raise NoPositiveEquilibrium("prescribed equilibrium must be componentwise positive")
        res = float(np.abs(net.gamma_matrix @ mass_action_rates(net, c_eq)).max(initial=0.0))
        M = conservation_laws(net)
        return cls(c_eq, res, M @ c_eq)


def _rhs(net: NetworkSpec, c: np.ndarray) -> np.ndarray:
    return net.gamma_matrix @ mass_action_rates(net, np.maximum(c, 0.0))


def _newton_log(net, c_start, M, totals, tol, max_iter=100):
    G = net.gamma_matrix.astype(float)
    U, s, _ = linalg.svd(G, full_matrices=False) if G.size else (np.zeros((net.n_species, 0)), np.zeros(0), None)
    rank = int(np.sum(s > 1e-10 * (s.max() if s.size else 1.0)))
    Q = U[:, :rank]
    Mf = M.astype(float)
    alpha = net.alpha.astype(float)
    tscale = np.maximum(np.abs(totals), 1.0)

    def resid(u):
        c = np.exp(u)
        kap = mass_action_rates(net, c)
        scale = 1.0 + (np.abs(G) @ kap).max(initial=0.0)
        return np.concatenate([Q.T @ (G @ kap) / scale, (Mf @ c - totals) / tscale]), kap, scale

    u = np.log(c_start)
    F, kap, scale = resid(u)
    for _ in range(max_iter):
        c = np.exp(u)
        J = np.vstack([Q.T @ G @ (kap[:, None] * alpha) / scale, Mf * c[None, :] / tscale[:, None]])
        try:
            step = np.linalg.lstsq(J, -F, rcond=None)[0]
        except np.linalg.LinAlgError:
            return None
        norm0 = np.abs(F).max(initial=0.0)
        lam = 1.0
        while lam > 1e-8:
            u_new = u + lam * np.clip(step, -5.0, 5.0)
            F_new, kap_new, scale_new = resid(u_new)
            if np.all(np.isfinite(F_new)) and np.abs(F_new).max(initial=0.0) < (1 - 1e-4 * lam) * norm0:
                break
            lam *= 0.5
        else:
            break
        u, F, kap, scale = u_new, F_new, kap_new, scale_new
        if np.abs(F).max(initial=0.0) <= 1e-3 * tol:
            break
    return np.exp(u)


def _stationary_residual(net, c) -> tuple[float, float, float]:
    kap = mass_action_rates(net, c)
    net_rate = np.abs(net.gamma_matrix @ kap)
    gross = np.abs(net.gamma_matrix) @ kap
    res = float(net_rate.max(initial=0.0))
    scale = 1.0 + float(gross.max(initial=0.0))
    # per-species cancellation; close to 1 when a "root" is really a boundary approach
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(gross > 0, net_rate / gross, 0.0)
    return res, scale, float(ratio.max(initial=0.0))


# each species' net rate must be this small relative to its gross turnover
BALANCE_RATIO_TOL = 1e-6


def find_equilibrium(net: NetworkSpec, c0, tol: float = 1e-12) -> Equilibrium:
    """Positive equilibrium in the conserved class of ``c0``.

    ``c0`` may lie on the boundary (e.g. ``(2, 0)`` for ``A <-> B``); the
    pre-integration moves it into the interior when the class allows.
    Integrates the rate equation towards stationarity (stiff solver), then
    polishes with a damped Newton iteration in log coordinates restricted to
    the conserved class. Success means
    ``max|Gamma kappa(c_eq)| <= tol * (1 + max(|Gamma| kappa(c_eq)))`` and,
    per species, net rate at most ``BALANCE_RATIO_TOL`` of gross turnover
    (this rejects Newton runs that creep towards the boundary).
    """
    c0 = np.asarray(c0, dtype=float)
    if c0.shape != (net.n_species,):
        raise ValueError("c0 has the wrong length")
    if np.any(c0 < 0) or not np.all(np.isfinite(c0)):
        raise ValueError("c0 must be finite and nonnegative")
    M = conservation_laws(net)
    totals = M @ c0
    rate_scale = float(np.abs(_rhs(net, c0)).max(initial=0.0)) / max(float(c0.max()), 1e-300)
    t_unit = 1.0 / max(rate_scale, 1e-6)
    c = c0.copy()
    best = None
    elapsed = 0.0
    for horizon in (0.0, 10.0, 100.0, 1000.0, 1e4):
        if horizon > elapsed:
            sol = integrate.solve_ivp(
                lambda t, x: _rhs(net, x), (0.0, (horizon - elapsed) * t_unit), c,
                method="LSODA", rtol=1e-10, atol=1e-14 * (1 + c0.max()),
            )
            elapsed = horizon
            c = np.maximum(sol.y[:, -1], 0.0)
        if np.any(c <= 0):
            continue
        cand = _newton_log(net, c, M, totals, tol)
        if cand is None or not np.all(np.isfinite(cand)) or np.any(cand <= 0):
            continue
        res, scale, ratio = _stationary_residual(net, cand)
        drift = np.abs(M @ cand - totals).max(initial=0.0) / (1 + np.abs(totals).max(initial=0.0))
        if res <= tol * scale and ratio <= BALANCE_RATIO_TOL and drift <= 1e-10:
            return Equilibrium(cand, res, M @ cand)
        if best is None or res / scale < best[0]:
            best = (res / scale, cand)
    msg = "no positive equilibrium found"
    if best is not None:
        msg += f" (best relative residual {best[0]:.3e})"
    raise NoPositiveEquilibrium(msg)


@dataclass(frozen=True)
class FreeEnergy:
    value: float
    gradient: np.ndarray | None


def free_energy(c, eq: Equilibrium, gradient: bool = True) -> FreeEnergy:
    """Relative entropy of ``c`` w.r.t. the equilibrium, optionally with its gradient."""
    c = np.asarray(c, dtype=float)
    ceq = eq.c_eq
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(c > 0, c * np.log(c / ceq), 0.0) - c + ceq
    value = float(terms.sum())
    grad = None
    if gradient:
        if np.any(c <= 0):
            raise GradientUndefined("free-energy gradient undefined on the boundary")
        grad = np.log(c / ceq)
    return FreeEnergy(value, grad)


def reversed_omega(net: NetworkSpec, eq: Equilibrium) -> np.ndarray:
    """Rate constants of the time-reversed mass-action network.

    Entry ``bw(r)`` equals ``omega_r * c_eq**(alpha_r - beta_r)``, computed in
    log space.
    """
    logceq = np.log(eq.c_eq)
    out = np.zeros(net.n_reactions)
    pos = net.omega > 0
    expo = (net.alpha - net.beta).astype(float) @ logceq
    out_src = np.where(pos, np.exp(np.log(np.where(pos, net.omega, 1.0)) + expo), 0.0)
    out[net.bw_index] = out_src
    return out


def reversed_network(net: NetworkSpec, eq: Equilibrium) -> NetworkSpec:
    return net.with_omega(reversed_omega(net, eq))


def reversed_rates(net: NetworkSpec, c, eq: Equilibrium) -> np.ndarray:
    """Reversed rates ``<-kappa``: ``<-kappa_bw(r)(c) = kappa_r(c) prod (c/c_eq)**gamma_r``.

    Evaluated as mass action with the reversed constants, i.e.
    ``<-omega_bw(r) c**beta_r``, which is the continuous extension of the
    product form to the boundary (exponents ``alpha + gamma = beta >= 0``,
    so the product form has no pole for mass-action rates).
    """
    c = np.asarray(c, dtype=float)
    if np.any(c < 0):
        raise GradientUndefined("negative concentration")
    return reversed_omega(net, eq) * _monomial(c, net.alpha)


def check_rate_relations(net: NetworkSpec, c, eq: Equilibrium) -> dict:
    """Residuals of ``sum kappa = sum <-kappa`` and ``kappa_r kappa_bw = <-kappa_r <-kappa_bw``."""
    c = np.asarray(c, dtype=float)
    if np.any(c <= 0):
        raise GradientUndefined("rate relations are checked at interior states only")
    kap = mass_action_rates(net, c)
    rev = reversed_rates(net, c, eq)
    m = net.fw_count
    prod = kap[:m] * kap[m:]
    prod_rev = rev[:m] * rev[m:]
    grad = np.log(c / eq.c_eq)
    # log-ratio relation: grad I0 . gamma_r = log(<-kappa_bw(r) / kappa_r)
    pos = kap > 0
    with np.errstate(divide="ignore"):
        lr = np.log(rev[net.bw_index][pos]) - np.log(kap[pos])
    fd = relative_residual(grad @ net.gamma_matrix[:, pos], lr) if pos.any() else 0.0
    return {
        "sum": relative_residual(kap.sum(), rev.sum()),
        "mobility": relative_residual(prod, prod_rev),
        "log_ratio": fd,
    }


def detailed_balance_check(net: NetworkSpec, eq: Equilibrium, samples: int = 100, seed: int = 0,
                           tol: float = 1e-10) -> tuple[bool, float]:
    """Sample interior states around ``c_eq`` and compare ``<-kappa`` with ``kappa``."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        c = eq.c_eq * np.exp(rng.uniform(-1.0, 1.0, net.n_species))
        kap = mass_action_rates(net, c)
        rev = reversed_rates(net, c, eq)
        dev = np.abs(rev - kap).max(initial=0.0) / (1.0 + np.abs(kap).max(initial=0.0))
        worst = max(worst, float(dev))
    return worst <= tol, worst


def _net_rate(net: NetworkSpec, c: np.ndarray) -> np.ndarray:
    return net_of_oneway(net, mass_action_rates(net, c))


def _rk4_interval(net, c, h, dt_min):
    """Advance by ``h``; returns (new state, integral of net flux over the step)."""
    Gf = net.gamma_fw
    k1 = _net_rate(net, c)
    y2 = c + 0.5 * h * (Gf @ k1)
    if np.all(y2 >= 0):
        k2 = _net_rate(net, y2)
        y3 = c + 0.5 * h * (Gf @ k2)
        if np.all(y3 >= 0):
            k3 = _net_rate(net, y3)
            y4 = c + h * (Gf @ k3)
            if np.all(y4 >= 0):
                k4 = _net_rate(net, y4)
                w = h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
                new = c + Gf @ w
                if np.all(new >= 0):
                    return new, w
    if h / 2 < dt_min:
        raise StepSizeTooLarge(f"cannot keep concentrations nonnegative with step above {dt_min}")
    c_mid, w1 = _rk4_interval(net, c, h / 2, dt_min)
    c_end, w2 = _rk4_interval(net, c_mid, h / 2, dt_min)
    return c_end, w1 + w2


def ode_solve(net: NetworkSpec, c0, T: float, dt: float, dt_min: float = 1e-12,
              drift_tol: float = 1e-9) -> Path:
    """Solve ``dc/dt = Gamma_fw (kappa_fw - kappa_bw)`` with classical RK4.

    The grid is uniform. A step whose stages or result would leave the
    nonnegative orthant is halved recursively. The recorded interval flux is
    the net flux integrated over the step divided by its length, so discrete
    continuity holds to rounding.
    """
    c0 = np.asarray(c0, dtype=float)
    if dt <= 0 or T <= 0:
        raise ValueError("T and dt must be positive")
    if np.any(c0 < 0):
        raise ValueError("c0 must be nonnegative")
    n = max(1, int(round(T / dt)))
    grid = np.linspace(0.0, T, n + 1)
    states = np.empty((n + 1, net.n_species))
    jbar = np.empty((n, net.fw_count))
    states[0] = c0
    c = c0.copy()
    for i in range(n):
        h = grid[i + 1] - grid[i]
        c, w = _rk4_interval(net, c, h, dt_min)
        states[i + 1] = c
        jbar[i] = w / h
    M = conservation_laws(net).astype(float)
    if M.size:
        drift = np.abs(states @ M.T - M @ c0).max() / (1.0 + np.abs(M @ c0).max())
        if drift > drift_tol:
            raise StepSizeTooLarge(f"conservation drift {drift:.3e} exceeds {drift_tol}")
    return Path(grid, states, jbar)
