"""Batch verification suites used by ``fluxnet verify``.

Each suite samples states or paths of one network from a seeded generator
and reports the worst residual (or the smallest gap) against a tolerance.
The contraction and Legendre suites compare closed forms with numerical
minimisers, not with each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import kl_div

from .config import VerifyConfig
from .errors import ConditionViolated
from .kinetics import (
    Equilibrium,
    check_rate_relations,
    mass_action_rates,
    relative_residual,
    reversed_network,
    reversed_rates,
)
from .ldcost import decomposition_residuals, mobility, net_cost, phi, phi_star
from .netcore import NetworkSpec
from .pathcheck import fir_asym_gap, fir_gap, irreversible_work_bound, time_reversal_residual
from .sampling import random_interior_states, random_path
from .ssa import convergence_study, make_rng

SUITES = ("relations", "orthogonality", "fir", "reversal", "contraction", "kurtz")


@dataclass
class SuiteResult:
    name: str
    passed: bool
    worst: float
    tol: float
    detail: str = ""
    table: list = field(default_factory=list)

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"{self.name:<14s} {mark}  worst={self.worst:.3e}  tol={self.tol:.1e}  {self.detail}".rstrip()


@dataclass
class VerifyReport:
    results: list

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failing(self) -> list:
        return [r.name for r in self.results if not r.passed]

    def table(self) -> str:
        return "\n".join(r.line() for r in self.results)


def brute_force_pair_cost(kf: float, kb: float, jbar: float) -> float:
    """``min_{jb >= max(0, -jbar)} S(jb + jbar | kf) + S(jb | kb)`` by bounded Brent search."""
    lo = max(0.0, -jbar)
    hi = lo + abs(jbar) + kf + kb + 1.0

    def f(jb):
        return float(kl_div(jb + jbar, kf) + kl_div(jb, kb))

    res = optimize.minimize_scalar(f, bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-13 * (1.0 + hi)})
    return min(res.fun, f(lo))


def legendre_phi(sigma: float, jbar: float, zmax: float = 60.0, n_grid: int = 4001) -> float:
    """``sup_z z jbar - 2 sigma (cosh z - 1)`` by grid search refined with Brent."""
    z = np.linspace(-zmax, zmax, n_grid)
    vals = z * jbar - 2.0 * sigma * (np.cosh(z) - 1.0)
    k = int(np.argmax(vals))
    a = z[max(k - 1, 0)]
    b = z[min(k + 1, n_grid - 1)]
    res = optimize.minimize_scalar(lambda t: -(t * jbar - 2.0 * sigma * (np.cosh(t) - 1.0)),
                                   bounds=(a, b), method="bounded", options={"xatol": 1e-14})
    return max(-res.fun, vals[k])


def _states(eq, cfg, rng):
    return random_interior_states(rng, eq.c_eq, cfg.samples, cfg.spread)


def suite_relations(net, eq, cfg, rng) -> SuiteResult:
    worst = 0.0
    for c in _states(eq, cfg, rng):
        worst = max(worst, *check_rate_relations(net, c, eq).values())
    return SuiteResult("relations", worst <= cfg.tol, worst, cfg.tol, "sum / mobility / log-ratio")


def suite_orthogonality(net, eq, cfg, rng) -> SuiteResult:
    worst = 0.0
    worst_key = ""
    for c in _states(eq, cfg, rng):
        kap = mass_action_rates(net, c)
        rev = reversed_rates(net, c, eq)
        jbar = rng.normal(0.0, 1.0, net.fw_count) * (1.0 + mobility(net, kap))
        res = decomposition_residuals(net, kap, rev, jbar, np.log(c / eq.c_eq))
        for k, v in res.items():
            if v is not None and v > worst:
                worst, worst_key = v, k
    return SuiteResult("orthogonality", worst <= cfg.tol, worst, cfg.tol,
                       f"worst identity: {worst_key}" if worst_key else "")


def suite_fir(net, eq, cfg, rng) -> SuiteResult:
    n_paths = cfg.n_paths if cfg.n_paths is not None else max(2, cfg.samples // 10)
    tol = cfg.inequality_tol
    mins = {"fir": np.inf, "asym": np.inf, "work": np.inf}
    skipped = {"asym": 0, "work": 0}
    for c0 in random_interior_states(rng, eq.c_eq, n_paths, 0.5 * cfg.spread):
        path = random_path(net, rng, c0, n_intervals=cfg.path_intervals)
        mins["fir"] = min(mins["fir"], fir_gap(net, path, eq).gap)
        try:
            mins["asym"] = min(mins["asym"], fir_asym_gap(net, path, eq).gap)
        except ConditionViolated:
            skipped["asym"] += 1
        try:
            mins["work"] = min(mins["work"], irreversible_work_bound(net, path, eq).gap)
        except ConditionViolated:
            skipped["work"] += 1
    finite = [v for v in mins.values() if np.isfinite(v)]
    worst = min(finite) if finite else 0.0
    detail = " ".join(f"min_{k}={v:.3e}" for k, v in mins.items() if np.isfinite(v))
    if any(skipped.values()):
        detail += f" skipped={skipped}"
    return SuiteResult("fir", worst >= -tol, -worst if worst < 0 else 0.0, tol, detail)


def suite_reversal(net, eq, cfg, rng) -> SuiteResult:
    worst = 0.0
    for c in _states(eq, cfg, rng):
        kap = mass_action_rates(net, c)
        j = kap * np.exp(rng.normal(0.0, 0.5, kap.shape))
        worst = max(worst, time_reversal_residual(net, c, j, eq))
        rev = reversed_rates(net, c, eq)
        worst = max(worst, relative_residual(mobility(net, kap), mobility(net, rev)))
    # reversing twice gives back the original rate constants
    twice = reversed_network(reversed_network(net, eq), eq).omega
    worst = max(worst, relative_residual(twice, net.omega))
    return SuiteResult("reversal", worst <= cfg.tol, worst, cfg.tol, "pointwise reversal, involution")


def suite_contraction(net, eq, cfg, rng) -> SuiteResult:
    worst = 0.0
    worst_leg = 0.0
    m = net.fw_count
    for c in _states(eq, cfg, rng):
        kap = mass_action_rates(net, c)
        sig = mobility(net, kap)
        jbar = rng.normal(0.0, 1.0, m) * (1.0 + sig)
        brute = sum(brute_force_pair_cost(kap[r], kap[m + r], jbar[r]) for r in range(m))
        worst = max(worst, relative_residual(net_cost(net, c, jbar, kap), brute))
        leg = sum(legendre_phi(sig[r], jbar[r]) for r in range(m) if sig[r] > 0)
        worst_leg = max(worst_leg, relative_residual(phi(net, kap, jbar), leg))
    ok = worst <= cfg.contraction_tol and worst_leg <= cfg.legendre_tol
    return SuiteResult("contraction", ok, worst, cfg.contraction_tol, f"legendre={worst_leg:.3e}")


def suite_kurtz(net, eq, cfg, rng, c0=None) -> SuiteResult:
    if c0 is None:
        c0 = random_interior_states(rng, eq.c_eq, 1, 0.5)[0]
    seed0 = int(rng.integers(0, 2**62))
    seeds = [seed0 + i for i in range(cfg.kurtz_seeds)]
    rows = convergence_study(net, c0, cfg.kurtz_T, cfg.kurtz_volumes, seeds, n_eval=1001)
    means = [r["mean"] for r in rows]
    ok = all(b < a for a, b in zip(means, means[1:]))
    table = [(r["V"], r["mean"], r["max"]) for r in rows]
    detail = " ".join(f"V={v:g}:{m:.3e}" for v, m, _ in table)
    return SuiteResult("kurtz", ok, means[-1], float("nan"), detail, table)


_RUNNERS = {
    "relations": suite_relations,
    "orthogonality": suite_orthogonality,
    "fir": suite_fir,
    "reversal": suite_reversal,
    "contraction": suite_contraction,
    "kurtz": suite_kurtz,
}


def run(net: NetworkSpec, eq: Equilibrium, cfg: VerifyConfig | None = None,
        suites=("all",), c0=None) -> VerifyReport:
    """Run the requested suites; each suite gets its own random stream of ``cfg.seed``."""
    cfg = cfg or VerifyConfig()
    names = SUITES if "all" in suites else tuple(suites)
    results = []
    for name in names:
        if name not in _RUNNERS:
            raise ValueError(f"unknown suite {name!r}")
        rng = make_rng(cfg.seed, SUITES.index(name))
        if name == "kurtz":
            results.append(suite_kurtz(net, eq, cfg, rng, c0))
        else:
            results.append(_RUNNERS[name](net, eq, cfg, rng))
    return VerifyReport(results)
