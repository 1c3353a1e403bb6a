"""Acceptance criteria, each at its stated tolerance and runtime budget.

Every test records one PASS/FAIL line, collected in the terminal summary.
"""

import hashlib
import time

import numpy as np
import pytest
from scipy import optimize

from fluxnet import cli
from fluxnet.config import FirSweepConfig, KurtzConfig, ReversalLawConfig, SweepConfig
from fluxnet.errors import ConditionViolated, WeakDBViolated
from fluxnet.kinetics import (
    check_rate_relations,
    find_equilibrium,
    mass_action_rates,
    ode_solve,
    relative_residual,
    reversed_rates,
)
from fluxnet.ldcost import (
    decomposition_residuals,
    fisher_asym,
    fisher_sym,
    force,
    force_split,
    mobility,
    net_cost,
    phi,
    zero_cost_flux,
)
from fluxnet.netcore import build_network
from fluxnet.netparse import parse_network, render_network
from fluxnet.pathcheck import (
    fir_asym_gap,
    fir_gap,
    integrate_cost,
    irreversible_work_bound,
    time_reversal_residual,
)
from fluxnet.sampling import (
    NetworkSampler,
    random_interior_states,
    random_network,
    random_path,
    two_state_example,
    work_equality_path,
)
from fluxnet.ssa import simulate, time_reversal_test


@pytest.fixture(scope="module")
def sweep():
    """50 random networks (2-6 species, 1-5 pairs), 100 interior states each."""
    cfg = SweepConfig()
    rng = np.random.default_rng(cfg.seed)
    sampler = NetworkSampler(species=cfg.species, pairs=cfg.pairs)
    out = []
    for _ in range(cfg.n_networks):
        net, eq = random_network(rng, sampler)
        states = random_interior_states(rng, eq.c_eq, cfg.states_per_network)
        jbar = rng.normal(size=(cfg.states_per_network, net.fw_count))
        jlog = rng.normal(0.0, 0.5, size=(cfg.states_per_network, net.n_reactions))
        out.append((net, eq, states, jbar, jlog))
    return out


def test_ac1_orthogonality(sweep, acceptance):
    t0 = time.perf_counter()
    worst = 0.0
    n_states = 0
    for net, eq, states, _, _ in sweep:
        for c in states:
            dec = force_split(net, mass_action_rates(net, c), reversed_rates(net, c, eq))
            kap = mass_action_rates(net, c)
            sig = mobility(net, kap)
            pair = float((4 * sig * np.sinh(dec.F_sym) * np.sinh(dec.F_asym)).sum())
            scale = float((4 * sig * np.abs(np.sinh(dec.F_sym)) * np.abs(np.sinh(dec.F_asym))).sum())
            worst = max(worst, abs(pair) / (1.0 + scale))
            n_states += 1
    dt = time.perf_counter() - t0
    ok = len(sweep) >= 50 and n_states >= 5000 and worst <= 1e-10 and dt < 10
    acceptance("AC1", ok, f"orthogonality worst={worst:.2e} over {n_states} states, {dt:.1f}s")
    assert worst <= 1e-10
    assert dt < 10


def test_ac2_decomposition_identities(sweep, acceptance):
    t0 = time.perf_counter()
    worst = {}
    for net, eq, states, jbars, _ in sweep:
        for c, jbar in zip(states, jbars):
            kap = mass_action_rates(net, c)
            res = decomposition_residuals(net, kap, reversed_rates(net, c, eq), jbar, np.log(c / eq.c_eq))
            for k, v in res.items():
                worst[k] = max(worst.get(k, 0.0), v)
    dt = time.perf_counter() - t0
    top = max(worst, key=worst.get)
    ok = worst[top] <= 1e-10 and dt < 10
    acceptance("AC2", ok, f"{len(worst)} identities, worst {top}={worst[top]:.2e}, {dt:.1f}s")
    assert worst[top] <= 1e-10, worst
    assert dt < 10


def test_ac3_rate_relations_and_pointwise_reversal(sweep, acceptance):
    t0 = time.perf_counter()
    worst = 0.0
    for net, eq, states, _, jlogs in sweep:
        for c, jl in zip(states, jlogs):
            worst = max(worst, *check_rate_relations(net, c, eq).values())
            j = mass_action_rates(net, c) * np.exp(jl)
            worst = max(worst, time_reversal_residual(net, c, j, eq))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-10 and dt < 10
    acceptance("AC3", ok, f"rate relations + pointwise reversal worst={worst:.2e}, {dt:.1f}s")
    assert worst <= 1e-10
    assert dt < 10


def _golden_min(f, lo, hi, tol=1e-14):
    g = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1, x2 = b - g * (b - a), a + g * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol * (1.0 + abs(a) + abs(b)):
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - g * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + g * (b - a)
            f2 = f(x2)
    return min(f1, f2, f(lo))


def _kl(j, k):
    if j == 0:
        return k
    if k == 0:
        return np.inf
    return j * np.log(j / k) - j + k


def test_ac4_contraction_brute_force(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    net = build_network(["X", "Y"], [((1, 0), (0, 1), 1.0, 1.0)])
    worst = 0.0
    for i in range(1000):
        kf, kb = np.exp(rng.uniform(-4, 4, 2))
        if i % 20 == 0:
            kb = 0.0
        jbar = rng.normal(0.0, 2.0) * (1 + np.sqrt(kf * kb))
        if kb == 0.0:
            jbar = abs(jbar)
        lo = max(0.0, -jbar)
        hi = lo + abs(jbar) + kf + kb + 1.0
        brute = _golden_min(lambda jb: _kl(jb + jbar, kf) + _kl(jb, kb), lo, hi)
        closed = net_cost(net, None, [jbar], [kf, kb])
        worst = max(worst, relative_residual(closed, brute))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-8 and dt < 30
    acceptance("AC4", ok, f"1000 (sigma, jbar) pairs, worst={worst:.2e}, {dt:.1f}s")
    assert worst <= 1e-8
    assert dt < 30


def test_ac5_legendre_oracle(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    net = build_network(["X", "Y"], [((1, 0), (0, 1), 1.0, 1.0)])
    worst = 0.0
    z = np.linspace(-40.0, 40.0, 8001)
    for _ in range(1000):
        sigma = float(np.exp(rng.uniform(-3, 3)))
        jbar = float(rng.normal(0.0, 3.0) * (1 + sigma))
        vals = z * jbar - 2 * sigma * (np.cosh(z) - 1)
        k = int(np.argmax(vals))
        res = optimize.minimize_scalar(lambda t: -(t * jbar - 2 * sigma * (np.cosh(t) - 1)),
                                       bounds=(z[k - 1], z[k + 1]), method="bounded",
                                       options={"xatol": 1e-13})
        sup = max(-res.fun, vals[k])
        worst = max(worst, relative_residual(phi(net, [sigma, sigma], [jbar]), sup))
    dt = time.perf_counter() - t0
    ok = worst <= 1e-6 and dt < 30
    acceptance("AC5", ok, f"1000 pairs, worst={worst:.2e}, {dt:.1f}s")
    assert worst <= 1e-6
    assert dt < 30


def test_ac6_zero_cost_flow(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    T = 2.0
    worst_action = 0.0
    worst_point = 0.0
    for _ in range(10):
        net, eq = random_network(rng)
        c0 = random_interior_states(rng, eq.c_eq, 1)[0]
        path = ode_solve(net, c0, T, 2.5e-4)
        worst_action = max(worst_action, integrate_cost(net, path) / T)
        for c in path.states[::50]:
            kap = mass_action_rates(net, c)
            m = net.fw_count
            worst_point = max(worst_point, relative_residual(zero_cost_flux(net, kap), kap[:m] - kap[m:]))
    dt = time.perf_counter() - t0
    ok = worst_action <= 1e-8 and worst_point <= 1e-12 and dt < 30
    acceptance("AC6", ok, f"max action/T={worst_action:.2e}, pointwise={worst_point:.2e}, {dt:.1f}s")
    assert worst_action <= 1e-8
    assert worst_point <= 1e-12
    assert dt < 30


def test_ac7_fir_inequalities(acceptance):
    t0 = time.perf_counter()
    cfg = FirSweepConfig()
    rng = np.random.default_rng(cfg.seed)
    mins = {"fir": np.inf, "asym": np.inf, "work": np.inf}
    n_paths = 0
    n_asym = 0
    eq_gaps = []
    for _ in range(cfg.n_networks):
        net, eq = random_network(rng)
        for _ in range(cfg.paths_per_network):
            c0 = random_interior_states(rng, eq.c_eq, 1, 0.5)[0]
            path = random_path(net, rng, c0, cfg.T, cfg.n_intervals, cfg.amplitude, cfg.kernel_scale)
            mins["fir"] = min(mins["fir"], fir_gap(net, path, eq).gap)
            try:
                mins["asym"] = min(mins["asym"], fir_asym_gap(net, path, eq).gap)
                n_asym += 1
            except ConditionViolated:
                pass
            mins["work"] = min(mins["work"], irreversible_work_bound(net, path, eq).gap)
            n_paths += 1
        c0 = random_interior_states(rng, eq.c_eq, 1, 0.5)[0]
        ep = work_equality_path(net, eq, c0, cfg.T, cfg.n_intervals)
        r = irreversible_work_bound(net, ep, eq)
        eq_gaps.append(r.gap)
    dt = time.perf_counter() - t0
    worst_eq = max(abs(g) for g in eq_gaps)
    ok = (min(mins.values()) >= -1e-6 and worst_eq <= 1e-6 and n_paths >= 200 and dt < 120)
    acceptance("AC7", ok, f"{n_paths} paths ({n_asym} satisfying the asym precondition) min gaps "
               + " ".join(f"{k}={v:.2e}" for k, v in mins.items())
               + f", equality path |gap|<={worst_eq:.1e}, {dt:.1f}s")
    assert mins["fir"] >= -1e-6
    assert mins["asym"] >= -1e-6
    assert mins["work"] >= -1e-6
    assert worst_eq <= 1e-6
    assert dt < 120


def _two_state_closed_forms(a12, a21, c, ceq):
    x = c / ceq
    return (
        0.5 * (a12 + a21) * (np.sqrt(x[0]) - np.sqrt(x[1])) ** 2,
        0.5 * (x[0] + x[1]) * (np.sqrt(a12) - np.sqrt(a21)) ** 2,
    )


def test_ac8_two_state_closed_forms(acceptance):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    worst = 0.0
    boundary_ok = True
    configs = [((4.0, 1.0), np.array([1.0, 1.0]), np.array([1.0, 1.0]))]
    for i in range(19):
        a = np.exp(rng.uniform(-2, 2, 2))
        ceq = np.exp(rng.uniform(-1, 1, 2))
        c = np.exp(rng.uniform(-1, 1, 2))
        if i % 4 == 0:
            c[i % 8 // 4] = 0.0
        configs.append((tuple(a), c, ceq))
    for (a12, a21), c, ceq in configs:
        net, eq = two_state_example(a12, a21, ceq)
        kap = mass_action_rates(net, c)
        rev = reversed_rates(net, c, eq)
        fis_ref, fia_ref = _two_state_closed_forms(a12, a21, c, ceq)
        worst = max(worst, relative_residual(fisher_sym(net, kap, rev), fis_ref))
        worst = max(worst, relative_residual(fisher_asym(net, kap, rev), fia_ref))
        if np.all(c > 0):
            dec = force_split(net, kap, rev)
            Fs_ref = 0.5 * np.log(c[0] * ceq[1] / (c[1] * ceq[0]))
            Fa_ref = 0.5 * np.log(a12 / a21)
            worst = max(worst, relative_residual(dec.F_sym, [Fs_ref]), relative_residual(dec.F_asym, [Fa_ref]))
        else:
            for fn in (lambda: force(net, kap), lambda: force_split(net, kap, rev)):
                try:
                    fn()
                    boundary_ok = False
                except WeakDBViolated:
                    pass
    net, eq = two_state_example(4.0, 1.0, [1.0, 1.0])
    kap = mass_action_rates(net, [1.0, 1.0])
    rev = reversed_rates(net, [1.0, 1.0], eq)
    special = abs(fisher_asym(net, kap, rev) - 1.0) <= 1e-12 and abs(fisher_sym(net, kap, rev)) <= 1e-12
    dt = time.perf_counter() - t0
    ok = worst <= 1e-12 and boundary_ok and special and dt < 1
    acceptance("AC8", ok, f"20 configs worst={worst:.2e}, boundary forces undefined={boundary_ok}, "
               f"Fi_s^a(4,1)=1 and Fi_a^s=0: {special}, {dt:.2f}s")
    assert worst <= 1e-12
    assert boundary_ok and special
    assert dt < 1


def test_ac9_kurtz_convergence(acceptance):
    cfg = KurtzConfig()
    net = build_network(["A", "B"], [((1, 0), (0, 1), cfg.kf, cfg.kb)])
    simulate(net, 10.0, cfg.c0, 0.1, 0)  # compile outside the timed region
    t0 = time.perf_counter()
    grid = np.linspace(0.0, cfg.T, 20001)
    exact = 1.0 + np.exp(-2.0 * grid)
    means = []
    for V in cfg.volumes:
        errs = [np.abs(simulate(net, V, cfg.c0, cfg.T, s).concentration_at(grid)[:, 0] - exact).max()
                for s in cfg.seeds]
        means.append(float(np.mean(errs)))
    dt = time.perf_counter() - t0
    decreasing = all(b < a for a, b in zip(means, means[1:]))
    ratio = means[0] / means[-1]
    ok = decreasing and ratio >= 3 and dt < 120
    acceptance("AC9", ok, "mean sup errors " + ", ".join(f"V={V:g}:{m:.3e}" for V, m in zip(cfg.volumes, means))
               + f", ratio={ratio:.1f}, {dt:.1f}s")
    assert decreasing
    assert ratio >= 3
    assert dt < 120


def test_ac10_time_reversal_in_law(acceptance):
    cfg = ReversalLawConfig()
    net = build_network(["A", "B"], [((1, 0), (0, 1), cfg.kf, cfg.kb)])
    eq = find_equilibrium(net, cfg.ceq)
    simulate(net, 10.0, cfg.ceq, 0.1, 0)
    t0 = time.perf_counter()
    pvals, combined = time_reversal_test(net, eq, cfg.V, cfg.T, cfg.n_traj, cfg.seed)
    dt = time.perf_counter() - t0
    ok = combined > cfg.alpha and dt < 300
    acceptance("AC10", ok, f"per-reaction p={np.round(pvals, 3).tolist()}, Bonferroni p={combined:.3f}, "
               f"{cfg.n_traj} trajectories, {dt:.1f}s")
    assert combined > cfg.alpha
    assert dt < 300


def test_ac11_determinism_and_round_trip(tmp_path, acceptance):
    t0 = time.perf_counter()
    crn = tmp_path / "ab.crn"
    crn.write_text("species A, B\nA <-> B : kf=1, kb=1\n")
    digests = []
    for k in range(2):
        out = tmp_path / f"run{k}.csv"
        code = cli.main(["simulate", str(crn), "--volume", "1e4", "--tmax", "5", "--seed", "7",
                         "--c0", "2,0", "--out", str(out)])
        assert code == 0
        digests.append(hashlib.sha256(out.read_bytes() + out.with_suffix(".json").read_bytes()).hexdigest())
    same = digests[0] == digests[1]
    rng = np.random.default_rng(11)
    bad = 0
    for i in range(100):
        net, _ = random_network(rng)
        if i % 3 == 0:
            om = net.omega.copy()
            om[net.fw_count + int(rng.integers(net.fw_count))] = 0.0
            net = net.with_omega(om)
        if parse_network(render_network(net)) != net:
            bad += 1
    dt = time.perf_counter() - t0
    ok = same and bad == 0 and dt < 5
    acceptance("AC11", ok, f"byte-identical CLI runs={same}, round-trip failures={bad}/100, {dt:.2f}s")
    assert same
    assert bad == 0
    assert dt < 5
