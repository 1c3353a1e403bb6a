import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fluxnet.errors import BoundaryStart, ConditionViolated
from fluxnet.kinetics import Equilibrium, find_equilibrium, mass_action_rates, ode_solve, reversed_rates
from fluxnet.ldcost import entropic_cost
from fluxnet.netcore import Path, transpose_flux
from fluxnet.netparse import parse_network
from fluxnet.pathcheck import (
    cost_density,
    fir_asym_gap,
    fir_gap,
    integrate_cost,
    integrated_time_reversal,
    irreversible_work_bound,
    time_reversal_residual,
    validate_path,
)
from fluxnet.sampling import (
    NetworkSampler,
    random_interior_states,
    random_network,
    random_path,
    two_channel_network,
    two_state_example,
    work_equality_path,
)


def constant_path(net, c, T=1.0, n=10, oneway=True):
    kap = mass_action_rates(net, c)
    m = net.fw_count
    return Path(np.linspace(0, T, n + 1), np.tile(c, (n + 1, 1)), np.tile(kap[:m] - kap[m:], (n, 1)),
                np.tile(kap, (n, 1)) if oneway else None)


def rescaled(net, path, factor):
    jbar = factor * path.net_fluxes
    inc = (jbar @ net.gamma_fw.T) * path.dt[:, None]
    states = np.vstack([path.states[:1], path.states[0] + np.cumsum(inc, axis=0)])
    return Path(path.grid, states, jbar)


def test_constant_equilibrium_path_is_free(nacl):
    eq = find_equilibrium(nacl, [2.0, 1.0, 0.5])
    p = constant_path(nacl, eq.c_eq)
    assert integrate_cost(nacl, p) <= 1e-14
    rep = fir_gap(nacl, p, eq)
    assert abs(rep.gap) <= 1e-14 and rep.skipped == []


def test_ode_path_zero_action_and_fir(ab):
    eq = find_equilibrium(ab, [2.0, 0.0])
    p = ode_solve(ab, [1.9, 0.1], 3.0, 1e-3)
    assert integrate_cost(ab, p) <= 1e-8 * p.T
    rep = fir_gap(ab, p, eq)
    assert rep.gap >= -1e-6
    # along relaxation the action vanishes, so the gap is the free-energy/Fisher balance
    assert rep.gap == pytest.approx(-rep.fisher_integral - rep.boundary, abs=1e-8)


def test_perturbed_ode_path_richardson(ab):
    actions = []
    for dt in (0.02, 0.01, 0.005):
        base = ode_solve(ab, [1.9, 0.1], 1.0, dt)
        actions.append(integrate_cost(ab, rescaled(ab, base, 1.1)))
    assert min(actions) > 0
    d1, d2 = actions[0] - actions[1], actions[1] - actions[2]
    assert 3.0 < d1 / d2 < 5.0


def test_reversed_mode_equals_forward_under_detailed_balance(nacl, rng):
    eq = find_equilibrium(nacl, [2.0, 1.0, 0.5])
    p = random_path(nacl, rng, eq.c_eq * 1.2)
    assert integrate_cost(nacl, p, "reversed", eq) == pytest.approx(integrate_cost(nacl, p), rel=1e-12)
    with pytest.raises(ValueError):
        integrate_cost(nacl, p, "sideways", eq)


def test_infinite_cost_propagates():
    net = parse_network("species A, B\nA -> B : kf=1")
    p = Path([0.0, 1.0], [[1.0, 1.0], [1.0, 1.0]], [[0.0]], [[1.0, 1.0]])
    assert cost_density(net, p)[0] == np.inf


@settings(max_examples=25)
@given(st.integers(0, 10_000))
def test_fir_gaps_on_random_paths(seed):
    rng = np.random.default_rng(seed)
    net, eq = random_network(rng)
    p = random_path(net, rng, random_interior_states(rng, eq.c_eq, 1, 0.5)[0], n_intervals=80)
    assert fir_gap(net, p, eq).gap >= -1e-6
    assert fir_asym_gap(net, p, eq).gap >= -1e-6
    assert irreversible_work_bound(net, p, eq).gap >= -1e-6


def test_fir_report_breakdown_sums(rng):
    net, eq = random_network(rng)
    p = random_path(net, rng, eq.c_eq, n_intervals=40)
    rep = fir_gap(net, p, eq)
    assert rep.intervals["gap"].sum() == pytest.approx(rep.gap, rel=1e-10, abs=1e-12)
    js = rep.to_json()
    assert js["schema_version"] == "1" and len(js["intervals"]["action"]) == 40


def test_asym_gap_reduces_to_action_under_detailed_balance(rng):
    net, eq = random_network(rng, NetworkSampler(detailed_balance=True))
    p = random_path(net, rng, eq.c_eq, n_intervals=50)
    rep = fir_asym_gap(net, p, eq)
    assert abs(rep.lhs) <= 1e-10
    assert rep.gap == pytest.approx(integrate_cost(net, Path(p.grid, p.states, p.net_fluxes)), rel=1e-9)
    w = irreversible_work_bound(net, p, eq)
    assert abs(w.lhs) <= 1e-10 and w.rhs >= 0


def test_asym_gap_on_cycle_relaxation():
    net = two_channel_network()
    eq = find_equilibrium(net, [1.0, 1.0])
    p = ode_solve(net, [1.8, 0.2], 3.0, 1e-3)
    rep = fir_asym_gap(net, p, eq)
    assert rep.gap >= -1e-6
    # zero-cost path: what remains is int F_asym.jbar - int Fi_s^a, a Young gap
    assert rep.rhs - integrate_cost(net, p) - rep.lhs >= -1e-9


def test_asym_bound_needs_stationary_reference():
    # with a12 != a21 the prescribed reference is not stationary and the bound can fail
    net, eq = two_state_example(4.0, 1.0, [1.0, 1.0])
    true_eq = find_equilibrium(net, [1.0, 1.0])
    p = ode_solve(net, true_eq.c_eq, 1.0, 1e-2)
    assert fir_asym_gap(net, p, eq).gap < -0.5


def test_precondition_violation_names_interval_and_pair():
    net = two_channel_network(3.0, 1.0, 2.0, 0.0)
    eq = find_equilibrium(net, [1.0, 1.0])
    p = ode_solve(net, [1.5, 0.5], 0.1, 1e-2)
    with pytest.raises(ConditionViolated) as ei:
        fir_asym_gap(net, p, eq)
    assert ei.value.interval == 0 and ei.value.pair == 1


def test_work_equality_path_is_tight():
    net = two_channel_network()
    eq = find_equilibrium(net, [1.0, 1.0])
    for c0 in ([1.5, 0.5], [0.3, 1.7]):
        r = irreversible_work_bound(net, work_equality_path(net, eq, c0, 1.0, 100), eq)
        assert abs(r.gap) <= 1e-6
        assert r.lhs > 0


def test_boundary_start_rejected(ab):
    eq = find_equilibrium(ab, [2.0, 0.0])
    p = ode_solve(ab, [2.0, 0.0], 1.0, 0.1)
    for fn in (fir_gap, fir_asym_gap):
        with pytest.raises(BoundaryStart):
            fn(ab, p, eq)


def test_boundary_intervals_are_skipped(ab):
    eq = Equilibrium.prescribed(ab, [1.0, 1.0])
    grid = np.linspace(0, 1, 11)
    states = np.column_stack([1 + grid, 1 - grid])
    p = Path(grid, states, -np.ones((10, 1)))
    rep = irreversible_work_bound(ab, p, eq)
    assert rep.skipped == [9]
    assert fir_gap(ab, p, eq).skipped == [9]


def test_invalid_paths_rejected(ab):
    p = Path([0.0, 1.0], [[1.0, 1.0], [2.0, 0.0]], [[0.0]])
    with pytest.raises(ValueError):
        validate_path(ab, p)
    q = Path([0.0, 1.0], [[1.0, 1.0], [-1.0, 3.0]], [[2.0]])
    with pytest.raises(ValueError):
        validate_path(ab, q)


@given(st.integers(0, 10_000))
def test_pointwise_time_reversal(seed):
    rng = np.random.default_rng(seed)
    net, eq = random_network(rng)
    c = random_interior_states(rng, eq.c_eq, 1)[0]
    j = mass_action_rates(net, c) * np.exp(rng.normal(size=net.n_reactions))
    assert time_reversal_residual(net, c, j, eq) <= 1e-10


def test_time_reversal_special_cases(rng):
    net, eq = random_network(rng)
    c = random_interior_states(rng, eq.c_eq, 1)[0]
    kap = mass_action_rates(net, c)
    rhs = np.log(c / eq.c_eq) @ (net.gamma_matrix @ kap)
    assert -entropic_cost(transpose_flux(net, kap), reversed_rates(net, c, eq)) == pytest.approx(rhs, rel=1e-10)
    j = rng.random(net.n_reactions)
    assert entropic_cost(j, mass_action_rates(net, eq.c_eq)) == pytest.approx(
        entropic_cost(transpose_flux(net, j), reversed_rates(net, eq.c_eq, eq)), rel=1e-12)


def test_integrated_time_reversal_converges(rng):
    net, eq = random_network(rng)
    res = []
    for n in (50, 100, 200):
        p = random_path(net, np.random.default_rng(1), eq.c_eq * 1.3, n_intervals=n)
        res.append(integrated_time_reversal(net, p, eq).residual)
    assert 3.0 < res[0] / res[1] < 5.0 and 3.0 < res[1] / res[2] < 5.0
    fine = random_path(net, np.random.default_rng(1), eq.c_eq * 1.3, n_intervals=3000)
    assert integrated_time_reversal(net, fine, eq).residual <= 1e-7


def test_integrated_time_reversal_constant_path(rng):
    net, eq = random_network(rng)
    c = random_interior_states(rng, eq.c_eq, 1)[0]
    p = constant_path(net, c, T=2.0)
    p = Path(p.grid, p.states, p.net_fluxes * 0, np.tile(mass_action_rates(net, c).max(), p.oneway_fluxes.shape))
    rep = integrated_time_reversal(net, p, eq)
    assert rep.residual <= 1e-12


def test_integrals_additive_under_concatenation(rng):
    net, eq = random_network(rng)
    p = random_path(net, rng, eq.c_eq, n_intervals=60)
    a = Path(p.grid[:31], p.states[:31], p.net_fluxes[:30], p.oneway_fluxes[:30])
    b = Path(p.grid[30:], p.states[30:], p.net_fluxes[30:], p.oneway_fluxes[30:])
    assert integrate_cost(net, p) == pytest.approx(integrate_cost(net, a) + integrate_cost(net, b), rel=1e-13)
    whole, pa, pb = fir_gap(net, p, eq), fir_gap(net, a, eq), fir_gap(net, b, eq)
    assert whole.gap == pytest.approx(pa.gap + pb.gap, rel=1e-10, abs=1e-13)
