"""Exact stochastic simulation of the reaction jump process at volume ``V``.

Direct-method Gillespie on integer copy numbers. Concentrations are
``counts / V`` and integrated fluxes are ``event counts / V``. The inner
loop is compiled with numba; random numbers come from a numpy
``Generator`` so that ``(seed, stream)`` fully determines a trajectory.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import Optional, Sequence

import numba
import numpy as np
from scipy import stats

from .errors import ExplosionGuard, NegativeCountBug
from .kinetics import Equilibrium, ode_solve, reversed_network
from .netcore import NetworkSpec, Path, conservation_laws
from .netparse import render_network

__all__ = [
    "Trajectory",
    "make_rng",
    "simulate",
    "reverse_path",
    "empirical_path",
    "convergence_study",
    "sample_stationary_counts",
    "time_reversal_ensembles",
    "time_reversal_test",
    "fnv1a_64",
    "trajectory_csv",
    "trajectory_meta",
    "write_trajectory",
    "read_trajectory",
]

DEFAULT_MAX_EVENTS = 10**8
_CHUNK = 1 << 15


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Independent reproducible generator for ``(seed, stream)``."""
    ss = np.random.SeedSequence(int(seed) & ((1 << 64) - 1), spawn_key=(int(stream),))
    return np.random.Generator(np.random.PCG64(ss))


def fnv1a_64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


@dataclass(frozen=True)
class Trajectory:
    net: NetworkSpec
    volume: float
    tmax: float
    jump_times: np.ndarray
    jump_reactions: np.ndarray
    initial_counts: np.ndarray

    @property
    def n_events(self) -> int:
        return len(self.jump_times)

    def event_counts(self) -> np.ndarray:
        """Number of firings of each reaction on ``[0, tmax]``."""
        return np.bincount(self.jump_reactions, minlength=self.net.n_reactions)

    def final_counts(self) -> np.ndarray:
        return self.initial_counts + self.net.gamma_matrix @ self.event_counts()

    def counts_path(self) -> np.ndarray:
        """Counts after each event, row 0 being the initial state."""
        steps = self.net.gamma_matrix.T[self.jump_reactions]
        out = np.empty((self.n_events + 1, self.net.n_species), dtype=np.int64)
        out[0] = self.initial_counts
        if self.n_events:
            out[1:] = self.initial_counts + np.cumsum(steps, axis=0)
        return out

    def integrated_flux(self, times) -> np.ndarray:
        """``W_r(t) = #{events of r in (0, t]} / V`` at each requested time."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        R = self.net.n_reactions
        out = np.zeros((len(times), R))
        for r in range(R):
            tr = self.jump_times[self.jump_reactions == r]
            out[:, r] = np.searchsorted(tr, times, side="right")
        return out / self.volume

    def counts_at(self, times) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        idx = np.searchsorted(self.jump_times, times, side="right")
        return self.counts_path()[idx]

    def concentration_at(self, times) -> np.ndarray:
        return self.counts_at(times) / self.volume


@numba.njit(cache=True)
def _ssa_chunk(counts, t, tmax, alpha, gamma_rows, wscale, u, times, rxns, n0):
    R, S = alpha.shape
    k = np.empty(R)
    n = n0
    iu = 0
    nu = u.shape[0]
    cap = times.shape[0]
    while iu + 1 < nu and n < cap:
        total = 0.0
        for r in range(R):
            p = wscale[r]
            if p > 0.0:
                for y in range(S):
                    cy = counts[y]
                    for i in range(alpha[r, y]):
                        p *= cy - i
                        if p <= 0.0:
                            break
                    if p <= 0.0:
                        p = 0.0
                        break
            k[r] = p
            total += p
        if total <= 0.0:
            return t, n, iu, 1
        tau = -np.log(1.0 - u[iu]) / total
        iu += 1
        t_new = t + tau
        if t_new > tmax:
            return tmax, n, iu, 2
        target = u[iu] * total
        iu += 1
        acc = 0.0
        sel = -1
        for r in range(R):
            acc += k[r]
            if target < acc and k[r] > 0.0:
                sel = r
                break
        if sel < 0:
            for r in range(R - 1, -1, -1):
                if k[r] > 0.0:
                    sel = r
                    break
        for y in range(S):
            counts[y] += gamma_rows[sel, y]
            if counts[y] < 0:
                return t, n, iu, 3
        t = t_new
        times[n] = t
        rxns[n] = sel
        n += 1
    return t, n, iu, 0


def _scaled_omega(net: NetworkSpec, V: float) -> np.ndarray:
    order = net.alpha.sum(axis=1)
    return net.omega * np.power(float(V), 1.0 - order)


def simulate(net: NetworkSpec, V: float, c0, T: float, seed: int, *,
             reversed_eq: Optional[Equilibrium] = None, stream: int = 0,
             max_events: int = DEFAULT_MAX_EVENTS, initial_counts=None) -> Trajectory:
    """Simulate one trajectory on ``[0, T]``.

    Initial copy numbers are ``round(V * c0)`` unless ``initial_counts`` is
    given. With ``reversed_eq`` the reversed generator is simulated, i.e.
    the mass-action network with the reversed rate constants.
    """
    if V <= 0:
        raise ValueError("volume must be positive")
    if T <= 0:
        raise ValueError("T must be positive")
    sim_net = reversed_network(net, reversed_eq) if reversed_eq is not None else net
    if initial_counts is None:
        initial_counts = np.rint(float(V) * np.asarray(c0, dtype=float))
    n0 = np.asarray(initial_counts, dtype=np.int64).copy()
    if n0.shape != (net.n_species,) or np.any(n0 < 0):
        raise ValueError("initial counts must be a nonnegative vector over species")
    rng = make_rng(seed, stream)
    alpha = np.ascontiguousarray(sim_net.alpha)
    gamma_rows = np.ascontiguousarray(sim_net.gamma_matrix.T)
    wscale = _scaled_omega(sim_net, V)
    counts = n0.copy()
    t = 0.0
    chunks_t, chunks_r = [], []
    total_events = 0
    chunk = 512
    while True:
        times = np.empty(chunk)
        rxns = np.empty(chunk, dtype=np.int64)
        u = rng.random(2 * chunk)
        chunk = min(2 * chunk, _CHUNK)
        t, n, _, status = _ssa_chunk(counts, t, float(T), alpha, gamma_rows, wscale, u, times, rxns, 0)
        if status == 3:
            raise NegativeCountBug("copy number went negative")
        chunks_t.append(times[:n])
        chunks_r.append(rxns[:n])
        total_events += n
        if total_events > max_events:
            raise ExplosionGuard(f"more than {max_events} events before T={T}")
        if status in (1, 2):
            break
    jt = np.concatenate(chunks_t) if chunks_t else np.empty(0)
    jr = np.concatenate(chunks_r) if chunks_r else np.empty(0, dtype=np.int64)
    jt.setflags(write=False)
    jr.setflags(write=False)
    return Trajectory(net, float(V), float(T), jt, jr, n0)


def reverse_path(traj: Trajectory, T: Optional[float] = None) -> Trajectory:
    """Time-reversed trajectory: event ``(t, r)`` becomes ``(T - t, bw(r))``.

    The reversed path starts from the final counts of ``traj``.
    """
    T = traj.tmax if T is None else float(T)
    times = (T - traj.jump_times)[::-1].copy()
    rxns = traj.net.bw_index[traj.jump_reactions][::-1].astype(np.int64)
    return Trajectory(traj.net, traj.volume, T, times, rxns, traj.final_counts())


def empirical_path(traj: Trajectory, grid) -> Path:
    """Sample ``C(t)`` on ``grid`` and record interval net fluxes ``dWbar/dt``."""
    grid = np.asarray(grid, dtype=float)
    c = traj.concentration_at(grid)
    W = traj.integrated_flux(grid)
    m = traj.net.fw_count
    Wbar = W[:, :m] - W[:, m:]
    jbar = np.diff(Wbar, axis=0) / np.diff(grid)[:, None]
    return Path(grid, c, jbar)


def convergence_study(net: NetworkSpec, c0, T: float, V_list: Sequence[float],
                      seeds: Sequence[int], n_eval: int = 2001, ode_dt: Optional[float] = None):
    """Sup-norm distance between SSA concentrations and the rate-equation solution.

    Returns one row per volume with keys ``V``, ``mean``, ``max``, ``errors``.
    The supremum is taken over ``n_eval`` uniformly spaced times.
    """
    grid = np.linspace(0.0, T, n_eval)
    dt = ode_dt if ode_dt is not None else T / (n_eval - 1)
    ref = ode_solve(net, c0, T, dt)
    c_ref = np.array([np.interp(grid, ref.grid, ref.states[:, y]) for y in range(net.n_species)]).T
    rows = []
    for V in V_list:
        errs = []
        for s in seeds:
            traj = simulate(net, V, c0, T, s)
            errs.append(float(np.abs(traj.concentration_at(grid) - c_ref).max()))
        errs = np.array(errs)
        rows.append({"V": float(V), "mean": float(errs.mean()), "max": float(errs.max()), "errors": errs})
    return rows


def sample_stationary_counts(net: NetworkSpec, eq: Equilibrium, V: float, reference_counts,
                             size: int, rng: np.random.Generator, max_batches: int = 10_000) -> np.ndarray:
    """Product-Poisson(``V c_eq``) samples restricted by rejection to the class of ``reference_counts``."""
    M = conservation_laws(net)
    target = M @ np.asarray(reference_counts, dtype=np.int64)
    lam = float(V) * eq.c_eq
    out = []
    have = 0
    batch = max(1024, 4 * size)
    for _ in range(max_batches):
        draw = rng.poisson(lam, size=(batch, net.n_species))
        if M.size:
            ok = np.all(draw @ M.T == target, axis=1)
            draw = draw[ok]
        out.append(draw)
        have += len(draw)
        if have >= size:
            break
    else:
        raise RuntimeError("rejection sampler did not produce enough samples")
    return np.concatenate(out)[:size]


def time_reversal_ensembles(net: NetworkSpec, eq: Equilibrium, V: float, T: float, n_traj: int,
                            seed: int):
    """Per-reaction event counts for the two ensembles compared in the reversal test.

    Ensemble A: forward trajectories from stationarity, then reversed.
    Ensemble B: trajectories of the reversed generator from stationarity.
    Stream 0 and 1 seed the two initial-condition samplers; trajectory ``i``
    of ensemble A uses stream ``2 + 2i``, ensemble B stream ``3 + 2i``.
    """
    ref = np.rint(V * eq.c_eq).astype(np.int64)
    init_a = sample_stationary_counts(net, eq, V, ref, n_traj, make_rng(seed, 0))
    init_b = sample_stationary_counts(net, eq, V, ref, n_traj, make_rng(seed, 1))
    R = net.n_reactions
    a = np.empty((n_traj, R), dtype=np.int64)
    b = np.empty((n_traj, R), dtype=np.int64)
    for i in range(n_traj):
        fwd = simulate(net, V, None, T, seed, stream=2 + 2 * i, initial_counts=init_a[i])
        a[i] = reverse_path(fwd).event_counts()
        rev = simulate(net, V, None, T, seed, stream=3 + 2 * i, initial_counts=init_b[i],
                       reversed_eq=eq)
        b[i] = rev.event_counts()
    return a, b


def _binned_chi2(x: np.ndarray, y: np.ndarray, min_expected: float = 5.0) -> float:
    # two-sample chi-square on a shared histogram, merging sparse tail bins
    lo = min(x.min(), y.min())
    hi = max(x.max(), y.max())
    edges = np.arange(lo, hi + 2)
    hx, _ = np.histogram(x, edges)
    hy, _ = np.histogram(y, edges)
    table = np.vstack([hx, hy]).astype(float)
    merged = []
    acc = np.zeros(2)
    for col in table.T:
        acc = acc + col
        if acc.sum() * min(len(x), len(y)) / (len(x) + len(y)) >= min_expected:
            merged.append(acc)
            acc = np.zeros(2)
    if acc.sum() > 0:
        if merged:
            merged[-1] = merged[-1] + acc
        else:
            merged.append(acc)
    table = np.array(merged).T
    if table.shape[1] < 2:
        return 1.0
    return float(stats.chi2_contingency(table, correction=False)[1])


def time_reversal_test(net: NetworkSpec, eq: Equilibrium, V: float, T: float, n_traj: int, seed: int):
    """Chi-square comparison of reversed-forward vs forward-reversed jump counts.

    Returns ``(per-reaction p-values, Bonferroni-combined p-value)``; reactions
    that never fire in either ensemble get p = 1.
    """
    a, b = time_reversal_ensembles(net, eq, V, T, n_traj, seed)
    pvals = []
    for r in range(net.n_reactions):
        if a[:, r].max() == 0 and b[:, r].max() == 0:
            pvals.append(1.0)
        else:
            pvals.append(_binned_chi2(a[:, r], b[:, r]))
    active = sum(1 for r in range(net.n_reactions) if a[:, r].max() > 0 or b[:, r].max() > 0)
    combined = min(1.0, max(active, 1) * min(pvals)) if pvals else 1.0
    return np.array(pvals), combined


def trajectory_csv(traj: Trajectory) -> str:
    """``t,reaction_index`` rows, times written with ``repr`` for exact round trips."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "reaction_index"])
    for t, r in zip(traj.jump_times.tolist(), traj.jump_reactions.tolist()):
        w.writerow([repr(t), r])
    return buf.getvalue()


def trajectory_meta(traj: Trajectory, seed: int) -> dict:
    return {
        "schema_version": "1",
        "V": traj.volume,
        "T": traj.tmax,
        "seed": int(seed),
        "initial_counts": [int(x) for x in traj.initial_counts],
        "network_hash": f"{fnv1a_64(render_network(traj.net).encode('utf-8')):016x}",
    }


def write_trajectory(traj: Trajectory, csv_path, seed: int) -> FsPath:
    """Write the CSV and a JSON sidecar (same stem, ``.json``); returns the sidecar path."""
    csv_path = FsPath(csv_path)
    csv_path.write_text(trajectory_csv(traj))
    side = csv_path.with_suffix(".json")
    side.write_text(json.dumps(trajectory_meta(traj, seed), indent=2, sort_keys=True) + "\n")
    return side


def read_trajectory(net: NetworkSpec, csv_path) -> Trajectory:
    csv_path = FsPath(csv_path)
    meta = json.loads(csv_path.with_suffix(".json").read_text())
    times, rxns = [], []
    with open(csv_path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if header != ["t", "reaction_index"]:
            raise ValueError(f"unexpected trajectory header {header}")
        for row in rd:
            times.append(float(row[0]))
            rxns.append(int(row[1]))
    return Trajectory(net, float(meta["V"]), float(meta["T"]), np.array(times),
                      np.array(rxns, dtype=np.int64), np.array(meta["initial_counts"], dtype=np.int64))
