"""Random instances for property sweeps: networks, interior states, paths.

Random networks are built complex-balanced at a chosen positive ``c_eq``:
pick complexes and edges between them, pick a symmetric edge flux plus a
random circulation on the complex graph, and set the rate constants so
that ``kappa(c_eq)`` reproduces those fluxes. Circulations on cycles of the
complex graph break detailed balance while keeping ``c_eq`` stationary.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .kinetics import Equilibrium, mass_action_rates, reversed_rates
from .netcore import NetworkSpec, Path, build_network

__all__ = [
    "NetworkSampler",
    "random_network",
    "random_interior_states",
    "random_path",
    "work_equality_path",
    "two_state_example",
    "two_channel_network",
]


@dataclass
class NetworkSampler:
    species: tuple[int, int] = (2, 6)
    pairs: tuple[int, int] = (1, 5)
    max_complex_size: int = 3
    ceq_range: tuple[float, float] = (0.3, 3.0)
    symmetric_flux: tuple[float, float] = (0.2, 1.5)
    circulation: float = 1.0
    detailed_balance: bool = False


def _random_complexes(rng, n_species, n_complexes, max_size):
    for _ in range(1000):
        cx = []
        while len(cx) < n_complexes:
            size = rng.integers(1, max_size + 1)
            v = np.zeros(n_species, dtype=int)
            for y in rng.integers(0, n_species, size):
                v[y] += 1
            if not any(np.array_equal(v, w) for w in cx):
                cx.append(v)
        # every species should appear somewhere
        missing = [y for y in range(n_species) if all(w[y] == 0 for w in cx)]
        for y in missing:
            cx[rng.integers(len(cx))][y] += 1
        if len({tuple(w) for w in cx}) == len(cx):
            return cx
    raise RuntimeError("could not draw distinct complexes")


def random_network(rng: np.random.Generator, cfg: NetworkSampler | None = None):
    """Draw a complex-balanced mass-action network and its equilibrium.

    Returns ``(net, Equilibrium)``; with ``cfg.detailed_balance`` the
    circulation is switched off, giving a Wegscheider-consistent network.
    """
    cfg = cfg or NetworkSampler()
    S = int(rng.integers(cfg.species[0], cfg.species[1] + 1))
    P = int(rng.integers(cfg.pairs[0], cfg.pairs[1] + 1))
    m = int(rng.integers(2, P + 2))
    cx = _random_complexes(rng, S, m, cfg.max_complex_size)
    order = rng.permutation(m)
    edges = []
    for i in range(1, m):
        edges.append((order[i], order[rng.integers(0, i)]))
    while len(edges) < P:
        a, b = rng.choice(m, 2, replace=False)
        edges.append((a, b))
    edges = [(a, b) if rng.random() < 0.5 else (b, a) for a, b in edges]
    E = len(edges)
    B = np.zeros((m, E))
    for e, (a, b) in enumerate(edges):
        B[a, e] -= 1.0
        B[b, e] += 1.0
    cycles = linalg.null_space(B)
    J = np.zeros(E)
    if cycles.size and not cfg.detailed_balance:
        J = cycles @ rng.normal(0.0, cfg.circulation, cycles.shape[1])
    s = rng.uniform(*cfg.symmetric_flux, E)
    f_fw = s + np.maximum(J, 0.0)
    f_bw = s + np.maximum(-J, 0.0)
    ceq = rng.uniform(*cfg.ceq_range, S)
    pairs = []
    for e, (a, b) in enumerate(edges):
        alpha, beta = cx[a], cx[b]
        w_fw = f_fw[e] / np.prod(ceq**alpha)
        w_bw = f_bw[e] / np.prod(ceq**beta)
        pairs.append((alpha, beta, w_fw, w_bw))
    net = build_network([f"S{i}" for i in range(S)], pairs)
    return net, Equilibrium.prescribed(net, ceq)


def random_interior_states(rng: np.random.Generator, ceq, n: int, spread: float = 1.0) -> np.ndarray:
    """``c = c_eq * exp(U(-spread, spread))`` componentwise."""
    ceq = np.asarray(ceq, dtype=float)
    return ceq * np.exp(rng.uniform(-spread, spread, (n, len(ceq))))


def _trig(rng, t, T, n_modes, width):
    out = np.zeros((len(t), width))
    for k in range(1, n_modes + 1):
        a = rng.normal(0, 1.0 / k, width)
        b = rng.normal(0, 1.0 / k, width)
        ph = 2 * np.pi * k * t[:, None] / T
        out += a * np.sin(ph) + b * np.cos(ph)
    return out


def random_path(net: NetworkSpec, rng: np.random.Generator, c0, T: float = 1.0, n_intervals: int = 200,
                amplitude: float = 0.5, kernel_scale: float = 1.0, n_modes: int = 3,
                oneway: bool = True) -> Path:
    """Smooth positive path in the conserved class of ``c0``.

    Concentrations follow ``c0 + P(c0 exp(trig(t)) - c0)`` with ``P`` the
    orthogonal projector onto the stoichiometric subspace (so the class is
    preserved). Net fluxes are back-solved from discrete continuity with the
    pseudo-inverse plus a random component in ``ker Gamma_fw``; one-way
    fluxes add a smooth positive symmetric part.
    """
    c0 = np.asarray(c0, dtype=float)
    Gf = net.gamma_fw.astype(float)
    grid = np.linspace(0.0, T, n_intervals + 1)
    if Gf.size:
        U, s, _ = linalg.svd(Gf, full_matrices=False)
        rank = int(np.sum(s > 1e-10 * max(s.max(), 1.0)))
        Q = U[:, :rank]
    else:
        Q = np.zeros((net.n_species, 0))
    shape = _trig(rng, grid, T, n_modes, net.n_species)
    amp = amplitude
    for _ in range(60):
        z = c0 * np.exp(amp * shape)
        states = c0 + (z - c0) @ Q @ Q.T
        if np.all(states > 0.05 * c0.min()):
            break
        amp *= 0.5
    else:  # pragma: no cover
        states = np.tile(c0, (len(grid), 1))
    dt = np.diff(grid)
    dc = np.diff(states, axis=0) / dt[:, None]
    jbar = dc @ np.linalg.pinv(Gf).T if Gf.size else np.zeros((n_intervals, 0))
    K = linalg.null_space(Gf) if net.fw_count else np.zeros((0, 0))
    if K.size:
        mid = 0.5 * (grid[1:] + grid[:-1])
        theta = kernel_scale * _trig(rng, mid, T, n_modes, K.shape[1])
        jbar = jbar + theta @ K.T
    # snap states to the exact discrete-continuity recursion
    states = np.vstack([states[:1], states[0] + np.cumsum(jbar @ Gf.T * dt[:, None], axis=0)])
    ow = None
    if oneway:
        mid = 0.5 * (grid[1:] + grid[:-1])
        sym = 0.5 * np.exp(0.5 * _trig(rng, mid, T, n_modes, net.fw_count))
        jf = 0.5 * (jbar + np.sqrt(jbar**2 + 4 * sym**2))
        ow = np.hstack([jf, jf - jbar])
    return Path(grid, states, jbar, ow)


def work_equality_path(net: NetworkSpec, eq: Equilibrium, c0, T: float = 1.0, n_intervals: int = 200,
                       iters: int = 100) -> Path:
    """Path on which the irreversible-work bound is tight interval by interval.

    Each interval flux solves ``jbar = 2 sigma(c*) sinh(F_asym(c*))`` at its own
    midpoint ``c* = c_i + Gamma_fw jbar dt / 2`` by fixed-point iteration.
    """
    c = np.asarray(c0, dtype=float)
    Gf = net.gamma_fw.astype(float)
    m = net.fw_count
    grid = np.linspace(0.0, T, n_intervals + 1)
    states = [c]
    fluxes = []
    for h in np.diff(grid):
        jb = np.zeros(m)
        for _ in range(iters):
            mid = c + 0.5 * h * (Gf @ jb)
            k = mass_action_rates(net, mid)
            rb = reversed_rates(net, mid, eq)[m:]
            sigma = np.sqrt(k[:m] * k[m:])
            # 2 sigma sinh(1/2 log(rb/kb)) = sigma (sqrt(rb/kb) - sqrt(kb/rb))
            new = np.sqrt(k[:m]) * (np.sqrt(rb) - k[m:] / np.sqrt(rb))
            new = np.where(sigma > 0, new, 0.0)
            if np.max(np.abs(new - jb), initial=0.0) <= 1e-15 * (1.0 + np.abs(new).max(initial=0.0)):
                jb = new
                break
            jb = new
        c = c + h * (Gf @ jb)
        states.append(c)
        fluxes.append(jb)
    return Path(grid, np.array(states), np.array(fluxes).reshape(n_intervals, m))


def two_state_example(a12: float, a21: float, ceq):
    """Two species, ``1 <-> 2`` with ``kappa_xy(c) = a_xy c_x / c_x^eq``.

    ``ceq`` is a prescribed reference state; it is stationary only when
    ``a12 == a21``.
    """
    ceq = np.asarray(ceq, dtype=float)
    net = build_network(["X1", "X2"], [((1, 0), (0, 1), a12 / ceq[0], a21 / ceq[1])])
    return net, Equilibrium.prescribed(net, ceq)


def two_channel_network(k1f: float = 3.0, k1b: float = 1.0, k2f: float = 3.0, k2b: float = 1.0) -> NetworkSpec:
    """Two species joined by two parallel reversible channels ``A <-> B`` and ``B <-> A``.

    With the defaults the equilibrium ``(1, 1)`` is complex balanced but not
    detailed balanced: each channel carries a net flux of 2 around the cycle.
    Setting ``k2b = 0`` makes the second channel one-way.
    """
    return build_network(["A", "B"], [((1, 0), (0, 1), k1f, k1b), ((0, 1), (1, 0), k2f, k2b)])
