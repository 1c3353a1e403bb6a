"""Stoichiometric data model: species, paired reactions, flux algebra.

Reactions are stored with the forward block first: reaction ``r`` and
``r + fw_count`` form a forward/backward pair with opposite state-change
vectors. A backward partner that does not occur physically is kept as a
*phantom* reaction with rate constant zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, NetworkError

__all__ = [
    "Reaction",
    "NetworkSpec",
    "Path",
    "build_network",
    "stoich_matrix",
    "conservation_laws",
    "net_of_oneway",
    "transpose_flux",
]


@dataclass(frozen=True)
class Reaction:
    """One directed reaction ``reactants -> products`` with mass-action constant ``omega``."""

    reactants: tuple[int, ...]
    products: tuple[int, ...]
    omega: float

    @property
    def gamma(self) -> tuple[int, ...]:
        return tuple(b - a for a, b in zip(self.reactants, self.products))

    @property
    def phantom(self) -> bool:
        return self.omega == 0.0


@dataclass(frozen=True)
class NetworkSpec:
    species: tuple[str, ...]
    reactions: tuple[Reaction, ...]
    fw_count: int

    def __post_init__(self):
        if len(set(self.species)) != len(self.species):
            raise NetworkError("duplicate species name")
        if len(self.reactions) != 2 * self.fw_count:
            raise NetworkError("reactions must come in forward/backward pairs")
        n = len(self.species)
        for r in self.reactions:
            if len(r.reactants) != n or len(r.products) != n:
                raise NetworkError("coefficient vector length does not match species count")
            if any(int(a) != a or a < 0 for a in r.reactants + r.products):
                raise NetworkError("stoichiometric coefficients must be nonnegative integers")
            if not (r.omega >= 0.0) or not np.isfinite(r.omega):
                raise NetworkError(f"rate constant must be finite and nonnegative, got {r.omega}")
        for k in range(self.fw_count):
            f, b = self.reactions[k], self.reactions[k + self.fw_count]
            if f.reactants != b.products or f.products != b.reactants:
                raise NetworkError(f"pair {k}: backward reaction is not the reverse of the forward one")

    @property
    def n_species(self) -> int:
        return len(self.species)

    @property
    def n_reactions(self) -> int:
        return len(self.reactions)

    def bw(self, r: int) -> int:
        """Index of the partner reaction of ``r`` (an involution)."""
        return r + self.fw_count if r < self.fw_count else r - self.fw_count

    @cached_property
    def bw_index(self) -> np.ndarray:
        m = self.fw_count
        return np.concatenate([np.arange(m, 2 * m), np.arange(m)]).astype(np.intp)

    @cached_property
    def alpha(self) -> np.ndarray:
        """Reactant matrix, shape (reactions, species)."""
        return np.array([r.reactants for r in self.reactions], dtype=np.int64).reshape(
            self.n_reactions, self.n_species
        )

    @cached_property
    def beta(self) -> np.ndarray:
        return np.array([r.products for r in self.reactions], dtype=np.int64).reshape(
            self.n_reactions, self.n_species
        )

    @cached_property
    def omega(self) -> np.ndarray:
        return np.array([r.omega for r in self.reactions], dtype=float)

    @cached_property
    def gamma_matrix(self) -> np.ndarray:
        """Integer matrix with column ``r`` equal to the state change of reaction ``r``."""
        return (self.beta - self.alpha).T.copy()

    @cached_property
    def gamma_fw(self) -> np.ndarray:
        return self.gamma_matrix[:, : self.fw_count]

    def species_index(self, name: str) -> int:
        return self.species.index(name)

    def with_omega(self, omega: Sequence[float]) -> "NetworkSpec":
        """Same stoichiometry, new rate constants (one per reaction)."""
        omega = [float(w) for w in omega]
        if len(omega) != self.n_reactions:
            raise DimensionMismatch("need one rate constant per reaction")
        rxns = tuple(Reaction(r.reactants, r.products, w) for r, w in zip(self.reactions, omega))
        return NetworkSpec(self.species, rxns, self.fw_count)


def build_network(species, pairs) -> NetworkSpec:
    """Build a network from ``(alpha, beta, omega_fw, omega_bw)`` tuples.

    Each tuple yields the forward reaction ``alpha -> beta`` and its reverse
    ``beta -> alpha``; a zero ``omega_bw`` makes the reverse a phantom.
    """
    species = tuple(str(s) for s in species)
    n = len(species)
    fw, bw = [], []
    for k, (alpha, beta, w_fw, w_bw) in enumerate(pairs):
        alpha = tuple(int(a) for a in alpha)
        beta = tuple(int(b) for b in beta)
        if len(alpha) != n or len(beta) != n:
            raise NetworkError(f"pair {k}: expected {n} coefficients")
        w_fw, w_bw = float(w_fw), float(w_bw)
        if w_fw < 0 or w_bw < 0:
            raise NetworkError(f"pair {k}: negative rate constant")
        fw.append(Reaction(alpha, beta, w_fw))
        bw.append(Reaction(beta, alpha, w_bw))
    return NetworkSpec(species, tuple(fw + bw), len(fw))


def stoich_matrix(net: NetworkSpec) -> np.ndarray:
    return net.gamma_matrix.copy()


def _left_kernel_rational(G: np.ndarray) -> list[list[Fraction]]:
    # reduced row echelon form of G^T over Q; kernel of G^T = left kernel of G
    A = [[Fraction(int(x)) for x in row] for row in np.asarray(G).T]
    ncols = G.shape[0]
    pivots = []
    row = 0
    for col in range(ncols):
        piv = next((i for i in range(row, len(A)) if A[i][col] != 0), None)
        if piv is None:
            continue
        A[row], A[piv] = A[piv], A[row]
        p = A[row][col]
        A[row] = [x / p for x in A[row]]
        for i in range(len(A)):
            if i != row and A[i][col] != 0:
                f = A[i][col]
                A[i] = [x - f * y for x, y in zip(A[i], A[row])]
        pivots.append(col)
        row += 1
        if row == len(A):
            break
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [Fraction(0)] * ncols
        v[fcol] = Fraction(1)
        for i, pcol in enumerate(pivots):
            v[pcol] = -A[i][fcol]
        basis.append(v)
    return basis


def conservation_laws(net: NetworkSpec) -> np.ndarray:
    """Integer basis of the left kernel of the stoichiometric matrix.

    Computed exactly over the rationals; each basis vector is scaled to the
    smallest integer vector with a positive leading entry. Returns an array of
    shape (k, species); ``k == 0`` when no linear quantity is conserved.
    """
    basis = _left_kernel_rational(net.gamma_matrix)
    out = []
    for v in basis:
        den = 1
        for x in v:
            den = den * x.denominator // gcd(den, x.denominator)
        ints = [int(x * den) for x in v]
        g = 0
        for x in ints:
            g = gcd(g, abs(x))
        ints = [x // g for x in ints]
        lead = next(x for x in ints if x != 0)
        if lead < 0:
            ints = [-x for x in ints]
        out.append(ints)
    return np.array(out, dtype=np.int64).reshape(len(out), net.n_species)


def net_of_oneway(net: NetworkSpec, j) -> np.ndarray:
    """Net flux ``j_r - j_bw(r)`` over forward reactions (last axis)."""
    j = np.asarray(j, dtype=float)
    m = net.fw_count
    return j[..., :m] - j[..., m:]


def transpose_flux(net: NetworkSpec, j) -> np.ndarray:
    """Swap each forward entry with its backward partner."""
    j = np.asarray(j, dtype=float)
    return j[..., net.bw_index]


@dataclass
class Path:
    """Time-discretized macroscopic path.

    ``states`` has one row per grid point, ``net_fluxes`` one row per interval
    (piecewise constant); ``oneway_fluxes`` is optional and, when present,
    must reproduce ``net_fluxes`` under :func:`net_of_oneway`.
    """

    grid: np.ndarray
    states: np.ndarray
    net_fluxes: np.ndarray
    oneway_fluxes: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        self.net_fluxes = np.asarray(self.net_fluxes, dtype=float)
        if self.oneway_fluxes is not None:
            self.oneway_fluxes = np.asarray(self.oneway_fluxes, dtype=float)
        n = len(self.grid)
        if n < 2 or np.any(np.diff(self.grid) <= 0):
            raise DimensionMismatch("grid must be strictly increasing with at least two points")
        if self.states.ndim != 2 or self.states.shape[0] != n:
            raise DimensionMismatch("need one state per grid point")
        if self.net_fluxes.ndim != 2 or self.net_fluxes.shape[0] != n - 1:
            raise DimensionMismatch("need one net flux per interval")
        if self.oneway_fluxes is not None and (
            self.oneway_fluxes.ndim != 2 or self.oneway_fluxes.shape[0] != n - 1
        ):
            raise DimensionMismatch("need one one-way flux per interval")

    @property
    def dt(self) -> np.ndarray:
        return np.diff(self.grid)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.states[1:] + self.states[:-1])

    @property
    def T(self) -> float:
        return float(self.grid[-1] - self.grid[0])

    def check_shape(self, net: NetworkSpec) -> None:
        if self.states.shape[1] != net.n_species:
            raise DimensionMismatch(
                f"path has {self.states.shape[1]} species, network has {net.n_species}"
            )
        if self.net_fluxes.shape[1] != net.fw_count:
            raise DimensionMismatch(
                f"path has {self.net_fluxes.shape[1]} net fluxes, network has {net.fw_count} pairs"
            )
        if self.oneway_fluxes is not None and self.oneway_fluxes.shape[1] != net.n_reactions:
            raise DimensionMismatch("one-way flux width does not match reaction count")

    def continuity_residual(self, net: NetworkSpec) -> float:
        """Max relative violation of ``c[i+1]-c[i] = Gamma_fw jbar[i] dt[i]``."""
        dc = np.diff(self.states, axis=0)
        pred = (self.net_fluxes @ net.gamma_fw.T) * self.dt[:, None]
        scale = 1.0 + np.abs(self.states).max()
        return float(np.abs(dc - pred).max() / scale) if dc.size else 0.0

    def to_json(self) -> dict:
        d = {
            "grid": self.grid.tolist(),
            "states": self.states.tolist(),
            "net_fluxes": self.net_fluxes.tolist(),
        }
        if self.oneway_fluxes is not None:
            d["oneway_fluxes"] = self.oneway_fluxes.tolist()
        return d

    @classmethod
    def from_json(cls, d: dict) -> "Path":
        jbar = np.asarray(d["net_fluxes"], dtype=float)
        if jbar.ndim != 2:
            jbar = jbar.reshape(len(d["grid"]) - 1, 0)
        return cls(
            grid=d["grid"],
            states=d["states"],
            net_fluxes=jbar,
            oneway_fluxes=d.get("oneway_fluxes"),
        )
