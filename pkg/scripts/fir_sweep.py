"""Inequality gaps on random paths of random complex-balanced networks.

    python3 scripts/fir_sweep.py --networks 10 --paths 20
"""

import argparse
import time

import numpy as np

from fluxnet.config import FirSweepConfig
from fluxnet.pathcheck import fir_asym_gap, fir_gap, irreversible_work_bound
from fluxnet.sampling import random_interior_states, random_network, random_path


def main():
    cfg = FirSweepConfig()
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--networks", type=int, default=cfg.n_networks)
    ap.add_argument("--paths", type=int, default=cfg.paths_per_network)
    ap.add_argument("--intervals", type=int, default=cfg.n_intervals)
    ap.add_argument("--seed", type=int, default=cfg.seed)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    checks = {"fir": fir_gap, "fir_asym": fir_asym_gap, "work": irreversible_work_bound}
    gaps = {k: [] for k in checks}
    t0 = time.perf_counter()
    for _ in range(args.networks):
        net, eq = random_network(rng)
        for c0 in random_interior_states(rng, eq.c_eq, args.paths, 0.5):
            p = random_path(net, rng, c0, cfg.T, args.intervals, cfg.amplitude, cfg.kernel_scale)
            for k, fn in checks.items():
                gaps[k].append(fn(net, p, eq).gap)
    print(f"{'check':<10s} {'n':>6s} {'min gap':>12s} {'median':>12s}")
    for k, g in gaps.items():
        g = np.array(g)
        print(f"{k:<10s} {g.size:6d} {g.min():12.4e} {np.median(g):12.4e}")
    print(f"elapsed {time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
