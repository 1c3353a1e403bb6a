"""Sup-norm distance between stochastic and rate-equation paths as the volume grows.

    python3 scripts/kurtz_convergence.py --volumes 1e2 1e3 1e4
"""

import argparse

import numpy as np

from fluxnet.config import KurtzConfig
from fluxnet.netcore import build_network
from fluxnet.ssa import convergence_study


def main():
    cfg = KurtzConfig()
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--volumes", type=float, nargs="+", default=list(cfg.volumes))
    ap.add_argument("--seeds", type=int, default=len(cfg.seeds))
    ap.add_argument("--tmax", type=float, default=cfg.T)
    args = ap.parse_args()

    net = build_network(["A", "B"], [((1, 0), (0, 1), cfg.kf, cfg.kb)])
    rows = convergence_study(net, cfg.c0, args.tmax, args.volumes, range(args.seeds), cfg.n_eval)
    print(f"{'V':>10s} {'mean sup err':>14s} {'max':>12s} {'mean*sqrt(V)':>14s}")
    for r in rows:
        print(f"{r['V']:10.0f} {r['mean']:14.4e} {r['max']:12.4e} {r['mean'] * np.sqrt(r['V']):14.4f}")
    means = np.array([r["mean"] for r in rows])
    slope = np.polyfit(np.log(args.volumes), np.log(means), 1)[0]
    print(f"fitted decay exponent {slope:.3f} (diffusive scaling gives -0.5)")


if __name__ == "__main__":
    main()
