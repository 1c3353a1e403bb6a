"""Worst residuals of the pointwise identities over random networks and states.

    python3 scripts/identity_sweep.py --networks 50 --states 100
"""

import argparse
import time

import numpy as np

from fluxnet.config import SweepConfig
from fluxnet.kinetics import check_rate_relations, mass_action_rates, reversed_rates
from fluxnet.ldcost import decomposition_residuals, mobility
from fluxnet.pathcheck import time_reversal_residual
from fluxnet.sampling import NetworkSampler, random_interior_states, random_network


def main():
    cfg = SweepConfig()
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--networks", type=int, default=cfg.n_networks)
    ap.add_argument("--states", type=int, default=cfg.states_per_network)
    ap.add_argument("--seed", type=int, default=cfg.seed)
    ap.add_argument("--detailed-balance", action="store_true")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    sampler = NetworkSampler(cfg.species, cfg.pairs, detailed_balance=args.detailed_balance)
    worst = {}
    t0 = time.perf_counter()
    for _ in range(args.networks):
        net, eq = random_network(rng, sampler)
        for c in random_interior_states(rng, eq.c_eq, args.states):
            kap = mass_action_rates(net, c)
            jbar = rng.normal(size=net.fw_count) * (1.0 + mobility(net, kap))
            res = decomposition_residuals(net, kap, reversed_rates(net, c, eq), jbar, np.log(c / eq.c_eq))
            res = {k: v for k, v in res.items() if v is not None}
            res.update(check_rate_relations(net, c, eq))
            j = kap * np.exp(rng.normal(size=net.n_reactions))
            res["time_reversal"] = time_reversal_residual(net, c, j, eq)
            for k, v in res.items():
                worst[k] = max(worst.get(k, 0.0), v)
    for k, v in sorted(worst.items(), key=lambda kv: -kv[1]):
        print(f"{k:<22s} {v:.3e}")
    print(f"elapsed {time.perf_counter() - t0:.1f} s")


if __name__ == "__main__":
    main()
