"""Command-line front end: ``fluxnet <command> network.crn [options]``.

Exit codes: 0 success, 1 parse/validation failure, 2 simulation guard,
3 forces undefined (weak detailed balance), 4 verification failure,
5 input shape mismatch, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path as FsPath

import numpy as np

from .config import VerifyConfig, residual_tolerance
from .errors import (
    BoundaryStart,
    DimensionMismatch,
    ExplosionGuard,
    FluxnetError,
    ParseError,
    WeakDBViolated,
)
from .kinetics import Equilibrium, find_equilibrium, ode_solve, reversed_network
from .ldcost import state_report
from .netcore import Path, conservation_laws, stoich_matrix
from .netparse import parse_document, render_network
from .pathcheck import fir_asym_gap, fir_gap, integrate_cost, irreversible_work_bound
from .ssa import simulate, trajectory_csv, trajectory_meta, write_trajectory
from . import verify as verify_mod

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_GUARD = 2
EXIT_WEAK_DB = 3
EXIT_VERIFY = 4
EXIT_SHAPE = 5
EXIT_USAGE = 64
SCHEMA_VERSION = "1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _emit(obj, out=None):
    text = json.dumps(obj, indent=2) + "\n"
    if out:
        FsPath(out).write_text(text)
    else:
        sys.stdout.write(text)


def _fl(x):
    return [float(v) if math.isfinite(v) else None for v in np.asarray(x, dtype=float).tolist()]


def _load(path):
    try:
        data = FsPath(path).read_bytes()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    doc = parse_document(data)
    if doc.parsed is None:
        raise ParseError(doc.diagnostics)
    return doc


def _vector(doc, text, flag, positive=False):
    if not doc.has_header:
        raise UsageError(f"{flag} needs a 'species' header in the network file to fix the ordering")
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"{flag} must be comma-separated decimals, got {text!r}") from None
    net = doc.parsed
    if len(vals) != net.n_species:
        raise UsageError(f"{flag} has {len(vals)} entries, network has {net.n_species} species")
    v = np.array(vals)
    if not np.all(np.isfinite(v)) or np.any(v < 0) or (positive and np.any(v <= 0)):
        raise UsageError(f"{flag} entries must be finite and {'positive' if positive else 'nonnegative'}")
    return v


def _positive(value, flag):
    if not (value > 0 and math.isfinite(value)):
        raise UsageError(f"{flag} must be positive and finite")
    return value


def _equilibrium(doc, args, fallback=None):
    if getattr(args, "ceq", None):
        return Equilibrium.prescribed(doc.parsed, _vector(doc, args.ceq, "--ceq", positive=True))
    if getattr(args, "c0", None):
        return find_equilibrium(doc.parsed, _vector(doc, args.c0, "--c0"))
    if fallback is not None:
        return find_equilibrium(doc.parsed, fallback)
    raise UsageError("need --ceq or --c0 to fix the equilibrium")


def cmd_validate(args) -> int:
    net = _load(args.file).parsed
    G = stoich_matrix(net)
    print(f"species: {', '.join(net.species)}")
    print(f"reactions: {net.n_reactions} ({net.fw_count} forward)")
    print("stoichiometric matrix (species x reactions):")
    for name, row in zip(net.species, G):
        print(f"  {name:>8s} " + " ".join(f"{v:3d}" for v in row))
    M = conservation_laws(net)
    print("conservation laws:" + ("" if len(M) else " none"))
    for row in M:
        print("  " + " + ".join(f"{v}*{s}" for v, s in zip(row, net.species) if v))
    print("pairs (fw -> bw):")
    for r in range(net.fw_count):
        b = net.bw(r)
        tag = " (phantom)" if net.reactions[b].phantom else ""
        print(f"  {r} -> {b}{tag}")
    return EXIT_OK


def cmd_info(args) -> int:
    net = _load(args.file).parsed
    rx = []
    for i, r in enumerate(net.reactions):
        rx.append({
            "index": i, "reactants": list(r.reactants), "products": list(r.products),
            "omega": r.omega, "bw": net.bw(i), "phantom": r.phantom,
        })
    _emit({
        "schema_version": SCHEMA_VERSION,
        "species": list(net.species),
        "fw_count": net.fw_count,
        "reactions": rx,
        "conservation_laws": conservation_laws(net).tolist(),
    })
    return EXIT_OK


def cmd_simulate(args) -> int:
    doc = _load(args.file)
    V = _positive(args.volume, "--volume")
    T = _positive(args.tmax, "--tmax")
    c0 = _vector(doc, args.c0, "--c0")
    eq = _equilibrium(doc, args, c0) if args.reversed else None
    traj = simulate(doc.parsed, V, c0, T, args.seed, reversed_eq=eq)
    if args.out:
        write_trajectory(traj, args.out, args.seed)
    else:
        sys.stdout.write(trajectory_csv(traj))
        print(json.dumps(trajectory_meta(traj, args.seed), sort_keys=True), file=sys.stderr)
    return EXIT_OK


def cmd_ode(args) -> int:
    doc = _load(args.file)
    c0 = _vector(doc, args.c0, "--c0")
    path = ode_solve(doc.parsed, c0, _positive(args.tmax, "--tmax"), _positive(args.dt, "--dt"))
    _emit({"schema_version": SCHEMA_VERSION, **path.to_json()}, args.out)
    return EXIT_OK


def cmd_equilibrium(args) -> int:
    doc = _load(args.file)
    c0 = _vector(doc, args.c0, "--c0")
    eq = find_equilibrium(doc.parsed, c0, tol=args.tol)
    _emit({"schema_version": SCHEMA_VERSION, "c_eq": _fl(eq.c_eq), "residual": eq.residual,
           "conserved": _fl(eq.conserved_class)})
    return EXIT_OK


def cmd_decompose(args) -> int:
    doc = _load(args.file)
    c = _vector(doc, args.c, "--c")
    eq = _equilibrium(doc, args, c)
    rep = state_report(doc.parsed, c, eq)
    out = rep.to_json()
    out["c"] = _fl(c)
    out["c_eq"] = _fl(eq.c_eq)
    _emit(out)
    return EXIT_OK if rep.forces_defined else EXIT_WEAK_DB


def _read_path(net, path_file) -> Path:
    try:
        data = json.loads(FsPath(path_file).read_text())
    except OSError as e:
        raise UsageError(f"cannot read {path_file}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"{path_file} is not valid JSON: {e}") from None
    try:
        path = Path.from_json(data)
    except (KeyError, ValueError) as e:
        raise DimensionMismatch(f"malformed path file: {e}") from None
    path.check_shape(net)
    return path


def cmd_cost(args) -> int:
    doc = _load(args.file)
    net = doc.parsed
    path = _read_path(net, args.path)
    eq = _equilibrium(doc, args, path.states[0])
    mode = "reversed" if args.reversed else "forward"
    out = {"schema_version": SCHEMA_VERSION, "mode": mode, "action": integrate_cost(net, path, mode, eq)}
    try:
        rep = fir_gap(net, path, eq)
    except BoundaryStart as e:
        # the action is still meaningful; the FIR terms are not evaluated
        out["fir"] = {"error": str(e)}
    else:
        out.update(fisher_integral=rep.fisher_integral, boundary=rep.boundary, gap=rep.gap, fir=rep.to_json())
    _emit(out)
    return EXIT_OK


def cmd_fir(args) -> int:
    doc = _load(args.file)
    net = doc.parsed
    path = _read_path(net, args.path)
    eq = _equilibrium(doc, args, path.states[0])
    out = {"schema_version": SCHEMA_VERSION, "fir": fir_gap(net, path, eq).to_json()}
    for key, fn in (("fir_asym", fir_asym_gap), ("irreversible_work", irreversible_work_bound)):
        try:
            r = fn(net, path, eq)
            out[key] = {"lhs": r.lhs, "rhs": r.rhs, "gap": r.gap, "skipped": r.skipped}
        except FluxnetError as e:
            out[key] = {"error": str(e)}
    _emit(out)
    return EXIT_OK


def cmd_reverse_rates(args) -> int:
    doc = _load(args.file)
    eq = _equilibrium(doc, args)
    sys.stdout.write(render_network(reversed_network(doc.parsed, eq)))
    return EXIT_OK


def cmd_verify(args) -> int:
    doc = _load(args.file)
    net = doc.parsed
    if args.samples <= 0:
        raise UsageError("--samples must be positive")
    c0 = _vector(doc, args.c0, "--c0") if args.c0 else None
    eq = find_equilibrium(net, c0 if c0 is not None else np.ones(net.n_species))
    try:
        tol = residual_tolerance()
    except ValueError as e:
        raise UsageError(str(e)) from None
    cfg = VerifyConfig(samples=args.samples, seed=args.seed, tol=tol)
    rep = verify_mod.run(net, eq, cfg, (args.suite,), c0)
    print(rep.table())
    for r in rep.results:
        for row in r.table:
            print(f"  {r.name}: V={row[0]:g} mean={row[1]:.6e} max={row[2]:.6e}")
    if not rep.passed:
        print("failing suites: " + ", ".join(rep.failing), file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="fluxnet", description="Reaction-network flux/force toolkit.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("file", help="network in .crn format")
        sp.set_defaults(func=fn)
        return sp

    cmd("validate", cmd_validate, "parse and print structure")
    cmd("info", cmd_info, "network summary as JSON")

    sp = cmd("simulate", cmd_simulate, "stochastic simulation, trajectory CSV")
    sp.add_argument("--volume", type=float, required=True)
    sp.add_argument("--tmax", type=float, required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--c0", required=True)
    sp.add_argument("--out")
    sp.add_argument("--reversed", action="store_true", help="simulate the time-reversed generator")
    sp.add_argument("--ceq")

    sp = cmd("ode", cmd_ode, "rate-equation path as JSON")
    sp.add_argument("--c0", required=True)
    sp.add_argument("--tmax", type=float, required=True)
    sp.add_argument("--dt", type=float, default=1e-3)
    sp.add_argument("--out")

    sp = cmd("equilibrium", cmd_equilibrium, "positive equilibrium in the class of c0")
    sp.add_argument("--c0", required=True)
    sp.add_argument("--tol", type=float, default=1e-12)

    sp = cmd("decompose", cmd_decompose, "forces, Fisher informations and residuals at c")
    sp.add_argument("--c", required=True)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--ceq")
    g.add_argument("--c0")

    for name, fn, help_ in (("cost", cmd_cost, "action of a path"), ("fir", cmd_fir, "FIR gaps of a path")):
        sp = cmd(name, fn, help_)
        sp.add_argument("--path", required=True)
        g = sp.add_mutually_exclusive_group()
        g.add_argument("--ceq")
        g.add_argument("--c0")
        if name == "cost":
            sp.add_argument("--reversed", action="store_true")

    sp = cmd("reverse-rates", cmd_reverse_rates, "time-reversed network in .crn format")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--ceq")
    g.add_argument("--c0")

    sp = cmd("verify", cmd_verify, "property sweeps on one network")
    sp.add_argument("--samples", type=int, default=100)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--suite", default="all", choices=("all",) + verify_mod.SUITES)
    sp.add_argument("--c0")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"fluxnet: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as e:
        for line, col, msg in e.diagnostics:
            print(f"{args.file}:{line}:{col}: {msg}", file=sys.stderr)
        return EXIT_PARSE
    except ExplosionGuard as e:
        print(f"fluxnet: simulation guard: {e}", file=sys.stderr)
        return EXIT_GUARD
    except WeakDBViolated as e:
        print(f"fluxnet: {e}", file=sys.stderr)
        return EXIT_WEAK_DB
    except DimensionMismatch as e:
        print(f"fluxnet: shape mismatch: {e}", file=sys.stderr)
        return EXIT_SHAPE
    except (FluxnetError, ValueError) as e:
        print(f"fluxnet: {e}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
