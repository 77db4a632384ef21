"""Command-line front end.

Subcommands:

    simulate     run a map/flow trajectory, write trajectory + drift CSVs
    invariants   print/write the spectral invariants of a seeded state
    verify       run registered property checks, write a JSON report
    dump-lax     write the Lax matrices of a state as row-major JSON
    consistency  Monte-Carlo cube-consistency sweep

A flat INI-style config file (``--config``) may supply any option; explicit
flags win.  All numeric output uses 17 significant digits so files
round-trip exactly; identical config + seed gives byte-identical output.

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys

import numpy as np

from . import lax, pluri, verify
from .flows import rk4_trajectory
from .core import (Boundary, CanonicalState, FlaschkaState, load_state,
                   random_canonical, random_state, state_to_json)
from .errors import NumericalError
from .realizations import CATALOG, canonical_step, flaschka_of, realization

_F = "{:.17g}"


def _fmt(x) -> str:
    return _F.format(float(x))


def _boundary(text: str) -> Boundary:
    try:
        return Boundary(text)
    except ValueError:
        raise SystemExit2(f"unknown boundary {text!r} (use open|periodic)")


class SystemExit2(Exception):
    """Validation failure mapped to exit code 2."""


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="todalab",
                                description="discrete Toda lattice laboratory")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="flat INI config file; flags override it")
        sp.add_argument("--system", default="dtl")
        sp.add_argument("--realization", default=None)
        sp.add_argument("--n", type=int, default=6)
        sp.add_argument("--boundary", default="open")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--h", type=float, default=0.05)
        sp.add_argument("--alpha", type=float, default=0.3)
        sp.add_argument("--epsilon", type=float, default=0.2)
        sp.add_argument("--beta", type=float, default=0.1)
        sp.add_argument("--lambda", dest="lam", type=float, default=1.0)
        sp.add_argument("--mu", type=float, default=0.2)
        sp.add_argument("--steps", type=int, default=100)
        sp.add_argument("--out", default=None)
        sp.add_argument("--state", default=None,
                        help="JSON state file overriding n/boundary/seed")
        sp.add_argument("--filter", dest="filter_glob", default="*")

    for name in ("simulate", "invariants", "verify", "dump-lax", "consistency"):
        common(sub.add_parser(name))
    return p


_CONFIG_KEYS = {"system": str, "realization": str, "n": int, "boundary": str,
                "seed": int, "h": float, "alpha": float, "epsilon": float,
                "beta": float, "lambda": float, "mu": float, "steps": int,
                "out": str, "state": str, "filter": str}
_DEST = {"lambda": "lam", "filter": "filter_glob"}


def _apply_config(args, argv):
    if not args.config:
        return args
    parser = configparser.ConfigParser()
    text = open(args.config, "r", encoding="utf-8").read()
    if not text.lstrip().startswith("["):
        text = "[run]\n" + text
    parser.read_string(text)
    section = parser[parser.sections()[0]]
    explicit = {tok.split("=")[0].lstrip("-") for tok in argv if tok.startswith("--")}
    for key, value in section.items():
        if key not in _CONFIG_KEYS:
            raise SystemExit2(f"unknown config key {key!r}")
        if key in explicit or _DEST.get(key, key) in explicit:
            continue   # flags win
        setattr(args, _DEST.get(key, key), _CONFIG_KEYS[key](value))
    return args


def _initial_state(args) -> FlaschkaState:
    if args.state:
        state = load_state(args.state)
        if not isinstance(state, FlaschkaState):
            raise SystemExit2("state file must hold (a, b) variables")
        return state
    return random_state(args.n, _boundary(args.boundary), args.seed)


def _chart_spec(args):
    return realization(args.realization, args.h, alpha=args.alpha,
                       epsilon=args.epsilon, beta=args.beta)


def _initial_canonical(args, spec) -> CanonicalState:
    if args.state:
        state = load_state(args.state)
        if not isinstance(state, CanonicalState):
            raise SystemExit2("state file must hold (x, p) variables")
        return state
    boundary = _boundary(args.boundary)
    if boundary is Boundary.OPEN and not spec.supports_open:
        raise SystemExit2(f"chart {spec.name} is periodic-only")
    if spec.ordered_domain:
        return random_canonical(args.n, boundary, args.seed, increasing=True,
                                gap_range=(0.8, 1.6), p_range=(0.6, 1.4))
    if spec.name in ("dual", "rel-dual", "explicit-c"):
        return random_canonical(args.n, boundary, args.seed, x_range=(-0.6, 0.6))
    return random_canonical(args.n, boundary, args.seed)


def _validate_system(args):
    if args.system not in verify.MAP_NAMES + verify.FLOW_NAMES:
        raise SystemExit2(f"unknown system {args.system!r}")
    if args.realization is not None and args.realization not in CATALOG:
        raise SystemExit2(f"unknown realization {args.realization!r}")


def _write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _json_report(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _inv_names(count_per_lam, lams):
    names = []
    for j in range(len(lams)):
        for k in range(count_per_lam):
            suffix = f"_lam{j}" if len(lams) > 1 else ""
            names.append(f"trT{k + 1}{suffix}")
    return names


def _write_run_outputs(out, header, state_rows, inv, inv_names):
    lines = [",".join(header)]
    for i, row in enumerate(state_rows):
        lines.append(",".join([str(i)] + [_fmt(v) for v in row]
                              + [_fmt(v) for v in inv[i]]))
    _write(out + ".trajectory.csv", "\n".join(lines) + "\n")
    drift = np.abs(inv - inv[0]) / np.maximum(1.0, np.abs(inv[0]))
    dlines = [",".join(["step"] + [f"drift_{c}" for c in inv_names] + ["drift_max"])]
    for i in range(len(state_rows)):
        dlines.append(",".join([str(i)] + [_fmt(v) for v in drift[i]]
                               + [_fmt(drift[i].max())]))
    _write(out + ".invariants.csv", "\n".join(dlines) + "\n")
    print(f"wrote {out}.trajectory.csv and {out}.invariants.csv "
          f"(max drift {drift.max():.3e})")


def _simulate_chart(args) -> int:
    spec = _chart_spec(args)
    c0 = _initial_canonical(args, spec)
    out = args.out or "run"
    traj = [c0]
    try:
        for _ in range(args.steps):
            traj.append(canonical_step(spec, traj[-1]))
        alpha = spec.alpha if spec.family != "dtl" else None
        inv = np.array([lax.spectral_invariants(flaschka_of(spec, c), alpha=alpha)
                        for c in traj])
    except NumericalError as exc:
        report = {"error": type(exc).__name__, "message": str(exc),
                  "realization": spec.name, "failed": True,
                  "failing_step": len(traj)}
        _write(out + ".error.json", _json_report(report))
        print(f"numerical failure at step {len(traj)}: {exc}", file=sys.stderr)
        return 3

    n = c0.n
    lams = (1.0,) if c0.boundary is Boundary.OPEN else lax.DEFAULT_LAMBDAS
    header = (["step"] + [f"x{k + 1}" for k in range(n)]
              + [f"p{k + 1}" for k in range(n)] + _inv_names(n, lams))
    _write_run_outputs(out, header, [np.concatenate([c.x, c.p]) for c in traj],
                       inv, _inv_names(n, lams))
    return 0


def cmd_simulate(args) -> int:
    _validate_system(args)
    if args.realization is not None:
        return _simulate_chart(args)
    s0 = _initial_state(args)
    out = args.out or "run"
    traj = [s0]
    try:
        if args.system in verify.FLOW_NAMES:
            traj = rk4_trajectory(verify.flow_of(args.system, args.alpha), s0,
                                  args.h, args.steps)
        else:
            for _ in range(args.steps):
                traj.append(verify.apply_map(args.system, traj[-1], args.h, args.alpha))
        inv = np.array([verify.invariants_of(args.system, s, args.alpha) for s in traj])
    except NumericalError as exc:
        report = {"error": type(exc).__name__, "message": str(exc),
                  "system": args.system, "failed": True,
                  "failing_step": len(traj)}
        _write(out + ".error.json", _json_report(report))
        print(f"numerical failure at step {len(traj)}: {exc}", file=sys.stderr)
        return 3

    n = s0.n
    lams = (1.0,) if s0.boundary is Boundary.OPEN else lax.DEFAULT_LAMBDAS
    header = (["step"] + [f"b{k + 1}" for k in range(n)]
              + [f"a{k + 1}" for k in range(n)] + _inv_names(n, lams))
    _write_run_outputs(out, header, [np.concatenate([s.b, s.a]) for s in traj],
                       inv, _inv_names(n, lams))
    return 0


def cmd_invariants(args) -> int:
    _validate_system(args)
    if args.realization is not None:
        spec = _chart_spec(args)
        c = _initial_canonical(args, spec)
        s = flaschka_of(spec, c)
        alpha = spec.alpha if spec.family != "dtl" else None
        inv = lax.spectral_invariants(s, alpha=alpha)
        obj = {"realization": spec.name, "state": json.loads(state_to_json(c)),
               "invariants": [float(v) for v in inv]}
        text = _json_report(obj)
        if args.out:
            _write(args.out, text)
        else:
            sys.stdout.write(text)
        return 0
    s = _initial_state(args)
    inv = verify.invariants_of(args.system, s, args.alpha)
    obj = {"system": args.system, "state": json.loads(state_to_json(s)),
           "invariants": [float(v) for v in inv]}
    text = _json_report(obj)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_verify(args) -> int:
    records = verify.run_suite(args.filter_glob, seed=args.seed)
    text = _json_report({"seed": args.seed, "filter": args.filter_glob,
                         "checks": records})
    if args.out:
        _write(args.out, text)
    for rec in records:
        print(f"{'PASS' if rec['pass'] else 'FAIL'} {rec['check']}: "
              f"max_residual={rec['max_residual']:.3e} tol={rec['tol']:.1e}")
    return 0 if all(r["pass"] for r in records) else 3


def cmd_dump_lax(args) -> int:
    _validate_system(args)
    s = _initial_state(args)
    obj = {"T": lax.build_T(s, args.lam).tolist()}
    if args.system in ("drtl+", "drtl-", "rtl+", "rtl-"):
        L, U = lax.build_LU_rtl(s, args.alpha, args.lam)
        obj["L"] = L.tolist()
        obj["U"] = U.tolist()
        obj["T1"] = lax.rtl_t1(s, args.alpha, args.lam).tolist()
    text = _json_report(obj)
    if args.out:
        _write(args.out, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_consistency(args) -> int:
    worst = pluri.check_3d_consistency(args.h, args.alpha, args.lam,
                                       n_samples=args.steps, seed=args.seed)
    obj = {"check": "consistency-3d", "h": args.h, "alpha": args.alpha,
           "lambda": args.lam, "samples": args.steps,
           "max_discrepancy": worst, "pass": bool(worst < 1e-9)}
    text = _json_report(obj)
    if args.out:
        _write(args.out, text)
    sys.stdout.write(text)
    return 0 if obj["pass"] else 3


_COMMANDS = {"simulate": cmd_simulate, "invariants": cmd_invariants,
             "verify": cmd_verify, "dump-lax": cmd_dump_lax,
             "consistency": cmd_consistency}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        args = _apply_config(args, argv)
        if args.lam == 0.0 and args.boundary == "periodic":
            raise SystemExit2("lambda must be nonzero on a ring")
        return _COMMANDS[args.command](args)
    except SystemExit2 as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
