"""Command-line front end.

Subcommands: ``simulate``, ``spectrum``, ``cycle``, ``scan`` and
``regularized``.  Exit status is 0 on success, 1 when the analysis comes out
negative (escaping landing, no cycle) and 2 on usage errors.  Any option may
also come from a ``key = value`` file given with ``--config``; command-line
flags win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import regularize as reg
from .core import DomainError, Params
from .flow import EventKind, IntegratorConfig, Method, integrate
from .poincare import SEED_MARGIN, find_cycle
from .scan import GridSpec, scan_grid
from .spectrum import spectrum_report

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE = 0, 1, 2


def fmt(v: float) -> str:
    return "%.17g" % v


def _clean(obj):
    """Make a report JSON-safe (NaN/inf become null)."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def dump_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def _vector(n: int):
    def parse(text: str):
        try:
            parts = [float(s) for s in text.split(",")]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
        if len(parts) != n or not all(math.isfinite(v) for v in parts):
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
        return tuple(parts)

    return parse


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (math.isfinite(v) and v > 0):
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {text!r}")
    return v


def _range(text: str):
    try:
        a, b, n = text.split(":")
        return float(a), float(b), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected min:max:count, got {text!r}")


def _flag(text) -> bool:
    if isinstance(text, bool):
        return text
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"not a boolean: {text!r}")


def read_config(path: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _add_params(sp):
    sp.add_argument("--alpha", type=_positive, required=True)
    sp.add_argument("--beta", type=_positive, required=True)


def _add_out(sp):
    sp.add_argument("--out", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relaychua", description=__doc__.split("\n\n")[0])
    parser.add_argument("--config", help="key = value file with option defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="integrate one trajectory to CSV")
    _add_params(sp)
    sp.add_argument("--x0", type=_vector(3), required=True, help="x1,x2,x3")
    sp.add_argument("--t-max", type=_positive, default=100.0)
    sp.add_argument("--method", choices=[m.value for m in Method], default="exact")
    sp.add_argument("--step", type=_positive, default=1e-2)
    sp.add_argument("--crossing-tol", type=_positive, default=1e-10)
    sp.add_argument("--equilibrium-tol", type=_positive, default=1e-9)
    _add_out(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("spectrum", help="characteristic-polynomial report")
    _add_params(sp)
    _add_out(sp)
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("cycle", help="fixed point of the first return map")
    _add_params(sp)
    sp.add_argument("--seed", type=_vector(2), default=(10.0, 10.0), help="x1,x2 on the section")
    sp.add_argument("--tol", type=_positive, default=1e-9)
    sp.add_argument("--max-iter", type=_positive_int, default=200)
    _add_out(sp)
    sp.set_defaults(func=cmd_cycle)

    sp = sub.add_parser("scan", help="predicates over an (alpha, beta) grid")
    sp.add_argument("--alpha-range", type=_range, required=True, help="min:max:count")
    sp.add_argument("--beta-range", type=_range, required=True, help="min:max:count")
    sp.add_argument("--cycles", type=_flag, nargs="?", const=True, default=False)
    sp.add_argument("--workers", type=_positive_int, default=1)
    _add_out(sp)
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("regularized", help="regularized / slow-fast system")
    _add_params(sp)
    sp.add_argument("--eps", type=_positive, default=1e-3)
    sp.add_argument("--eps0", type=_positive, default=0.05)
    sp.add_argument("--kind", choices=sorted(reg.BUILTIN), default="cubic")
    mode = sp.add_mutually_exclusive_group()
    mode.add_argument("--equilibrium", type=_flag, nargs="?", const=True, default=False,
                      help="report the interior equilibrium of the fast field")
    mode.add_argument("--cycle", type=_flag, nargs="?", const=True, default=False,
                      help="iterate the regularized return map")
    sp.add_argument("--seed", type=_vector(2), default=(10.0, 10.0))
    sp.add_argument("--tol", type=_positive, default=1e-9)
    sp.add_argument("--max-iter", type=_positive_int, default=200)
    sp.add_argument("--u0", type=_vector(3), default=(0.0, 1.0, -1.0), help="y1,y2,x3")
    sp.add_argument("--tau-max", type=_positive, default=10.0)
    sp.add_argument("--step", type=_positive, default=1e-2)
    _add_out(sp)
    sp.set_defaults(func=cmd_regularized)
    return parser


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _params(args) -> Params:
    return Params(args.alpha, args.beta)


def cmd_simulate(args) -> int:
    cfg = IntegratorConfig(
        method=Method(args.method),
        step=args.step,
        t_max=args.t_max,
        crossing_tol=args.crossing_tol,
        equilibrium_tol=args.equilibrium_tol,
    )
    traj = integrate(np.array(args.x0), _params(args), cfg)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "x1", "x2", "x3", "region"])
    for t, x, s in zip(traj.times, traj.states, traj.sides):
        region = "H0" if x[2] == 0.0 else ("H+" if s > 0 else "H-")
        w.writerow([fmt(t), fmt(x[0]), fmt(x[1]), fmt(x[2]), region])
    _emit(buf.getvalue(), args.out)
    end = traj.termination
    report = {
        "alpha": args.alpha,
        "beta": args.beta,
        "method": cfg.method.value,
        "samples": len(traj.times),
        "termination": end.kind.value,
        "events": [e.to_dict() for e in traj.events],
    }
    if args.out:
        Path(args.out + ".events.json").write_text(dump_json(report))
    if end.kind is EventKind.ENTERED_ESCAPING:
        print(f"trajectory entered the escaping region at t={end.time}", file=sys.stderr)
        return EXIT_NEGATIVE
    return EXIT_OK


def cmd_spectrum(args) -> int:
    rep = spectrum_report(_params(args))
    d = {"alpha": args.alpha, "beta": args.beta, **rep.to_dict()}
    _emit(dump_json(d), args.out)
    return EXIT_OK


def cmd_cycle(args) -> int:
    if abs(args.seed[1]) < 1.0 + SEED_MARGIN:
        raise DomainError(f"seed must satisfy |x2| > 1 + {SEED_MARGIN}")
    res = find_cycle(args.seed, _params(args), tol=args.tol, max_iter=args.max_iter)
    d = {"alpha": args.alpha, "beta": args.beta, **res.to_dict()}
    _emit(dump_json(d), args.out)
    return EXIT_OK if res.converged else EXIT_NEGATIVE


def cmd_scan(args) -> int:
    (a0, a1, na), (b0, b1, nb) = args.alpha_range, args.beta_range
    g = GridSpec(a0, a1, na, b0, b1, nb, with_cycle_search=args.cycles)
    cells = scan_grid(g, workers=args.workers)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["alpha", "beta", "routh", "single_root", "geometry", "theorem", "lambda_star"]
    if g.with_cycle_search:
        header.append("cycle")
    w.writerow(header)
    for c in cells:
        row = [
            fmt(c.params.alpha),
            fmt(c.params.beta),
            str(c.routh).lower(),
            str(c.single_root).lower(),
            c.geometry.value,
            str(c.in_theorem_region).lower(),
            fmt(c.lambda_star),
        ]
        if g.with_cycle_search:
            row.append(c.cycle_found.value)
        w.writerow(row)
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def cmd_regularized(args) -> int:
    if args.eps >= args.eps0:
        raise DomainError(f"eps={args.eps} must be smaller than eps0={args.eps0}")
    p = _params(args)
    if args.equilibrium:
        eq = reg.regularized_equilibrium(p, args.eps, args.kind)
        d = {"alpha": args.alpha, "beta": args.beta, "eps": args.eps, "kind": args.kind, **eq.to_dict()}
        _emit(dump_json(d), args.out)
        return EXIT_OK
    if args.cycle:
        x1, x2 = args.seed
        u0 = (x1, x2, 1.0 if x2 > 0 else -1.0)
        fast = reg.find_fast_cycle(u0, p, args.eps, args.eps0, args.tol, args.max_iter)
        d = {"alpha": args.alpha, "beta": args.beta, "eps": args.eps, "eps0": args.eps0,
             "regularized": fast.to_dict()}
        ok = fast.converged
        if abs(x2) >= 1.0 + SEED_MARGIN:
            disc = find_cycle(args.seed, p, tol=args.tol, max_iter=args.max_iter)
            d["discontinuous"] = disc.to_dict()
            d["discontinuous"].pop("iterates")
            if ok and disc.converged:
                d["section_distance"] = math.hypot(
                    fast.fixed_point[0] - disc.fixed_point.x1,
                    fast.fixed_point[1] - disc.fixed_point.x2,
                )
        _emit(dump_json(d), args.out)
        return EXIT_OK if ok else EXIT_NEGATIVE
    taus, states = reg.integrate_fast(args.u0, p, args.eps, args.kind, args.step, args.tau_max)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["tau", "y1", "y2", "x3"])
    for t, u in zip(taus, states):
        w.writerow([fmt(t), fmt(u[0]), fmt(u[1]), fmt(u[2])])
    _emit(buf.getvalue(), args.out)
    return EXIT_OK


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    parser = build_parser()
    if known.config:
        try:
            defaults = read_config(known.config)
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
        for action in parser._subparsers._group_actions:
            for sp in action.choices.values():
                for a in sp._actions:
                    if a.dest in defaults:
                        a.required = False
                dests = {a.dest for a in sp._actions}
                sp.set_defaults(**{k: v for k, v in defaults.items() if k in dests})
    args = parser.parse_args(argv)
    # string defaults from --config bypass argparse type conversion for
    # some actions; normalize the booleans here
    for name in ("cycles", "equilibrium", "cycle"):
        if hasattr(args, name):
            try:
                setattr(args, name, _flag(getattr(args, name)))
            except argparse.ArgumentTypeError as exc:
                parser.error(str(exc))
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"relaychua: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
