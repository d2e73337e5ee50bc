"""Command-line front end.

Every run writes one JSON document (or CSV with ``--csv``) to stdout with an
embedded run manifest. Identical argv gives identical stdout bytes; progress and
timing go to stderr only.

Exit codes: 0 ok, 2 usage or input error, 3 armour budget exceeded, 4 degenerate statistics.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time

from . import __version__
from .armour import default_budget, perfect_samples, perfect_window
from .errors import BudgetExceeded
from .estimate import (correlation, density_box, density_ergodic, density_perfect, event_always,
                       event_occupied, event_pattern, local_discrepancy, tail_bound)
from .exact1d import rho_bounds
from .field import UniformField, parse_seed
from .scheme import resolve_scheme
from .simulate import BoundaryCondition, Configuration, park

log = logging.getLogger("jamlim")

EXIT_USAGE, EXIT_BUDGET, EXIT_DEGENERATE = 2, 3, 4
ROW_FIELDS = ["n_or_x", "mean", "std_error", "ci_low", "ci_high", "bound", "replicas", "seed0"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_window(text: str, d: int):
    """``a..b,c..d`` (one inclusive range per axis) to an array of sites in row-major order."""
    parts = text.split(",")
    if len(parts) != d:
        raise ValueError(f"window {text!r} has {len(parts)} axes, expected {d}")
    bounds = []
    for part in parts:
        lo, sep, hi = part.partition("..")
        try:
            a = int(lo)
            b = int(hi) if sep else a
        except ValueError:
            raise ValueError(f"malformed window range {part!r}") from None
        if b < a:
            raise ValueError(f"empty window range {part!r}")
        bounds.append((a, b))
    import numpy as np

    axes = np.meshgrid(*[np.arange(a, b + 1, dtype=np.int64) for a, b in bounds], indexing="ij")
    return np.stack([ax.ravel() for ax in axes], axis=1)


def parse_site(text: str, d: int):
    try:
        site = tuple(int(c) for c in text.split(","))
    except ValueError:
        raise ValueError(f"malformed site {text!r}") from None
    if len(site) != d:
        raise ValueError(f"site {text!r} has dimension {len(site)}, expected {d}")
    return site


def parse_ints(text: str):
    try:
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise ValueError(f"malformed integer list {text!r}") from None


def load_bc(text: str, d: int) -> BoundaryCondition:
    if text == "null":
        return BoundaryCondition.null()
    if text == "ones":
        return BoundaryCondition.ones()
    if text.startswith("file:"):
        try:
            with open(text[5:], encoding="utf-8") as fh:
                cfg = Configuration.from_json(json.load(fh))
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed boundary file: {exc}") from None
        if cfg.d != d:
            raise ValueError(f"boundary file has d={cfg.d}, expected {d}")
        return BoundaryCondition.explicit(cfg)
    raise ValueError(f"unknown boundary condition {text!r}")


def _clean(v):
    """Non-finite floats become null, recursively."""
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    return v


def manifest(args, scheme) -> dict:
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "csv", "verbose")}
    return {"command": args.command, "params": params, "seed0": parse_seed(args.seed),
            "scheme_hash": scheme.digest() if scheme is not None else None, "version": __version__}


def emit(out, args, scheme, payload: dict, rows=None, fields=None):
    """Write JSON (manifest + payload) or CSV (manifest as a comment line + rows)."""
    man = manifest(args, scheme)
    if args.csv and rows is not None:
        buf = io.StringIO()
        buf.write("# manifest " + json.dumps(man, sort_keys=True) + "\n")
        w = csv.DictWriter(buf, fieldnames=fields or ROW_FIELDS, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow({k: ("" if _clean(v) is None else v) for k, v in r.items()})
        out.write(buf.getvalue())
        return
    doc = {"manifest": man, "seed": args.seed}
    doc.update(payload)
    out.write(json.dumps(_clean(doc), indent=1, allow_nan=False) + "\n")


def _est_row(key, est, seed0, bound=None) -> dict:
    lo, hi = est.ci95
    return {"n_or_x": key, "mean": est.mean, "std_error": est.std_error, "ci_low": lo, "ci_high": hi,
            "bound": _clean(bound) if bound is not None else None, "replicas": est.replicas, "seed0": seed0}


def _scheme(args):
    return resolve_scheme(args.scheme, args.d, args.nu)


def _budget(args) -> int:
    return default_budget() if args.budget is None else args.budget


def cmd_park(args, out):
    s = _scheme(args)
    fld = UniformField(parse_seed(args.seed), s.d)
    conf = park(fld, parse_window(args.window, s.d), s, load_bc(args.bc, s.d))
    emit(out, args, s, {"configuration": conf.to_json()},
         [{"site": ",".join(map(str, x)), "spin": v} for x, v in zip(conf.sites.tolist(), conf.spins.tolist())],
         ["site", "spin"])
    return 0


def cmd_sample_window(args, out):
    s = _scheme(args)
    fld = UniformField(parse_seed(args.seed), s.d)
    conf = perfect_window(fld, parse_window(args.window, s.d), s, _budget(args))
    emit(out, args, s, {"configuration": conf.to_json()},
         [{"site": ",".join(map(str, x)), "spin": v} for x, v in zip(conf.sites.tolist(), conf.spins.tolist())],
         ["site", "spin"])
    return 0


def cmd_armour_stats(args, out):
    s = _scheme(args)
    seed0 = parse_seed(args.seed)
    W = parse_window(args.window, s.d) if args.window else [(0,) * s.d]
    _, sizes, radii, explored = perfect_samples(seed0, args.replicas, W, s, _budget(args), args.jobs)
    rows = [{"seed": (seed0 + r) & ((1 << 64) - 1), "armour_size": int(sizes[r]),
             "max_radius_seen": int(radii[r]), "explored": int(explored[r])} for r in range(args.replicas)]
    emit(out, args, s, {"replicas": rows}, rows, ["seed", "armour_size", "max_radius_seen", "explored"])
    return 0


def cmd_density(args, out):
    s = _scheme(args)
    seed0 = parse_seed(args.seed)
    if args.method == "ergodic":
        rows = []
        for n in parse_ints(args.n):
            val = density_ergodic(seed0, n, s, _budget(args))
            rows.append({"n_or_x": n, "mean": val, "seed0": seed0})
        emit(out, args, s, {"method": "ergodic", "rows": rows}, rows)
        return 0
    if args.replicas < 2:
        raise ValueError("--replicas must be at least 2")
    if args.method == "perfect":
        est = density_perfect(seed0, s, args.replicas, _budget(args), args.jobs)
        rows = [_est_row("perfect", est, seed0)]
    else:
        bc = load_bc(args.bc, s.d)
        rows = [_est_row(n, density_box(seed0, n, s, bc, args.replicas, args.jobs), seed0)
                for n in parse_ints(args.n)]
    emit(out, args, s, {"method": args.method, "rows": rows}, rows)
    return 0


def cmd_correlation(args, out):
    s = _scheme(args)
    seed0 = parse_seed(args.seed)
    rows, reports, status = [], [], 0
    for text in args.x:
        rep = correlation(seed0, parse_site(text, s.d), s, args.replicas, _budget(args), args.jobs)
        reports.append(rep.as_dict())
        if rep.degenerate:
            status = EXIT_DEGENERATE
        lo, hi = rep.rho_hat - 1.96 * rep.rho_std_error, rep.rho_hat + 1.96 * rep.rho_std_error
        rows.append({"n_or_x": text, "mean": rep.rho_hat, "std_error": rep.rho_std_error, "ci_low": lo,
                     "ci_high": hi, "bound": _clean(rep.bound), "replicas": rep.replicas, "seed0": seed0})
    emit(out, args, s, {"reports": reports}, rows)
    if status:
        print("degenerate variance: correlation undefined", file=sys.stderr)
    return status


def cmd_bounds_1d(args, out):
    b = rho_bounds(args.order)
    emit(out, args, None, b.as_dict(), [b.as_dict()], ["N", "lower", "upper", "total_mass", "upper_pattern"])
    print(f"N={b.N}: {b.lower:.4f} <= rho <= {b.upper:.4f}", file=sys.stderr)
    return 0


def cmd_tail_bound(args, out):
    rows = [{"n": n, "bound": tail_bound(n, args.d, args.nu)} for n in parse_ints(args.n)]
    payload = {"d": args.d, "nu": args.nu, "rows": rows}
    if len(rows) == 1:
        payload["bound"] = rows[0]["bound"]
    emit(out, args, None, payload, rows, ["n", "bound"])
    return 0


def _event(args, d):
    if args.event == "always":
        return event_always
    if args.event.startswith("occupied"):
        _, _, site = args.event.partition(":")
        return event_occupied(parse_site(site, d) if site else (0,) * d)
    if args.event.startswith("pattern:"):
        bits = args.event[8:]
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"malformed pattern {bits!r}")
        if len(bits) != (2 * args.m + 1) ** d:
            raise ValueError(f"pattern needs {(2 * args.m + 1) ** d} cells")
        return event_pattern(bits)
    raise ValueError(f"unknown event {args.event!r}")


def cmd_discrepancy(args, out):
    s = _scheme(args)
    seed0 = parse_seed(args.seed)
    if args.replicas < 2:
        raise ValueError("--replicas must be at least 2")
    table = local_discrepancy(_event(args, s.d), args.m, parse_ints(args.n), s, args.replicas, seed0,
                              _budget(args), args.jobs)
    rows = []
    for r in table:
        d = abs(r.diff)
        rows.append({"n_or_x": r.n, "mean": d, "std_error": r.std_error, "ci_low": d - 1.96 * r.std_error,
                     "ci_high": d + 1.96 * r.std_error, "bound": r.bound, "replicas": args.replicas, "seed0": seed0})
    emit(out, args, s, {"m": args.m, "event": args.event, "rows": [r.as_dict() for r in table]}, rows)
    return 0


COMMANDS = {
    "park": cmd_park,
    "sample-window": cmd_sample_window,
    "armour-stats": cmd_armour_stats,
    "density": cmd_density,
    "correlation": cmd_correlation,
    "bounds-1d": cmd_bounds_1d,
    "tail-bound": cmd_tail_bound,
    "discrepancy": cmd_discrepancy,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--d", type=int, default=None, help="lattice dimension (default 1)")
    common.add_argument("--nu", type=int, default=None, help="interaction radius (default 1)")
    common.add_argument("--scheme", default="nn-l1", help="nn-l1, nn-linf, full or file:<path>")
    common.add_argument("--seed", default="0", help="base seed, decimal or 0x-hex")
    common.add_argument("--budget", type=int, default=None, help="armour site budget")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--csv", action="store_true", help="CSV instead of JSON")
    common.add_argument("-v", "--verbose", action="store_true", help="timing on stderr")

    p = _Parser(prog="jamlim", description="Jamming limits of parking processes on Z^d.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("park", parents=[common], help="finite-volume parking on a window")
    q.add_argument("--window", required=True)
    q.add_argument("--bc", default="null", help="null, ones or file:<path>")

    q = sub.add_parser("sample-window", parents=[common], help="exact infinite-volume sample on a window")
    q.add_argument("--window", required=True)

    q = sub.add_parser("armour-stats", parents=[common], help="armour size and radius per replica")
    q.add_argument("--window", default=None, help="default: the origin")
    q.add_argument("--replicas", type=int, default=100)

    q = sub.add_parser("density", parents=[common], help="occupation density estimates")
    q.add_argument("--method", choices=["box", "ergodic", "perfect"], default="perfect")
    q.add_argument("--n", default="100", help="box radius, or comma-separated radii")
    q.add_argument("--bc", default="null")
    q.add_argument("--replicas", type=int, default=1000)

    q = sub.add_parser("correlation", parents=[common], help="pair correlation with the origin")
    q.add_argument("--x", action="append", required=True, help="site, e.g. 12 or 3,4; repeatable")
    q.add_argument("--replicas", type=int, default=10000)

    q = sub.add_parser("bounds-1d", parents=[common], help="exact 1D series bounds")
    q.add_argument("--order", type=int, default=2)

    q = sub.add_parser("tail-bound", parents=[common], help="armour tail bound")
    q.add_argument("--n", default="0", help="order, or comma-separated orders")

    q = sub.add_parser("discrepancy", parents=[common], help="local-event discrepancy vs box size")
    q.add_argument("--m", type=int, default=0)
    q.add_argument("--n", default="2,4,6")
    q.add_argument("--event", default="occupied", help="always, occupied[:site] or pattern:<bits>")
    q.add_argument("--replicas", type=int, default=10000)
    return p


VALUE_FLAGS = ("--window", "--x", "--n")


def _glue(argv):
    """Attach values such as ``-3..3`` to their flag so they are not read as options."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if a in VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1][:1] == "-" and argv[i + 1][1:2].isdigit():
            out.append(f"{a}={argv[i + 1]}")
            i += 2
        else:
            out.append(a)
            i += 1
    return out


def run(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(_glue(argv))
        if args.command == "tail-bound":
            args.d = 1 if args.d is None else args.d
            args.nu = 1 if args.nu is None else args.nu
        if args.verbose:
            logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(asctime)s %(message)s")
        for name in ("d", "nu"):
            v = getattr(args, name)
            if v is not None and v < 1:
                raise ValueError(f"--{name} must be positive")
        if args.budget is not None and args.budget < 1:
            raise ValueError("--budget must be positive")
        if args.jobs < 1:
            raise ValueError("--jobs must be positive")
        parse_seed(args.seed)
        t0 = time.perf_counter()
        log.info("start %s", args.command)
        status = COMMANDS[args.command](args, out)
        log.info("done %s in %.3f s", args.command, time.perf_counter() - t0)
        return status
    except UsageError as exc:
        print(f"jamlim: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceeded as exc:
        print(f"jamlim: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ValueError, TypeError, KeyError, OSError, OverflowError) as exc:
        print(f"jamlim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main(argv=None) -> None:
    sys.exit(run(argv))
