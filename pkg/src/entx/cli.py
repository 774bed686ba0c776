"""Command-line driver: ``entx {collide,iterate,spinstar,groundstate,wstate,thresholds}``.

Records go to stdout or ``--out`` as CSV or JSON. Exit codes: 0 ok,
2 bad configuration, 3 numerical failure, 4 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import asdict

import numpy as np

from . import protocol
from .measures import concurrence, concurrence_closed_form, fidelity
from .protocol import SweepRecord
from .qcore import NumericalError, NotPSDError, projector
from .states import (
    PSI_PLUS,
    CorrelationPair,
    DegenerateGroundStateError,
    basis_product_state,
    ground_state_correlations,
    pair_state,
    w_state,
)

log = logging.getLogger("entx")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
SPIN_STAR_TOL = 1e-9
MAX_SPINSTAR_L = 10


class ConfigError(ValueError):
    pass


def parse_grid(text):
    """``start:stop:count`` with both endpoints included."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid {text!r} is not start:stop:count")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"grid {text!r}: {exc}") from None
    if count < 1:
        raise ConfigError(f"grid {text!r} needs a positive count")
    if count == 1:
        return [start]
    return [float(x) for x in np.linspace(start, stop, count)]


def _axis(args, single, grid, name, required=True):
    one, many = getattr(args, single), getattr(args, grid)
    if one is not None and many is not None:
        raise ConfigError(f"give either --{name} or --{name}-grid, not both")
    if many is not None:
        return parse_grid(many)
    if one is not None:
        return [one]
    if required:
        raise ConfigError(f"--{name} or --{name}-grid is required")
    return []


def _g_axis(args):
    return _axis(args, "g", "g_grid", "g")


def _jt_axis(args):
    return _axis(args, "j_tau", "j_tau_grid", "j-tau")


def _probes(args):
    label = args.probes
    if len(label) != 2:
        raise ConfigError(f"--probes needs two labels, got {label!r}")
    try:
        return projector(basis_product_state(label))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _chain(g):
    return pair_state(CorrelationPair(g, g))


# ---------------------------------------------------------------------------
# subcommands


def _collide_point(item):
    g, j_tau, lam, probes = item
    rec = protocol._surface_point((g, j_tau, lam))
    if rec.status == "ok":
        ref = protocol.collide_once(_chain(g), probes, lam, j_tau)
        rec.auxiliary["concurrence_reference"] = ref.concurrence
    return rec


def cmd_collide(args):
    gs, jts = _g_axis(args), _jt_axis(args)
    probes = _probes(args)
    if len(gs) == 1:
        CorrelationPair(gs[0], gs[0])
    items = [(g, t, args.lam, probes) for g in gs for t in jts]
    return protocol._map(_collide_point, items, args.workers)


def cmd_iterate(args):
    (g,) = _g_axis(args) if args.g_grid is None else _bad("iterate takes a single --g")
    (j_tau,) = _jt_axis(args) if args.j_tau_grid is None else _bad("iterate takes a single --j-tau")
    if args.steps is None or args.steps < 1:
        raise ConfigError("--steps must be a positive integer")
    if args.fixed_point and abs(math.remainder(j_tau, math.pi / 2)) < 1e-12:
        raise ConfigError("--fixed-point needs j_tau away from multiples of pi/2")
    chain = _chain(g)
    probes = _probes(args)
    inputs = {"g_xx": g, "g_zz": g, "lambda": args.lam, "j_tau": j_tau}
    target = projector(PSI_PLUS)
    records = []
    curve = []
    for step, c, rho in protocol.repeated_collisions(chain, probes, args.lam, j_tau, args.steps):
        curve.append((step, c))
        aux = {"fidelity_chain": fidelity(rho, chain), "fidelity_psi_plus": fidelity(rho, target), "record": "step"}
        records.append(SweepRecord({**inputs, "step": step}, c, aux))
    summary = {"record": "summary"}
    conc = curve[-1][1]
    if args.steps >= 3:
        try:
            kappa, r2 = protocol.fit_exponential(curve)
            summary.update(kappa=kappa, r_squared=r2)
        except ValueError as exc:
            log.warning("exponential fit skipped: %s", exc)
    if args.fixed_point:
        fp = protocol.channel_fixed_point(chain, args.lam, j_tau)
        conc = fp.concurrence
        summary.update(residual=fp.residual, iterations=fp.iterations_to_converge, agreement=fp.agreement)
    if len(summary) > 1:
        records.append(SweepRecord({**inputs, "step": args.steps}, conc, summary))
    return records


def _bad(msg):
    raise ConfigError(msg)


def cmd_spinstar(args):
    L, N = args.L, args.N
    if L is None or N is None:
        raise ConfigError("spinstar needs --L and --N")
    if N < 1 or 2 * N > L or L > MAX_SPINSTAR_L:
        raise ConfigError(f"spinstar needs 1 <= N and 2N <= L <= {MAX_SPINSTAR_L}; got L={L}, N={N}")
    records = []
    for j_tau in _jt_axis(args):
        numeric, analytic = protocol.spin_star_extraction(L, N, args.lam, j_tau)
        rec = SweepRecord({"L": L, "N": N, "lambda": args.lam, "j_tau": j_tau}, numeric)
        if analytic is not None:
            rec.auxiliary["analytic"] = analytic
            if abs(analytic - numeric) > SPIN_STAR_TOL:
                rec.status = "error"
                rec.message = f"numeric and closed form differ by {abs(analytic - numeric):.3e}"
        records.append(rec)
    return records


def cmd_groundstate(args):
    Ls = args.L if isinstance(args.L, list) else [args.L]
    if not Ls or Ls[0] is None:
        raise ConfigError("groundstate needs --L")
    for L in Ls:
        if L % 2:
            raise ConfigError(f"L={L} is odd; the parity rule requires an even chain length")
        if not 2 <= L <= 12:
            raise ConfigError(f"L={L} outside 2..12")
    records = []
    for L in Ls:
        c = ground_state_correlations(args.lam, L, args.boundary)
        rec = SweepRecord({"L": L, "boundary": args.boundary, "lambda": args.lam}, None)
        rec.auxiliary.update(g_xx=c.g_xx, g_zz=c.g_zz)
        if abs(c.g_xx) >= c.g_zz:
            rec.concurrence = concurrence_closed_form(c)
        else:
            rec.message = "closed form needs |g_xx| >= g_zz"
        records.append(rec)
    return records


def cmd_wstate(args):
    n = args.n
    if n is None or not 2 <= n <= 5:
        raise ConfigError("wstate needs --n in 2..5")
    w = projector(w_state(n))
    records = []
    for j_tau in _jt_axis(args):
        rho = protocol.w_extraction(n, j_tau)
        pair = protocol.partial_trace(rho, (0, 1))
        dev = float(np.abs(rho - protocol.w_extraction_expected(n, j_tau)).max())
        aux = {"deviation": dev, "fidelity_w": fidelity(rho, w)}
        records.append(SweepRecord({"n": n, "j_tau": j_tau}, concurrence(pair).value, aux))
    return records


def cmd_thresholds(args):
    grid = _jt_axis(args)
    g_boundary, g_always = protocol.threshold_scan(args.lam, grid)
    rec = SweepRecord({"lambda": args.lam, "j_tau_points": len(grid)}, None)
    rec.auxiliary.update(g_boundary=g_boundary, g_always=g_always)
    return [rec]


COMMANDS = {
    "collide": cmd_collide,
    "iterate": cmd_iterate,
    "spinstar": cmd_spinstar,
    "groundstate": cmd_groundstate,
    "wstate": cmd_wstate,
    "thresholds": cmd_thresholds,
}


# ---------------------------------------------------------------------------
# output


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def record_columns(records):
    inputs = sorted({k for r in records for k in r.inputs})
    aux = sorted({k for r in records for k in r.auxiliary})
    return inputs, aux


def to_csv(records):
    inputs, aux = record_columns(records)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(inputs + ["concurrence"] + aux + ["status", "message"])
    for r in records:
        row = [_fmt(r.inputs.get(k)) for k in inputs]
        row.append(_fmt(r.concurrence))
        row += [_fmt(r.auxiliary.get(k)) for k in aux]
        row += [r.status, r.message]
        w.writerow(row)
    return buf.getvalue()


def _plain(v):
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    return v


def to_json(records):
    rows = [_plain(asdict(r)) for r in records]
    return json.dumps(rows, sort_keys=True) + "\n"


def records_from_json(text):
    return [SweepRecord(**row) for row in json.loads(text)]


def write_atomic(path, text):
    """Write via a temporary sibling and rename, so failures leave no partial file."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".entx-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# argument parsing


def _workers(text):
    n = int(text)
    if n < 1:
        raise argparse.ArgumentTypeError("--workers must be >= 1")
    return n


def _seed(text):
    n = int(text)
    if not 0 <= n < 2**64:
        raise argparse.ArgumentTypeError("--seed must be an unsigned 64-bit integer")
    return n


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--lambda", dest="lam", type=float, default=1.0, help="anisotropy (1 Heisenberg, 0 XY)")
    common.add_argument("--workers", type=_workers, default=None)
    common.add_argument("--out", default=None, help="output path (stdout if omitted)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=_seed, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    tau = argparse.ArgumentParser(add_help=False)
    tau.add_argument("--j-tau", dest="j_tau", type=float)
    tau.add_argument("--j-tau-grid", dest="j_tau_grid")

    chain = argparse.ArgumentParser(add_help=False)
    chain.add_argument("--g", type=float, help="g_xx = g_zz of the chain pair")
    chain.add_argument("--g-grid", dest="g_grid")
    chain.add_argument("--probes", default="01", help="initial probe labels over 0 1 + - (default 01)")

    parser = argparse.ArgumentParser(prog="entx", description="Entanglement extraction from spin chains by probe collisions.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("collide", parents=[common, chain, tau], help="single collision, optimized over probe states")
    it = sub.add_parser("iterate", parents=[common, chain, tau], help="repeated collisions with fresh chains")
    it.add_argument("--steps", type=int)
    it.add_argument("--fixed-point", dest="fixed_point", action="store_true")
    ss = sub.add_parser("spinstar", parents=[common, tau], help="probes coupled to blocks of a W chain")
    ss.add_argument("--L", type=int)
    ss.add_argument("--N", type=int)
    gs = sub.add_parser("groundstate", parents=[common], help="exact-diagonalization correlators")
    gs.add_argument("--L", type=int, nargs="+")
    gs.add_argument("--boundary", choices=("open", "periodic"), default="periodic")
    ws = sub.add_parser("wstate", parents=[common, tau], help="n probes on a W chain")
    ws.add_argument("--n", type=int)
    sub.add_parser("thresholds", parents=[common, tau], help="extraction thresholds along g_xx = g_zz")
    return parser


def _value_flags(parser):
    flags = set()
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for p in action.choices.values():
                flags |= _value_flags(p)
        elif action.option_strings and action.nargs != 0:
            flags.update(action.option_strings)
    return flags


def _glue_negative_values(argv, flags):
    """Rewrite ``--g-grid -0.25:...`` as ``--g-grid=-0.25:...`` so argparse accepts it."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in flags and i + 1 < len(argv) and argv[i + 1].startswith("-") and argv[i + 1][1:2] in "0123456789.":
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None):
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parser.parse_args(_glue_negative_values(argv, _value_flags(parser)))
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.workers is None:
        args.workers = protocol.default_workers()
    try:
        records = COMMANDS[args.command](args)
    except (NotPSDError, DegenerateGroundStateError, NumericalError) as exc:
        print(f"entx: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"entx: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = to_json(records) if args.format == "json" else to_csv(records)
    try:
        if args.out:
            write_atomic(args.out, text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"entx: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
