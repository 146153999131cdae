"""Command-line front end: ``otdiag {gen,run,lowrank,check}``.

Exit codes: 0 converged, 1 input or file error, 2 invalid arguments
(including eta outside ``(0, 2/n]``), 3 sweep budget exhausted, 4 all pivots
degenerate (retry with ``--init random-precond`` or ``--auto-precond``).
"""
import argparse
import json
import math
import re
import sys

from . import __version__
from .driver import InitKind, RunConfig, Status, TraceMode, low_rank, run
from .errors import ConfigError, OTDError
from .gradient import NormKind
from .io import read_tensor, write_matrix, write_tensor, write_trace
from .pivots import Ordering, read_ordering
from .tensor import (
    asymmetry, gen_antisymmetric, gen_diagonalizable, gen_paper_T, gen_random,
    gen_symmetric, is_antisymmetric, norm, relative_off_norm,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_USAGE = 2
EXIT_MAX_SWEEPS = 3
EXIT_DEGENERATE = 4

EXIT_CODES = {
    Status.CONVERGED_GRAD: EXIT_OK,
    Status.CONVERGED_STAGNATION: EXIT_OK,
    Status.MAX_SWEEPS: EXIT_MAX_SWEEPS,
    Status.ALL_DEGENERATE: EXIT_DEGENERATE,
}

ANTISYMMETRY_TOL = 1e-12

GENERATORS = {
    "random": gen_random,
    "diagonalizable": gen_diagonalizable,
    "symmetric": gen_symmetric,
    "antisymmetric": gen_antisymmetric,
    "paper-t": None,
}


class UsageError(Exception):
    pass


def sci(x):
    """Compact scientific notation: ``0.0e0``, ``1.25e-9``."""
    x = float(x)
    if x == 0.0:
        return "0.0e0"
    if not math.isfinite(x):
        return repr(x)
    mant, exp = f"{x:.16e}".split("e")
    mant = mant.rstrip("0")
    if mant.endswith("."):
        mant += "0"
    return f"{mant}e{int(exp)}"


def _seed_range(text):
    m = re.fullmatch(r"\s*(\d+)\s*(?:\.\.\s*(\d+)\s*)?", text)
    if not m:
        raise argparse.ArgumentTypeError(f"expected A..B or A, got {text!r}")
    lo = int(m.group(1))
    hi = int(m.group(2)) if m.group(2) is not None else lo
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
    return range(lo, hi + 1)


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text!r}")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text!r}")
    return v


def _add_solver_flags(p):
    eta = p.add_mutually_exclusive_group()
    eta.add_argument("--eta", type=float, help="pivot-condition constant, 0 < eta <= 2/n")
    eta.add_argument("--eta-over-n", type=float, metavar="C", help="eta = C/n")
    order = p.add_mutually_exclusive_group()
    order.add_argument("--order", choices=[o.value for o in Ordering], default="row")
    order.add_argument("--order-file", metavar="P",
                       help="custom cyclic ordering, one 1-based pair 'i j' per line")
    p.add_argument("--init", choices=[k.value for k in InitKind], default="identity")
    p.add_argument("--precond-seed", type=int, default=0, metavar="S")
    p.add_argument("--tol-grad", type=_positive_float, default=1e-8, metavar="F")
    p.add_argument("--tol-f", type=_positive_float, default=1e-12, metavar="F")
    p.add_argument("--max-sweeps", type=_positive_int, default=200, metavar="K")
    p.add_argument("--pivot-norm", choices=[k.value for k in NormKind], default="spectral")
    p.add_argument("--trace", metavar="P", help="write the trace as CSV")
    p.add_argument("--trace-every", choices=[t.value for t in TraceMode], default="sweep",
                   help="one trace row per microiteration or per sweep (default)")
    p.add_argument("--out-core", metavar="P")
    p.add_argument("--out-factors", metavar="PREFIX", help="writes PREFIX.U, PREFIX.V, PREFIX.W")
    p.add_argument("--auto-precond", action="store_true",
                   help="on an all-degenerate start retry once with random preconditioning")
    p.add_argument("--seeds", type=_seed_range, metavar="A..B",
                   help="batch over preconditioning seeds; output paths get a .sSEED suffix")
    p.add_argument("--backend", choices=["cython", "python"], help="sweep kernel")
    p.add_argument("--json-summary", metavar="P", help="machine-readable summary")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="otdiag",
        description="Jacobi-type approximate orthogonal diagonalization of n x n x n tensors.")
    parser.add_argument("--version", action="version", version=f"otdiag {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a test tensor")
    g.add_argument("--kind", required=True, choices=list(GENERATORS))
    g.add_argument("--n", type=int, default=3)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, metavar="P")

    r = sub.add_parser("run", help="diagonalize a tensor file")
    r.add_argument("input", metavar="IN")
    _add_solver_flags(r)

    lr = sub.add_parser("lowrank", help="diagonalize, then truncate to rank r")
    lr.add_argument("input", metavar="IN")
    lr.add_argument("--rank", type=int, required=True, metavar="R")
    lr.add_argument("--out", metavar="P", help="write the rank-r approximation")
    _add_solver_flags(lr)

    c = sub.add_parser("check", help="report norms and symmetry of a tensor file")
    c.add_argument("input", metavar="IN")
    c.add_argument("--json-summary", metavar="P")
    return parser


def _config(args, n, seed=None):
    if args.eta is not None:
        eta = args.eta
    elif args.eta_over_n is not None:
        eta = args.eta_over_n / n
    else:
        eta = None
    pairs = read_ordering(args.order_file, n) if args.order_file else None
    cfg = RunConfig(
        eta=eta,
        ordering=Ordering(args.order),
        pairs=pairs,
        init=InitKind(args.init),
        precond_seed=args.precond_seed if seed is None else seed,
        norm_kind=NormKind(args.pivot_norm),
        tol_grad=args.tol_grad,
        tol_f=args.tol_f,
        max_sweeps=args.max_sweeps,
        trace_every=TraceMode(args.trace_every),
        backend=args.backend,
    )
    cfg.validate(n)
    return cfg


def _suffixed(path, seed):
    return path if seed is None or path is None else f"{path}.s{seed}"


def _solve(a, cfg, args, err):
    result = run(a, cfg)
    if result.status is Status.ALL_DEGENERATE and args.auto_precond:
        print("all pivots degenerate; retrying with random preconditioning "
              f"(seed {cfg.precond_seed})", file=err)
        cfg.init = InitKind.RANDOM_PRECOND
        result = run(a, cfg)
    if result.status is Status.ALL_DEGENERATE:
        print("all pivots degenerate with a zero diagonal: nothing to rotate. "
              "Retry with --init random-precond (or --auto-precond).", file=err)
    return result


def _write_outputs(args, result, seed):
    if args.trace:
        write_trace(_suffixed(args.trace, seed), result.trace)
    if args.out_core:
        write_tensor(_suffixed(args.out_core, seed), result.core)
    if args.out_factors:
        prefix = _suffixed(args.out_factors, seed)
        for name, q in zip("UVW", result.factors):
            write_matrix(f"{prefix}.{name}", q)


def _summary(result):
    return {
        "status": result.status.value,
        "f": result.f_final,
        "off_rel": result.off_rel_final,
        "sweeps": result.sweeps_used,
    }


def _summary_line(s):
    return f"status {s['status']} f {s['f']!r} off_rel {sci(s['off_rel'])} sweeps {s['sweeps']}"


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _solver_runs(args, a, out, err, extra=None):
    """Run once (or once per seed), emit outputs; returns the exit code."""
    n = a.shape[0]
    seeds = list(args.seeds) if args.seeds is not None else [None]
    batch = args.seeds is not None
    summaries = []
    code = EXIT_OK
    for seed in seeds:
        cfg = _config(args, n, seed)
        result = _solve(a, cfg, args, err)
        _write_outputs(args, result, seed if batch else None)
        s = _summary(result)
        if extra is not None:
            s.update(extra(result, seed if batch else None))
        line = _summary_line(s)
        for key in ("err", "err_rel"):
            if key in s:
                line += f" {key} {s[key]!r}"
        if batch:
            s["seed"] = seed
            line = f"seed {seed} " + line
        print(line, file=out)
        summaries.append(s)
        code = max(code, EXIT_CODES[result.status])
    if args.json_summary:
        _write_json(args.json_summary, summaries if batch else summaries[0])
    return code


def cmd_gen(args, out):
    if args.kind == "paper-t":
        t = gen_paper_T()
    else:
        t = GENERATORS[args.kind](args.n, args.seed)
    write_tensor(args.out, t)
    return EXIT_OK


def cmd_run(args, out, err):
    return _solver_runs(args, read_tensor(args.input), out, err)


def cmd_lowrank(args, out, err):
    a = read_tensor(args.input)
    n = a.shape[0]
    if not 1 <= args.rank <= n:
        raise UsageError(f"--rank must lie in [1, {n}], got {args.rank}")
    norm_a = norm(a)

    def truncate(result, seed):
        approx, e = low_rank(result, args.rank, a)
        if args.out:
            write_tensor(_suffixed(args.out, seed), approx)
        return {"err": e, "err_rel": e / norm_a if norm_a > 0 else 0.0, "rank": args.rank}

    return _solver_runs(args, a, out, err, extra=truncate)


def cmd_check(args, out):
    a = read_tensor(args.input)
    asym = asymmetry(a)
    norm_a = norm(a)
    report = {
        "n": a.shape[0],
        "norm": norm_a,
        "offrel": relative_off_norm(a),
        "asymmetry": asym,
        "symmetric": asym <= ANTISYMMETRY_TOL * max(norm_a, 1.0),
        "antisymmetric": is_antisymmetric(a, ANTISYMMETRY_TOL * max(norm_a, 1.0)),
    }
    for key, v in report.items():
        text = str(v).lower() if isinstance(v, bool) else repr(v)
        print(f"{key} {text}", file=out)
    if args.json_summary:
        _write_json(args.json_summary, report)
    return EXIT_OK


def main(argv=None, out=None, err=None):
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen":
            return cmd_gen(args, out)
        if args.command == "run":
            return cmd_run(args, out, err)
        if args.command == "lowrank":
            return cmd_lowrank(args, out, err)
        return cmd_check(args, out)
    except (ConfigError, UsageError) as exc:
        print(f"otdiag: error: {exc}", file=err)
        return EXIT_USAGE
    except (OTDError, OSError) as exc:
        print(f"otdiag: error: {exc}", file=err)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
