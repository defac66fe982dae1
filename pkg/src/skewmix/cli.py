"""Command-line front end.

Every subcommand prints its table (CSV or JSON) to stdout, writes it to
``--outdir`` and writes a run manifest next to it.

Exit codes: 0 success, 1 invalid input, 2 numerical failure, 3 a failed
inequality check.

Observable files for ``correlation`` hold ``g`` and optionally ``h`` (default
``h = g``), each either ``{"function": "<expr in x, u>"}`` or
``{"modes": {"<k>": <mode>}}`` where a mode is an expression in ``x``, an
``[re, im]`` pair of expressions, or ``{"grid": [...]}`` (or
``{"grid_re": [...], "grid_im": [...]}``) sampled at cell midpoints. Optional
keys ``B`` and ``M`` set the mode cutoff and fibre grid.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError, InvariantViolation, NumericalError, TauPiecewiseConstant, ValidationError
from .grid import GridFunction
from .mapspec import example_path, from_config, load_config

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_CHECK = 0, 1, 2, 3


@dataclass
class RunManifest:
    command: str
    config_hash: str
    constants: dict
    version: str
    wall_time: float
    outputs: list = field(default_factory=list)
    arguments: dict = field(default_factory=dict)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def to_csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def _resolve_config(path):
    if path is None:
        raise ConfigError("--config is required")
    p = Path(path)
    if not p.exists():
        q = example_path(path)
        if not q.exists():
            raise ConfigError(f"no config file or bundled example named {path!r}")
        p = q
    return p


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def _parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="map config JSON (path or bundled example name)")
    common.add_argument("--out", choices=("csv", "json"), default="csv")
    common.add_argument("--grid", type=int, default=None, help="grid size N")
    common.add_argument("--threads", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--outdir", default=None, help="directory for outputs and the manifest")
    p = _Parser(prog="skewmix", description="Mixing diagnostics for expanding skew products on the torus.")
    p.add_argument("--version", action="version", version=f"skewmix {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("validate", parents=[common])
    s = sub.add_parser("preimages", parents=[common])
    s.add_argument("--y", type=float, required=True)
    s.add_argument("--n", type=int, required=True)
    s = sub.add_parser("phi", parents=[common])
    s.add_argument("--n", type=int, default=8)
    s.add_argument("--samples", type=int, default=64)
    s = sub.add_parser("cohomology", parents=[common])
    s.add_argument("--tol", type=float, default=1e-10)
    s = sub.add_parser("spectrum", parents=[common])
    s.add_argument("--b", type=float, required=True)
    s.add_argument("--probes", type=int, default=20)
    s = sub.add_parser("growth", parents=[common])
    s.add_argument("--omega0", required=True, help="interval as 'a,b'")
    s.add_argument("--n", type=int, default=10)
    s.add_argument("--eps", type=float, default=1e-4)
    s.add_argument("--literal", action="store_true", help="distance to every boundary image, not only the piece's own")
    s = sub.add_parser("vdc", parents=[common])
    s.add_argument("--suite", default="default")
    s.add_argument("--count", type=int, default=50)
    s = sub.add_parser("correlation", parents=[common])
    s.add_argument("--obs", required=True)
    s.add_argument("--nmax", type=int, default=20)
    s = sub.add_parser("suite", parents=[common])
    s.add_argument("--only", default=None, help="comma-separated criterion numbers")
    return p


def _load_map(args):
    return from_config(_resolve_config(args.config))


def _threads(args):
    if args.threads:
        return args.threads
    try:
        return max(1, int(os.environ.get("SKEWMIX_THREADS", "1")))
    except ValueError:
        return 1


def _seed(args):
    return 42 if args.seed is None else args.seed


def cmd_validate(args):
    sp = _load_map(args)
    return sp, ["quantity", "value"], list(sp.summary().items()), None


def cmd_preimages(args):
    from .dynamics import preimage_tree

    sp = _load_map(args)
    t = preimage_tree(sp, [args.y], args.n)
    rows = [(str(t.words[i]) if hasattr(t.words[i], "symbols") else "".join(map(str, t.words[i])), t.x[i], t.J[i], t.tau[i], t.dtau[i]) for i in range(len(t))]
    return sp, ["word", "x", "J_n", "tau_n", "dtau_n"], rows, None


def cmd_phi(args):
    from .cones import phi

    sp = _load_map(args)
    rows = []
    for n in range(1, args.n + 1):
        v = phi(sp, n, args.samples)
        rows.append((n, v, v ** (1.0 / n)))
    return sp, ["n", "phi", "phi_pow"], rows, None


def cmd_cohomology(args, outdir):
    from .cohomology import DEFAULT_GRID, analyze

    sp = _load_map(args)
    rep = analyze(sp, args.grid or DEFAULT_GRID, args.tol)
    x = GridFunction.midpoints(rep.theta.N)
    extra = {}
    for name, vals in (("theta", rep.theta.values.real), ("chi", rep.chi.values.real)):
        path = outdir / f"cohomology_{name}.csv"
        path.write_text(to_csv(["x", name], zip(x, vals)))
        extra[f"{name}_csv_path"] = str(path)
    out = {"verdict": rep.verdict, "deviation": rep.deviation, **extra}
    return sp, None, out, list(extra.values())


def cmd_spectrum(args):
    from .transfer import norm_decay_experiment, scheme_constants

    sp = _load_map(args)
    consts = scheme_constants(sp)
    N = args.grid or 2 ** 13
    r = norm_decay_experiment(sp, args.b, consts, N=N, n_random=args.probes, seed=_seed(args), threads=_threads(args))
    return sp, ["probe_id", "ratio", "n_b", "gamma2_est"], r.rows(), None


def cmd_growth(args):
    from . import growth

    sp = _load_map(args)
    try:
        a, b = (float(v) for v in args.omega0.split(","))
    except ValueError as exc:
        raise ConfigError(f"--omega0 must be 'a,b': {exc}") from exc
    if b - a > sp.delta + 1e-15:
        raise ConfigError(f"|Omega0| = {b - a} exceeds delta = {sp.delta}")
    state = growth.initial_state((a, b))
    rows = []
    for n in range(1, args.n + 1):
        state = growth.refine(sp, state)
        lhs = growth.z_epsilon(sp, state, args.eps, own_endpoints_only=not args.literal)
        rhs = growth.growth_rhs(sp, (a, b), n, args.eps)
        rows.append((n, state.size, lhs, rhs, lhs <= growth.GROWTH_SLACK * rhs))
    return sp, ["n", "pieces", "lhs", "rhs", "pass"], rows, None


def cmd_vdc(args):
    from .oscillatory import make_problem, oscillatory_integral, random_suite, vdc_bound

    if args.suite == "default":
        problems = random_suite(_seed(args), args.count)
    elif args.suite == "closed_form":
        problems = [make_problem("1", "x", math.pi)]
    else:
        raise ConfigError(f"unknown suite {args.suite!r}")
    rows = []
    for i, p in enumerate(problems):
        val = abs(oscillatory_integral(p))
        corrected, literal = vdc_bound(p)
        rows.append((i, val, literal, corrected, val <= corrected))
    return None, ["problem_id", "integral_abs", "bound_paper", "bound_corrected", "pass"], rows, None


def _mode_spec(v):
    if isinstance(v, dict):
        if "grid" in v:
            return GridFunction(np.asarray(v["grid"], dtype=float))
        if "grid_re" in v:
            return GridFunction(np.asarray(v["grid_re"], dtype=float) + 1j * np.asarray(v.get("grid_im", 0.0), dtype=float))
        raise ConfigError(f"unrecognised mode spec {v!r}")
    return v


def load_observables(path, N):
    from .correlation import DEFAULT_B, Observable2D

    cfg = load_config(path)
    B = int(cfg.get("B", DEFAULT_B))
    M = int(cfg.get("M", 64))

    def build(spec):
        if "function" in spec:
            return Observable2D.from_function(spec["function"], N=N, M=M, B=B)
        if "modes" in spec:
            return Observable2D.from_modes({int(k): _mode_spec(v) for k, v in spec["modes"].items()}, B)
        raise ConfigError("observable needs 'function' or 'modes'")

    if "g" not in cfg:
        raise ConfigError("observable file needs 'g'")
    g = build(cfg["g"])
    h = build(cfg["h"]) if "h" in cfg else g
    return g, h


def cmd_correlation(args):
    from .correlation import DEFAULT_N, correlation_direct, correlation_fourier
    from .transfer import invariant_density

    sp = _load_map(args)
    N = args.grid or DEFAULT_N
    g, h = load_observables(args.obs, N)
    h_nu = invariant_density(sp, N, interp="cubic")
    four = correlation_fourier(sp, g, h, args.nmax, N=N, h_nu=h_nu)
    direct = correlation_direct(sp, g, h, args.nmax, h_nu=h_nu)
    rows = [(n, four.values[n].real, four.values[n].imag, direct.values[n].real, four.fit_zeta, four.fit_r2) for n in range(args.nmax + 1)]
    return sp, ["n", "cor_fourier_re", "cor_fourier_im", "cor_direct", "zeta_fit", "r2"], rows, None


def cmd_suite(args):
    from .suite import run_suite

    select = None
    if args.only:
        select = {int(v) for v in args.only.split(",")}
    results = run_suite(select, log=lambda s: print(s, file=sys.stderr))
    rows = [(r.number, r.name, r.passed, r.seconds, json.dumps(_jsonable(r.details), sort_keys=True)) for r in results]
    return None, ["criterion", "name", "pass", "seconds", "details"], rows, all(r.passed for r in results)


def run(argv=None) -> int:
    """Run one subcommand and return its exit code."""
    t0 = time.perf_counter()
    try:
        args = _parser().parse_args(argv)
        outdir = Path(args.outdir) if args.outdir else None
        if outdir is not None:
            outdir.mkdir(parents=True, exist_ok=True)
        handler = globals()[f"cmd_{args.command}"]
        if args.command == "cohomology":
            sp, cols, rows, extra = handler(args, outdir or Path("."))
        else:
            sp, cols, rows, extra = handler(args)
    except TauPiecewiseConstant as exc:
        print(json.dumps({"verdict": "Cohomologous", "reason": str(exc)}))
        return EXIT_OK
    except ValidationError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except InvariantViolation as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CHECK
    if cols is None:
        text = json.dumps(_jsonable(rows), indent=2, sort_keys=True) + "\n"
        ext = "json"
    elif args.out == "json":
        text = json.dumps([_jsonable(dict(zip(cols, r))) for r in rows], indent=2) + "\n"
        ext = "json"
    else:
        text = to_csv(cols, rows)
        ext = "csv"
    sys.stdout.write(text)
    outputs = list(extra) if isinstance(extra, list) else []
    if outdir is not None:
        path = outdir / f"{args.command}.{ext}"
        path.write_text(text, newline="")
        outputs.append(str(path))
    constants = {}
    if sp is not None:
        from .transfer import scheme_constants

        constants = dict(sp.summary())
        constants.update(scheme_constants(sp).as_dict())
    manifest = RunManifest(
        args.command,
        sp.config_hash() if sp is not None else "",
        _jsonable(constants),
        __version__,
        time.perf_counter() - t0,
        outputs,
        _jsonable({k: v for k, v in vars(args).items() if k != "command"}),
    )
    blob = json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n"
    if outdir is not None:
        (outdir / f"{args.command}.manifest.json").write_text(blob)
    else:
        sys.stderr.write(blob)
    if args.command == "suite" and extra is False:
        return EXIT_CHECK
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
