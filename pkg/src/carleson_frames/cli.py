"""Command line front end: one certification per invocation, JSON out.

Exit status: 0 when the run certifies, 1 when it ran but the certificate
failed (or did not converge), 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._validation import DEFAULT_TOL
from .carleson import (
    CarlesonSpectrum,
    NotCarlesonError,
    carleson_delta,
    make_geometric_real,
    make_sector,
)
from .certify import (
    degenerate_check,
    degenerate_null_vector,
    extension_chain,
    perturbation_J,
    verify_chps_chain,
)
from .continuous import (
    continuous_report,
    delta_frame_bound,
    discrete_sandwich_check,
    energy_samples,
    write_samples_csv,
)
from .exponents import log_block_density
from .frame_ops import (
    ExponentSet,
    analysis_apply,
    bounds_for,
    frame_bounds_converged,
    reconstruct,
    synthesis_matrix,
    RankDeficientError,
)


class InputError(ValueError):
    pass


def _kv(text):
    out = {}
    for part in filter(None, text.split(",")):
        if "=" not in part:
            raise InputError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _load_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def parse_spectrum(arg):
    """Path to a spectrum JSON file, or ``geometric:base=..,ratio=..,count=..``
    or ``points:z0,z1,...`` with Python complex literals."""
    if arg.startswith("geometric:") or arg == "geometric":
        kv = _kv(arg.partition(":")[2])
        return make_geometric_real(float(kv.get("base", 0.5)), float(kv.get("ratio", 0.5)),
                                   int(kv.get("count", 20)))
    if arg.startswith("points:"):
        pts = [complex(p.replace(" ", "")) for p in arg[7:].split(",") if p]
        return CarlesonSpectrum.from_points(pts, generator_tag=arg)
    data = _load_json(arg)
    if isinstance(data, dict) and "points" not in data and isinstance(data.get("result"), dict):
        data = data["result"]  # a gen-spectrum report
    try:
        return CarlesonSpectrum.from_dict(data)
    except ValueError as exc:
        raise InputError(f"{arg}: {exc}") from exc


def parse_lambda(arg, count, seed=0, jitter=None):
    """``arith:N=3,jitter=random`` | ``explicit:0,1.5,4`` | ``dyadic`` |
    ``naturals`` | path to a JSON list (or ``{"values": [...]}``)."""
    if arg in ("naturals", "nat"):
        return ExponentSet.naturals(count)
    if arg == "dyadic":
        return ExponentSet.dyadic(count)
    if arg.startswith("arith:"):
        kv = _kv(arg[6:])
        N = int(kv.get("N", 1))
        rule = jitter or kv.get("jitter", "zero")
        s = int(kv.get("seed", seed))
        if rule in ("zero", "random", "integer", "max"):
            return ExponentSet.jittered(N, count, rule=rule, seed=s)
        if Path(rule).exists():
            jit = _load_json(rule)
            return ExponentSet.jittered(N, count, jitters=np.asarray(jit, dtype=float))
        try:
            const = float(rule)
        except ValueError:
            raise InputError(f"unknown jitter rule {rule!r}") from None
        return ExponentSet.jittered(N, count, jitters=np.full(count, const))
    if arg.startswith("explicit:"):
        vals = [float(v) for v in arg[9:].split(",") if v]
        return ExponentSet.explicit(vals, tag=arg)
    data = _load_json(arg)
    vals = data["values"] if isinstance(data, dict) else data
    return ExponentSet.explicit(vals, tag=f"file:{arg}")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, complex):
        return [_jsonable(obj.real), _jsonable(obj.imag)]
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return None
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def _seeds(seed, trials):
    return [int(s) for s in np.random.default_rng(seed).integers(0, 2**31 - 1, size=trials)]


def _tol(args):
    return DEFAULT_TOL if args.tol is None else args.tol


# --- commands -------------------------------------------------------------


def cmd_gen_spectrum(args):
    if args.kind == "geometric":
        spec = make_geometric_real(args.base, args.ratio, args.count)
    elif args.kind == "sector":
        r = 1.0 - args.base * args.ratio ** np.arange(args.count)
        spec = make_sector(r, args.c, args.rule)
    else:
        if not args.points:
            raise InputError("--points is required for kind=points")
        spec = parse_spectrum("points:" + args.points)
    report = spec.to_dict()
    try:
        report["carleson_delta"] = carleson_delta(spec).to_dict()
    except NotCarlesonError as exc:
        report["carleson_delta"] = {"error": str(exc)}
        return report, 1
    return report, 0


def cmd_check_carleson(args):
    spec = parse_spectrum(args.spectrum)
    try:
        est = carleson_delta(spec, args.n)
    except NotCarlesonError as exc:
        return {"carleson": False, "error": str(exc)}, 1
    return {"carleson": True, "delta": est.to_dict(), "Delta": delta_frame_bound(est.delta_n)}, 0


def cmd_frame_bounds(args):
    spec = parse_spectrum(args.spectrum)
    rows = args.rows or len(spec) - args.offset
    cols = args.cols or 400
    lam = parse_lambda(args.lam or "naturals", cols, args.seed, args.jitter)
    if args.offset:
        est = bounds_for(spec, lam, args.offset, rows, cols)
        return {"bounds": est.to_dict()}, 0 if est.A_hat > 0 else 1
    rep = discrete_sandwich_check(spec, rows, cols, lam)
    if args.csv:
        synthesis_matrix(spec, lam, 0, rows, cols).to_csv(args.csv)
    out = rep.to_dict()
    out["A_hat"], out["B_hat"] = rep.A_hat, rep.B_hat
    return out, 0 if rep.contained else 1


def cmd_subsample_check(args):
    spec = parse_spectrum(args.spectrum or "geometric:count=20")
    rows = args.rows or 8
    max_cols = args.max_cols or (1 << 18)
    rel_tol = args.rel_tol
    trials = []
    ok = True
    for s in _seeds(args.seed, args.trials):
        lam = ExponentSet.jittered(args.N, max_cols, rule=args.jitter or "random", seed=s)
        est = frame_bounds_converged(spec, lam, rows, K_start=args.cols or 64,
                                     rel_tol=rel_tol, max_cols=max_cols)
        drift = abs(est.history[-1][1] - est.history[-2][1]) / est.history[-1][1] \
            if len(est.history) > 1 and est.history[-1][1] > 0 else None
        good = est.converged and est.A_hat > 0
        ok &= good
        trials.append({"seed": s, "bounds": est.to_dict(), "last_drift": drift, "ok": good})
    return {"N": args.N, "rows": rows, "rel_tol": rel_tol, "trials": trials, "all_ok": ok}, \
        0 if ok else 1


def cmd_perturbation(args):
    spec = parse_spectrum(args.spectrum or "geometric:count=48")
    cert = perturbation_J(spec, args.N, args.n, frame_rows=args.rows or 20)
    n_chain = args.chain_rows or min(len(spec), cert.J + 4)
    K = args.cols or (1 << 16)
    chains = []
    for s in _seeds(args.seed, args.trials):
        jit = ExponentSet.jittered(args.N, K, rule=args.jitter or "random", seed=s).jitters
        rep = verify_chps_chain(spec, args.N, jit, cert.J, n_chain, tol=_tol(args))
        chains.append({"seed": s, **rep.to_dict()})
    violations = sum(not c["holds"] for c in chains)
    ok = cert.satisfied and violations == 0
    return {"certificate": cert.to_dict(), "chain_rows": n_chain, "chains": chains,
            "violations": violations}, 0 if ok else 1


def cmd_extension(args):
    spec = parse_spectrum(args.spectrum or "geometric:count=48")
    n = args.rows or 20
    count = args.cols or (1 << 23)
    lam = parse_lambda(args.lam or "arith:N=2,jitter=random", count, args.seed, args.jitter)
    J = args.J
    cert = None
    if J is None:
        N = lam.N if lam.kind == "jittered_arithmetic" else 1
        cert = perturbation_J(spec, N, frame_rows=n)
        J = cert.J
    if J >= n:
        raise InputError(f"J={J} leaves no rows below n={n}; raise --rows")
    rep = extension_chain(spec.prefix(n), lam, J, n, max_cols=count)
    out = rep.to_dict()
    out["perturbation"] = None if cert is None else cert.to_dict()
    return out, 0 if rep.success else 1


def cmd_degenerate(args):
    spec = parse_spectrum(args.spectrum)
    cols = args.cols or 400
    pairs = degenerate_check(spec, args.N)
    lam = ExponentSet.naturals(cols, N=args.N)
    est = bounds_for(spec, lam, 0, len(spec), cols)
    nulls = []
    for p in pairs:
        f = degenerate_null_vector(spec, p)
        samples = analysis_apply(spec, lam, f, cols)
        nulls.append({"pair": list(p), "sample_energy": float(np.sum(np.abs(samples) ** 2)),
                      "norm_sq": float(np.sum(np.abs(f) ** 2))})
    return {"N": args.N, "pairs": [list(p) for p in pairs], "null_vectors": nulls,
            "bounds": est.to_dict(), "frame_fails": bool(pairs)}, 1 if pairs else 0


def _grid(text, default):
    if not text:
        return list(default)
    if text.count(":") == 2:
        a, b, m = text.split(":")
        return list(np.geomspace(float(a), float(b), int(m)))
    return [float(v) for v in text.split(",")]


def cmd_density(args):
    from .exponents import DEFAULT_MU_GRID, DEFAULT_T_GRID

    mu = _grid(args.mu, DEFAULT_MU_GRID)
    t = _grid(args.t_grid, DEFAULT_T_GRID)
    reach = max(mu) * max(t)
    spec_arg = args.lam or "naturals"
    if args.cols:
        count = args.cols
    elif spec_arg == "dyadic":
        count = int(np.ceil(np.log2(reach))) + 2
    elif spec_arg.startswith("arith:"):
        count = int(np.ceil(reach / int(_kv(spec_arg[6:]).get("N", 1)))) + 2
    else:
        count = int(np.ceil(reach)) + 2
    lam = parse_lambda(spec_arg, count, args.seed, args.jitter)
    rep = log_block_density(lam, mu, t)
    return rep.to_dict(), 0


def cmd_continuous(args):
    spec = parse_spectrum(args.spectrum or "geometric:count=20")
    n = args.n or min(len(spec), 10)
    tol = 1e-6 if args.tol is None else args.tol
    rng = np.random.default_rng(args.seed)
    vectors, tags = [], []
    for i in range(args.trials):
        size = int(rng.integers(1, n + 1))
        f = np.zeros(n, dtype=complex)
        f[:size] = rng.standard_normal(size) + 1j * rng.standard_normal(size)
        vectors.append(f)
        tags.append(f"seed{args.seed}-v{i}-support{size}")
    rep = continuous_report(spec, vectors, n, args.dt, args.T, tol, tags)
    if args.csv and vectors:
        T = args.T or 10.0
        t, e = energy_samples(spec, vectors[0], args.dt, T)
        write_samples_csv(args.csv, t, e)
    return rep.to_dict(), 0 if rep.all_within else 1


def cmd_reconstruct(args):
    spec = parse_spectrum(args.spectrum or "geometric:count=20")
    rows = args.rows or 8
    max_cols = args.max_cols or (1 << 16)
    lam = parse_lambda(args.lam or "arith:N=2,jitter=random", max_cols, args.seed, args.jitter)
    est = frame_bounds_converged(spec, lam, rows, K_start=64, rel_tol=1e-3, max_cols=max_cols)
    K = est.K_cols
    m = synthesis_matrix(spec, lam, 0, rows, K)
    tol = 1e-8 if args.tol is None else args.tol
    rng = np.random.default_rng(args.seed)
    results, worst = [], 0.0
    try:
        for i in range(args.trials):
            f = rng.standard_normal(rows) + 1j * rng.standard_normal(rows)
            f[rng.integers(1, rows + 1):] = 0
            samples = analysis_apply(spec, lam, f, K)
            f_hat = reconstruct(samples, m)
            err = float(np.linalg.norm(f_hat - f) / np.linalg.norm(f))
            worst = max(worst, err)
            results.append({"trial": i, "relative_error": err})
    except RankDeficientError as exc:
        return {"bounds": est.to_dict(), "error": str(exc), "sigma_min": exc.sigma_min}, 1
    ok = est.converged and worst < tol
    return {"bounds": est.to_dict(), "K": K, "trials": results, "worst_relative_error": worst,
            "tol": tol, "ok": ok}, 0 if ok else 1


COMMANDS = {
    "gen-spectrum": cmd_gen_spectrum,
    "check-carleson": cmd_check_carleson,
    "frame-bounds": cmd_frame_bounds,
    "subsample-check": cmd_subsample_check,
    "perturbation": cmd_perturbation,
    "extension": cmd_extension,
    "degenerate": cmd_degenerate,
    "density": cmd_density,
    "continuous": cmd_continuous,
    "reconstruct": cmd_reconstruct,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spectrum", help="spectrum JSON path or inline geometric:/points: spec")
    common.add_argument("--lambda", dest="lam", help="exponent spec or JSON path")
    common.add_argument("--rows", type=int)
    common.add_argument("--cols", type=int)
    common.add_argument("--max-cols", type=int)
    common.add_argument("--offset", type=int, default=0)
    common.add_argument("--n", type=int)
    common.add_argument("--N", type=int, default=1)
    common.add_argument("--J", type=int)
    common.add_argument("--jitter", help="jitter rule (zero|random|integer|max|<value>) or JSON path")
    common.add_argument("--dt", type=float, default=1e-3)
    common.add_argument("--T", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--rel-tol", type=float, default=0.05)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--trials", type=int, default=10)
    common.add_argument("--chain-rows", type=int)
    common.add_argument("--mu", help="comma list, or a:b:m for a geometric grid")
    common.add_argument("--t-grid", help="comma list, or a:b:m for a geometric grid")
    common.add_argument("--csv", help="also write a CSV view to this path")
    common.add_argument("--out", help="write the JSON report here instead of stdout")

    parser = argparse.ArgumentParser(prog="carleson-frames", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "gen-spectrum":
            p.add_argument("--kind", choices=("geometric", "sector", "points"), default="geometric")
            p.add_argument("--base", type=float, default=0.5)
            p.add_argument("--ratio", type=float, default=0.5)
            p.add_argument("--count", type=int, default=20)
            p.add_argument("--c", type=float, default=0.0)
            p.add_argument("--rule", default="alternating")
            p.add_argument("--points", help="comma-separated complex literals")
    return parser


def run(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    config = {k: v for k, v in sorted(vars(args).items()) if k != "out"}
    try:
        report, status = COMMANDS[args.command](args)
    except (InputError, ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    doc = {
        "command": args.command,
        "provenance": {
            "config": config,
            "library_version": __version__,
            "tolerances": {"default": DEFAULT_TOL},
        },
        "result": report,
        "status": {0: "certified", 1: "failed"}[status],
    }
    text = json.dumps(_jsonable(doc), sort_keys=True, indent=2, allow_nan=False) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return status


def main():
    sys.exit(run())
