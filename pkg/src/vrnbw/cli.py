"""Experiment driver: seeded parallel Monte Carlo and analysis reports.

Every subcommand writes one or more header-bearing CSV files (schemas in
FORMATS.md) plus a JSON run manifest echoing the configuration, so any
figure can be regenerated from the manifest alone.  Given the same
configuration and base seed the CSV outputs are byte-identical across runs;
per-run seeds come from a splittable counter-based generator, so growing
--runs never perturbs earlier rows.

Exit codes: 0 on success, 2 on configuration errors, 3 on runtime failures.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, equilibria, flow, kernels, measures, walk

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

MODES = ("simulate", "localize", "flow", "equilibria", "stability", "taylor-check", "path-bound")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_rows(path: str, header: list[str], rows: list[list], fmt: str):
    if fmt == "json":
        path = os.path.splitext(path)[0] + ".json"
        payload = [dict(zip(header, [_coerce(x) for x in row])) for row in rows]
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=None, separators=(",", ":"), sort_keys=True)
            fh.write("\n")
    else:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([_fmt(x) for x in row])
    return path


def _coerce(x):
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    return x


def _write_manifest(outdir: str, mode: str, config: dict, files: list[str], wall: float, failures: list):
    manifest = {
        "mode": mode,
        "config": {k: _coerce(v) for k, v in sorted(config.items())},
        "package_version": __version__,
        "numpy_version": np.__version__,
        "wall_time_s": wall,
        "outputs": [os.path.basename(f) for f in files],
        "failures": failures,
    }
    path = os.path.join(outdir, f"{mode.replace('-', '_')}_manifest.json")
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _alpha_list(text: str) -> list[float]:
    vals = [float(tok) for tok in str(text).split(",") if tok.strip()]
    if not vals or any(a < 1.0 for a in vals):
        raise argparse.ArgumentTypeError("alpha values must be >= 1")
    return vals


def _float_list(text: str) -> list[float]:
    return [float(tok) for tok in str(text).split(",") if tok.strip()]


def _int_list(text: str) -> list[int]:
    return [int(tok) for tok in str(text).split(",") if tok.strip()]


def threshold_support(alpha: float) -> float:
    """Largest admissible localization size band edge (3 alpha - 1)/(alpha - 1)."""
    if alpha <= 1.0:
        return float("inf")
    return (3.0 * alpha - 1.0) / (alpha - 1.0)


# ---------------------------------------------------------------------------
# Subcommand runners
# ---------------------------------------------------------------------------


def _localize_one(job) -> walk.LocalizationRun:
    alpha, n, steps, window, seed, idx = job
    return walk.localization_run(alpha, n, steps, window, seed, idx)


def _run_localize(args, outdir: str) -> list[str]:
    files = []
    per_alpha: dict[float, list[walk.LocalizationRun]] = {}
    jobs = [
        (alpha, args.n, args.steps, args.window, args.seed, r)
        for alpha in args.alpha
        for r in range(args.runs)
    ]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_localize_one, jobs, chunksize=1))
    else:
        results = [_localize_one(j) for j in jobs]
    for (alpha, *_rest), res in zip(jobs, results):
        per_alpha.setdefault(alpha, []).append(res)
    for alpha in per_alpha:
        per_alpha[alpha].sort(key=lambda r: r.run_index)

    if len(args.alpha) == 1:
        alpha = args.alpha[0]
        rows = [
            [r.run_index, r.support_size, r.sup_deviation, r.bound_ok]
            for r in per_alpha[alpha]
        ]
        files.append(
            _write_rows(
                os.path.join(outdir, "localize.csv"),
                ["seed", "S_size", "sup_dev_from_uniform", "max_v_bound_ok"],
                rows,
                args.format,
            )
        )
    else:
        run_rows = []
        sweep_rows = []
        for alpha in args.alpha:
            res = per_alpha[alpha]
            for r in res:
                run_rows.append(
                    [alpha, r.run_index, r.support_size, r.sup_deviation, r.bound_ok]
                )
            hist = walk.support_histogram(res)
            thr = threshold_support(alpha)
            for size in range(3, args.n + 1):
                f = hist.get(size, 0.0)
                adm = (size == args.n) if alpha == 1.0 else (3 <= size < thr)
                sweep_rows.append(
                    [alpha, size, int(round(f * len(res))), f, adm, thr]
                )
        files.append(
            _write_rows(
                os.path.join(outdir, "localize_runs.csv"),
                ["alpha", "seed", "S_size", "sup_dev_from_uniform", "max_v_bound_ok"],
                run_rows,
                args.format,
            )
        )
        files.append(
            _write_rows(
                os.path.join(outdir, "sweep.csv"),
                ["alpha", "S_size", "count", "frequency", "admissible", "threshold_K"],
                sweep_rows,
                args.format,
            )
        )
    return files


def _run_simulate(args, outdir: str) -> list[str]:
    header = ["run", "n", "S_size", "max_v_bound_ok"] + [f"v{i}" for i in range(args.n)]
    rows = []
    for r in range(args.runs):
        st = walk.init_walk(
            walk.complete_graph(args.n), args.alpha[0], walk.run_seed_sequence(args.seed, r)
        )
        summ = walk.run(st, args.steps, record_every=args.record_every, window=args.window)
        for snap in summ.snapshots:
            rows.append(
                [r, snap.n, snap.support_size, summ.bound_ok] + list(snap.v)
            )
    return [_write_rows(os.path.join(outdir, "simulate.csv"), header, rows, args.format)]


def _run_flow(args, outdir: str) -> list[str]:
    header = ["run", "t", "H", "F_inf"] + [f"v{i}" for i in range(args.n)]
    rows = []
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(args.seed)))
    cfg = flow.FlowConfig(
        step_size=args.dt,
        max_time=args.max_time,
        equilibrium_tolerance=args.tol,
        record_every=args.record_every,
    )
    for r in range(args.runs):
        w = rng.dirichlet(np.ones(args.n))
        u = np.full(args.n, 1.0 / args.n)
        span = w.max() - w.min()
        if span > measures.SIGMA_GAP:
            w = u + (w - u) * (0.999 * measures.SIGMA_GAP / span)
        tr = flow.integrate_flow(w, args.alpha[0], cfg)
        for t, state, h, fn in zip(tr.times, tr.states, tr.lyapunov_values, tr.field_norms):
            rows.append([r, t, h, fn] + list(state))
    return [_write_rows(os.path.join(outdir, "flow.csv"), header, rows, args.format)]


def _eig_string(report: equilibria.StabilityReport) -> str:
    return ";".join(f"{float(g.value)!r}x{g.multiplicity}" for g in report.eigenvalues)


def _run_equilibria(args, outdir: str, per_eigenvalue: bool) -> list[str]:
    if per_eigenvalue:
        header = [
            "alpha", "kind", "K", "M", "eigenvalue", "multiplicity",
            "description", "classification",
        ]
    else:
        header = [
            "alpha", "kind", "K", "M", "a", "b", "x", "p", "beta",
            "orbit_count", "residual_F_inf", "classification",
            "max_eigenvalue", "eigenvalues",
        ]
    rows = []
    for alpha in args.alpha:
        for rec in equilibria.enumerate_equilibria(args.n, alpha):
            rep = equilibria.classify_stability(rec)
            if per_eigenvalue:
                for g in rep.eigenvalues:
                    rows.append(
                        [alpha, rec.kind, rec.K, rec.M, g.value, g.multiplicity,
                         g.description, rep.classification]
                    )
            else:
                res = float(np.abs(flow.vector_field(rec.vector, alpha)).max())
                rows.append(
                    [alpha, rec.kind, rec.K, rec.M, rec.a,
                     "" if rec.b is None else rec.b,
                     "" if rec.x is None else rec.x,
                     "" if rec.p is None else rec.p,
                     rec.beta, rec.orbit_count, res, rep.classification,
                     rep.max_eigenvalue, _eig_string(rep)]
                )
    name = "stability.csv" if per_eigenvalue else "equilibria.csv"
    return [_write_rows(os.path.join(outdir, name), header, rows, args.format)]


def _run_taylor(args, outdir: str) -> list[str]:
    header = [
        "n", "alpha", "corner", "vector_index", "eps",
        "sup_diff_Qg", "top_residual", "mixed_residual", "low_residual",
    ]
    rows = []
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(args.seed)))
    n = args.n
    corner_support = (0, 1, 2)
    corner = measures.uniform_on(corner_support, n)
    for vi in range(args.vectors):
        a = rng.standard_normal(n)
        bundle = kernels.taylor_limit_at_uniform3(a[:3], a[3:])
        limit = bundle.edge_function(corner_support)
        g = kernels.edge_observable(a, n)
        for eps in args.eps:
            v = (1.0 - eps) * corner + eps * measures.uniform_on(range(n), n)
            P = kernels.build_vrnbw_kernel(v, args.alpha[0])
            pi = kernels.stationary_solve(P)
            Q = kernels.pseudo_inverse(P, pi)
            diff = float(np.abs(Q @ g - limit).max())
            resid = kernels.stationary_expansion_check(v, args.alpha[0], corner_support)
            rows.append(
                ["%d" % n, args.alpha[0], "0+1+2", vi, eps, diff,
                 resid.top_residual, resid.mixed_residual, resid.low_residual]
            )
    return [_write_rows(os.path.join(outdir, "taylor.csv"), header, rows, args.format)]


def _run_path_bound(args, outdir: str) -> list[str]:
    g = walk.complete_graph(args.n)
    cycle = args.cycle if args.cycle else list(range(3))
    pb = walk.path_formation_lower_bound(g, cycle, args.alpha[0], args.kmax)
    mc_freq = ""
    if args.mc_runs > 0:
        mc_freq = walk.monte_carlo_path_formation(
            g, cycle, args.alpha[0], args.loops, args.mc_runs, args.seed
        )
    header = [
        "L", "alpha", "k_max", "first_loop_probability", "truncated_bound",
        "tail_exponent", "lower_bracket", "mc_runs", "mc_loops", "mc_frequency",
    ]
    rows = [[
        len(pb.cycle), pb.alpha, pb.k_max, pb.first_loop_probability, pb.value,
        pb.tail_exponent, pb.lower_bracket, args.mc_runs, args.loops, mc_freq,
    ]]
    return [_write_rows(os.path.join(outdir, "pathbound.csv"), header, rows, args.format)]


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="vrnbw",
        description="Vertex-reinforced non-backtracking walk experiments",
    )
    p.add_argument("--config", help="TOML or JSON file with default option values")
    sub = p.add_subparsers(dest="mode", required=True)

    def common(sp, alpha_default="2"):
        sp.add_argument("--n", type=int, default=6, help="number of vertices")
        sp.add_argument("--alpha", type=_alpha_list, default=_alpha_list(alpha_default),
                        help="reinforcement strength, comma-separated for a grid")
        sp.add_argument("--seed", type=int, default=1, help="base seed")
        sp.add_argument("--out", default=None, help="output directory (default $VRNBW_OUT or ./vrnbw_out)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")

    sp = sub.add_parser("simulate", help="record occupation-measure trajectories")
    common(sp)
    sp.add_argument("--steps", type=int, default=10000)
    sp.add_argument("--runs", type=int, default=1)
    sp.add_argument("--record-every", type=int, default=1000)
    sp.add_argument("--window", type=int, default=None)

    sp = sub.add_parser("localize", help="support-size histogram over seeded runs")
    common(sp)
    sp.add_argument("--steps", type=int, default=100000)
    sp.add_argument("--runs", type=int, default=100)
    sp.add_argument("--window", type=int, default=1000)
    sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("flow", help="integrate the mean-field flow from random starts")
    common(sp)
    sp.add_argument("--runs", type=int, default=1)
    sp.add_argument("--max-time", type=float, default=50.0)
    sp.add_argument("--dt", type=float, default=1e-2)
    sp.add_argument("--tol", type=float, default=1e-10)
    sp.add_argument("--record-every", type=int, default=10)

    sp = sub.add_parser("equilibria", help="equilibrium table with classifications")
    common(sp)

    sp = sub.add_parser("stability", help="per-eigenvalue stability table")
    common(sp)

    sp = sub.add_parser("taylor-check", help="corner-limit convergence residuals")
    common(sp)
    sp.add_argument("--eps", type=_float_list, default=[1e-2, 1e-3, 1e-4])
    sp.add_argument("--vectors", type=int, default=5)

    sp = sub.add_parser("path-bound", help="cycle-following probability bound")
    common(sp)
    sp.add_argument("--kmax", type=int, default=10**6)
    sp.add_argument("--cycle", type=_int_list, default=None)
    sp.add_argument("--mc-runs", type=int, default=0)
    sp.add_argument("--loops", type=int, default=50)
    p._subparsers_by_name = dict(sub.choices)
    return p


def _load_config(path: str) -> dict:
    with open(path, "rb") as fh:
        if path.endswith(".toml"):
            try:
                import tomllib as toml_loader  # 3.11+
            except ModuleNotFoundError:
                import tomli as toml_loader

            return toml_loader.load(fh)
        return json.load(fh)


def _validate(args):
    if args.n < 4:
        raise ValueError("complete-graph modes need --n >= 4")
    for name in ("steps", "runs", "window", "kmax", "vectors"):
        val = getattr(args, name, None)
        if val is not None and val <= 0:
            raise ValueError(f"--{name} must be positive")


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    # config file supplies defaults; explicit flags win by reparsing
    probe, _ = parser.parse_known_args(argv)
    if probe.config:
        try:
            defaults = _load_config(probe.config)
        except (OSError, ValueError) as exc:
            print(f"error: cannot load config: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        if "alpha" in defaults:
            defaults["alpha"] = _alpha_list(str(defaults["alpha"]))
        # subparsers keep their own defaults: push the config into each one
        parser.set_defaults(**defaults)
        for sp in parser._subparsers_by_name.values():
            sp.set_defaults(**defaults)
    args = parser.parse_args(argv)
    try:
        _validate(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    outdir = args.out or os.environ.get("VRNBW_OUT", "vrnbw_out")
    os.makedirs(outdir, exist_ok=True)
    t0 = time.time()
    failures: list[str] = []
    try:
        if args.mode == "simulate":
            files = _run_simulate(args, outdir)
        elif args.mode == "localize":
            files = _run_localize(args, outdir)
        elif args.mode == "flow":
            files = _run_flow(args, outdir)
        elif args.mode == "equilibria":
            files = _run_equilibria(args, outdir, per_eigenvalue=False)
        elif args.mode == "stability":
            files = _run_equilibria(args, outdir, per_eigenvalue=True)
        elif args.mode == "taylor-check":
            files = _run_taylor(args, outdir)
        elif args.mode == "path-bound":
            files = _run_path_bound(args, outdir)
        else:  # pragma: no cover - argparse enforces the choices
            raise ValueError(f"unknown mode {args.mode}")
    except (ValueError, walk.WalkConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - report and signal runtime failure
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    config_echo = {k: v for k, v in vars(args).items() if k not in ("config",)}
    _write_manifest(outdir, args.mode, config_echo, files, time.time() - t0, failures)
    for f in files:
        print(f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
