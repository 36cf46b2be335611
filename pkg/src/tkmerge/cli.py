"""Command-line front end: ``tkmerge fit | monitor | simulate | bench | eval``.

Exit codes: 0 ok, 2 input error, 3 algorithmic failure, 4 config error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from . import io as tio
from .constants import DEFAULT_MAX_ITER, DEFAULT_N_MC, DEFAULT_N_STARTS, DEFAULT_R_TCLUST, DEFAULT_R_TCMERGE, DEFAULT_TOL
from .datagen import SCENARIOS
from .errors import FitError, InputError, TkMergeError
from .experiments import DEFAULT_METHODS, METHODS, bench, simulate
from .metrics import ari
from .model import FitConfig, as_data, validate_data
from .monitor import DEFAULT_GRID, TARGETS, monitor_alpha
from .pipeline import K_HEURISTICS, fit_tc_merge, fit_tk_merge, resolve_k

EXIT_OK, EXIT_INPUT, EXIT_FIT, EXIT_CONFIG = 0, 2, 3, 4

_METRIC_FLAGS = {"euclid": "euclidean_centroid", "demp": "demp_mc"}


class ConfigError(TkMergeError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: config error: {message}\n")


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _str_list(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _common(p, out_default):
    p.add_argument("--out", default=out_default, help="output directory (created if missing)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--svg", action="store_true", help="also render SVG figures next to the CSV files")
    p.add_argument("--config", help="JSON file with option values; flags given on the command line win")


def _fit_options(p):
    p.add_argument("--method", choices=("tkm", "tc"), default="tkm",
                   help="first step: trimmed k-means (tk-merge) or TCLUST (TC-merge)")
    p.add_argument("--K", type=int, help="number of final groups")
    p.add_argument("--k", type=int, help="number of first-step components")
    p.add_argument("--k-heuristic", choices=K_HEURISTICS, help="derive k from n instead of --k")
    p.add_argument("--alpha", type=float, default=0.0, help="trimming proportion in [0, 0.5]")
    p.add_argument("--r", type=float, help=f"eigenvalue-ratio restriction (default {DEFAULT_R_TCMERGE:g} for tc)")
    p.add_argument("--n-starts", type=int, default=DEFAULT_N_STARTS)
    p.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    p.add_argument("--tol", type=float, default=DEFAULT_TOL)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tkmerge", description="Robust clustering with trimming and component merging.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("fit", help="cluster a CSV data file")
    p.add_argument("input")
    _common(p, "tkmerge-fit")
    _fit_options(p)
    p.add_argument("--linkage", choices=("single", "complete", "average"), default="single")
    p.add_argument("--metric", choices=tuple(_METRIC_FLAGS), default="euclid")
    p.add_argument("--n-mc", type=int, default=DEFAULT_N_MC, help="Monte Carlo draws for --metric demp")

    p = sub.add_parser("monitor", help="sweep the trimming level and pick the most stable one")
    p.add_argument("input")
    _common(p, "tkmerge-monitor")
    _fit_options(p)
    p.add_argument("--grid", type=_float_list, help="descending levels, e.g. 0.4,0.3,0.2 (default 0.40..0.00 by 0.05)")
    p.add_argument("--target", choices=TARGETS, default="consecutive")
    p.add_argument("--truth", help="label CSV, required with --target truth")

    p = sub.add_parser("simulate", help="replicate a synthetic scenario and score the methods")
    _common(p, "tkmerge-simulate")
    p.add_argument("--scenario", choices=SCENARIOS, default="s1")
    p.add_argument("--scale", type=float, default=1.0)
    p.add_argument("--level", type=int, default=0, help="grid point of the scenario (size for s1, separation for s2)")
    p.add_argument("--n", type=int, help="override the clean sample size (s1/s2) or per-cluster size (s3*)")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--methods", type=_str_list, default=list(DEFAULT_METHODS))
    p.add_argument("--r", type=float, default=DEFAULT_R_TCLUST, help="restriction for the TCLUST comparison")
    p.add_argument("--n-starts", type=int, default=DEFAULT_N_STARTS)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--no-data", action="store_true", help="do not write the generated datasets")

    p = sub.add_parser("bench", help="computing time per method as the sample size grows")
    _common(p, "tkmerge-bench")
    p.add_argument("--scenario", choices=("s1", "s2"), default="s1")
    p.add_argument("--sizes", type=_int_list, default=[1000, 2000])
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--methods", type=_str_list, default=list(DEFAULT_METHODS))
    p.add_argument("--r", type=float, default=DEFAULT_R_TCLUST)
    p.add_argument("--n-starts", type=int, default=DEFAULT_N_STARTS)
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("eval", help="adjusted Rand index between two label files")
    p.add_argument("labels_a")
    p.add_argument("labels_b")
    return parser


def _apply_config(parser, argv):
    """Parse once to find the subcommand and --config, then re-parse with file values as defaults."""
    args = parser.parse_args(argv)
    path = getattr(args, "config", None)
    if not path:
        return args
    try:
        with open(path, encoding="utf-8") as fh:
            values = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    if not isinstance(values, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest for a in sub._actions}
    values = {key.replace("-", "_"): v for key, v in values.items()}
    unknown = sorted(set(values) - known - {"command"})
    if unknown:
        raise ConfigError(f"unknown option(s) in {path}: {', '.join(unknown)}")
    values.pop("command", None)
    sub.set_defaults(**values)
    return parser.parse_args(argv)


def _echo(args, **extra):
    d = {key: v for key, v in vars(args).items()}
    d.update(extra)
    d["version"] = __version__
    return d


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _resolve_k(args, n):
    if args.K is None:
        raise ConfigError("--K is required")
    if args.k is not None and args.k_heuristic is not None:
        raise ConfigError("give either --k or --k-heuristic, not both")
    if args.k is not None:
        return args.k
    if args.k_heuristic is None:
        raise ConfigError("give --k or --k-heuristic (2logn, logn or 2Klogn)")
    return resolve_k(n, args.K, args.k_heuristic)


def _read_data(path):
    values, header = tio.read_matrix(path)
    dm = as_data(values)
    for w in validate_data(dm):
        print(f"warning: {w}", file=sys.stderr)
    return dm, header


def cmd_fit(args) -> int:
    dm, header = _read_data(args.input)
    k = _resolve_k(args, dm.n)
    metric = _METRIC_FLAGS[args.metric]
    routed = args.method == "tc" and args.r is not None and args.r == 1
    r = 1.0 if args.method == "tkm" else (DEFAULT_R_TCMERGE if args.r is None else args.r)
    try:
        FitConfig(K=args.K, k=k, alpha=args.alpha, r=r, metric=metric, linkage=args.linkage,
                  n_starts=args.n_starts, max_iter=args.max_iter, tol=args.tol, seed=args.seed)
    except InputError as exc:
        raise ConfigError(str(exc)) from None
    if args.method == "tkm":
        res = fit_tk_merge(dm, args.K, k, args.alpha, args.n_starts, args.max_iter, args.tol, args.seed,
                           args.linkage, metric, args.n_mc)
    else:
        res = fit_tc_merge(dm, args.K, k, args.alpha, r, args.n_starts, args.max_iter, args.tol, args.seed,
                           args.linkage, metric, args.n_mc)
    out = _outdir(args)
    first = res.first_step
    labels = res.final_partition.labels
    comp = first.partition.labels
    tio.write_labels(out / "labels.csv", labels)
    model = first.model
    cols = header if header is not None else [f"x{j + 1}" for j in range(dm.p)]
    centroid_rows = []
    for j in range(model.k):
        row = {"component": j + 1, "group": int(res.merge.component_to_group[j]), "size": int(model.sizes[j]),
               "weight": float(model.weights[j])}
        row.update({c: float(v) for c, v in zip(cols, model.centroids[j])})
        centroid_rows.append(row)
    tio.write_table(out / "centroids.csv", centroid_rows, ["component", "group", "size", "weight", *cols])
    scatter_rows = np.column_stack([dm.values, labels, comp])
    tio.write_matrix(out / "scatter.csv", scatter_rows, [*cols, "label", "component"], exact=True)
    (out / "dendrogram.txt").write_text(res.merge.dendrogram.to_text(), encoding="utf-8")
    objective = first.objective if hasattr(first, "objective") else first.log_objective
    tio.write_json(out / "model.json", {
        "method": res.method,
        "first_step": model.to_dict(),
        "objective": objective,
        "iterations": first.iterations,
        "converged": first.converged,
        "component_to_group": res.merge.component_to_group,
        "dendrogram": [[m.left, m.right, m.height] for m in res.merge.dendrogram.merges],
        "config": res.config_echo.to_dict(),
    })
    echo = _echo(args, k_resolved=k, r_resolved=r, metric_resolved=metric, n=dm.n, p=dm.p)
    tio.write_json(out / "config_echo.json", echo)
    sizes = np.bincount(labels, minlength=args.K + 1)
    lines = [
        f"method: {res.method}",
        f"first step: {'trimmed k-means' if res.routed_to_tkmeans else 'TCLUST'} with k={k} components",
    ]
    if routed:
        lines.append("note: --method tc with --r 1 was routed to the trimmed k-means branch")
    lines += [
        f"n={dm.n} p={dm.p} K={args.K} alpha={args.alpha:g} r={r:g} linkage={args.linkage} metric={metric}",
        f"trimmed: {int(sizes[0])}",
        "group sizes: " + ", ".join(f"{g}:{int(s)}" for g, s in enumerate(sizes[1:], start=1)),
        f"first-step objective: {objective:.12g} ({first.iterations} iterations, converged={first.converged})",
        f"wall time: {res.wall_time_s:.3f} s",
    ]
    (out / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    if args.svg:
        from . import plotting
        plotting.scatter(out / "scatter.svg", dm.values, labels, f"{res.method}, K={args.K}, k={k}")
        plotting.dendrogram(out / "dendrogram.svg", res.merge.dendrogram, res.merge.component_to_group)
    print(f"wrote {out}/labels.csv ({dm.n} rows, {int(sizes[0])} trimmed)")
    return EXIT_OK


def cmd_monitor(args) -> int:
    dm, _ = _read_data(args.input)
    if args.k is not None and args.k_heuristic is None:
        k = args.k
    elif args.k_heuristic is None and args.K is not None:
        k = args.K
    else:
        k = _resolve_k(args, dm.n)
    truth = tio.read_labels(args.truth) if args.truth else None
    if args.target == "truth" and truth is None:
        raise ConfigError("--target truth needs --truth")
    grid = args.grid if args.grid is not None else list(DEFAULT_GRID)
    trace = monitor_alpha(dm, k, args.method, args.r, grid, args.seed, args.target, truth,
                          args.n_starts, args.max_iter, args.tol)
    out = _outdir(args)
    rows = trace.to_rows()
    for row, lv in zip(rows, trace.level_scores):
        row["level_score"] = lv
    tio.write_table(out / "trace.csv", rows,
                    ["alpha", "score_consecutive", "score_unrestricted", "n_trimmed", "level_score"])
    (out / "best_alpha.txt").write_text(f"{trace.best_alpha:.2f}\n", encoding="utf-8")
    for a, part in zip(trace.alphas, trace.partitions):
        if part is not None:
            tio.write_labels(out / f"labels_alpha_{a:.2f}.csv", part.labels)
    if trace.failures:
        tio.write_table(out / "failures.csv", [{"alpha": a, "error": msg} for a, msg in trace.failures])
    tio.write_json(out / "config_echo.json", _echo(args, k_resolved=k, r_used=trace.r_used, grid_resolved=grid))
    if args.svg:
        from . import plotting
        plotting.monitor_trace(out / "trace.svg", trace)
    print(f"best alpha: {trace.best_alpha:.2f}")
    return EXIT_OK


def _check_methods(methods):
    bad = [m for m in methods if m not in METHODS]
    if bad:
        raise ConfigError(f"unknown method(s) {bad}; choose from {METHODS}")


_RESULT_COLS = ["scenario", "level", "n", "rep", "seed", "method", "ari", "seconds", "error"]
_SUMMARY_COLS = ["method", "reps", "failures", "ari_median", "ari_sn", "seconds_median", "seconds_sn",
                 "gain_vs_tclust"]


def cmd_simulate(args) -> int:
    _check_methods(args.methods)
    if args.reps < 1:
        raise ConfigError("--reps must be at least 1")
    rows, summary = simulate(args.scenario, args.reps, args.seed, args.scale, args.level, args.n,
                             tuple(args.methods), args.r, args.n_starts, args.jobs)
    out = _outdir(args)
    tio.write_table(out / "results.csv", rows, _RESULT_COLS)
    tio.write_table(out / "summary.csv", summary, _SUMMARY_COLS)
    if not args.no_data:
        from .datagen import scenario
        data_dir = out / "datasets"
        data_dir.mkdir(exist_ok=True)
        for seed in dict.fromkeys(row["seed"] for row in rows):
            rep = next(row["rep"] for row in rows if row["seed"] == seed)
            ds = scenario(args.scenario, args.scale, seed, args.level, args.n)
            tio.write_matrix(data_dir / f"data_rep{rep}.csv", ds.data.values,
                             [f"x{j + 1}" for j in range(ds.data.p)], exact=True)
            tio.write_labels(data_dir / f"truth_rep{rep}.csv", ds.truth.labels)
    tio.write_json(out / "config_echo.json", _echo(args))
    if args.svg:
        from . import plotting
        plotting.method_summary(out / "ari.svg", summary, "ari", f"{args.scenario}: median ARI +/- Sn")
    for e in summary:
        print(f"{e['method']:>9}  ARI {e['ari_median']:.3f} +/- {e['ari_sn']:.3f}  "
              f"time {e['seconds_median']:.3f}s  gain vs TCLUST {e['gain_vs_tclust']:.1f}%")
    return EXIT_OK


def cmd_bench(args) -> int:
    _check_methods(args.methods)
    if args.sizes != sorted(args.sizes):
        raise ConfigError("--sizes must be ascending")
    rows, table = bench(args.scenario, args.sizes, args.reps, args.seed, tuple(args.methods), args.r,
                        args.n_starts, args.jobs)
    out = _outdir(args)
    tio.write_table(out / "bench_runs.csv", rows, _RESULT_COLS)
    tio.write_table(out / "bench.csv", table,
                    ["n", "method", "reps", "seconds_median", "seconds_sn", "gain_vs_tclust", "ari_median"])
    tio.write_json(out / "config_echo.json", _echo(args))
    if args.svg:
        from . import plotting
        plotting.bench_curves(out / "bench.svg", table)
    for e in table:
        print(f"n={e['n']:>6} {e['method']:>9}  {e['seconds_median']:.3f}s  gain vs TCLUST {e['gain_vs_tclust']:.1f}%")
    return EXIT_OK


def cmd_eval(args) -> int:
    a = tio.read_labels(args.labels_a)
    b = tio.read_labels(args.labels_b)
    print(tio.fmt_12(ari(a, b)))
    return EXIT_OK


COMMANDS = {"fit": cmd_fit, "monitor": cmd_monitor, "simulate": cmd_simulate, "bench": cmd_bench, "eval": cmd_eval}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FitError as exc:
        print(f"fit failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FIT
    except InputError as exc:
        print(f"input error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
