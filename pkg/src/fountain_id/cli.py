"""Command-line entry point.

Subcommands:

* ``run``          — run one experiment plan (or the built-in suite) end to end
* ``sweep``        — brute-force grid estimate from one synthetic dataset
* ``consistency``  — sweep-estimator error scaling in the data size N
* ``mstudy``       — descent fluctuation scaling in the ensemble size M
* ``oracle-build`` — build and cache a ground-truth probability table

All outputs (CSV + JSON) are deterministic functions of the configuration
and ``--seed``; rerunning a command reproduces byte-identical files.  The
environment variable FOUNTAIN_ID_THREADS caps compiled-kernel parallelism
(results are identical regardless, since path streams are seeded per path).

Exit codes: 0 success, 2 configuration error, 3 path budget exceeded,
4 acceptance-check failure under ``--check``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import harness
from .errors import ConfigError, FountainIdError, PathBudgetExceeded
from .fountain import counts_to_probabilities, generate_counts_multinomial
from .geometry import DetectorLayout
from .optimizer import DescentConfig
from .oracle import bm_oracle_table
from .process import process_from_dict
from .source import Profile, SourceSpec
from . import streams

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_CHECK = 4

# Final loss must fall below this fraction of the initial loss in --check mode.
CHECK_LOSS_RATIO = 0.10

BUILTIN_EXPERIMENTS = {
    "1": lambda: harness.experiment_one(),
    "2": lambda: harness.experiment_two(),
    "3": lambda: harness.experiment_three(),
    "4a": lambda: harness.experiment_four(2.0),
    "4b": lambda: harness.experiment_four(10.0),
}


def _apply_thread_cap() -> None:
    cap = os.environ.get("FOUNTAIN_ID_THREADS")
    if cap:
        import numba

        numba.set_num_threads(min(max(1, int(cap)), numba.config.NUMBA_NUM_THREADS))


def _source_from_config(d: dict) -> SourceSpec:
    return SourceSpec(
        theta=np.asarray(d["theta"], float),
        beta=float(d["beta"]),
        profile=Profile(d.get("profile", "bump")),
    )


def _layout_from_config(d: dict) -> DetectorLayout:
    if "center_angles" in d:
        return DetectorLayout.from_dict(d)
    return DetectorLayout.equispaced(int(d["J"]))


def _descent_from_config(d: dict) -> DescentConfig:
    return DescentConfig(
        theta_init=np.asarray(d["theta_init"], float),
        beta=float(d["beta"]),
        steps=int(d.get("steps", 1000)),
        step_sizes=float(d.get("step_size", 0.01)),
        ensemble_sizes=int(d.get("ensemble_size", 10_000)),
        profile=Profile(d.get("profile", "bump")),
        boundary_nodes=int(d.get("boundary_nodes", 64)),
    )


def _data_from_config(d: dict) -> harness.DataSpec:
    mode = harness.DataMode(d.get("mode", "oracle_exact"))
    return harness.DataSpec(
        mode=mode,
        n=int(d.get("n", 0)),
        lambda_=float(d.get("lambda", 0.0)),
        window=float(d.get("window", 0.0)),
    )


def _plans_from_config(config: dict, seed: int | None) -> list[harness.ExperimentPlan]:
    from dataclasses import replace

    if "experiment" in config:
        key = str(config["experiment"])
        if key == "all":
            plans = [make() for make in BUILTIN_EXPERIMENTS.values()]
        elif key in BUILTIN_EXPERIMENTS:
            plans = [BUILTIN_EXPERIMENTS[key]()]
        else:
            raise ConfigError(
                f"unknown experiment {key!r}; choose from {sorted(BUILTIN_EXPERIMENTS)} or 'all'"
            )
    else:
        source = _source_from_config(config["source"])
        descent_cfg = dict(config["descent"])
        descent_cfg.setdefault("beta", source.beta)
        plans = [
            harness.ExperimentPlan(
                name=config.get("name", "plan"),
                process=process_from_dict(config["process"]),
                true_source=source,
                layout=_layout_from_config(config["layout"]),
                data=_data_from_config(config.get("data", {})),
                descent=_descent_from_config(descent_cfg),
                replicates=int(config.get("replicates", 1)),
                master_seed=int(config.get("master_seed", 0)),
            )
        ]
    if seed is not None:
        plans = [replace(p, master_seed=seed) for p in plans]
    return plans


def _load_config(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc


def _cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args.config) if args.config else {"experiment": "all"}
    plans = _plans_from_config(config, args.seed)
    failures = []
    for plan in plans:
        result = harness.run_experiment(
            plan, out_dir=args.out, cache_dir=args.cache_dir,
            reference_budget=args.reference_budget,
        )
        for row in result.summary_rows():
            ratio = row["final_loss"] / row["initial_loss"] if row["initial_loss"] > 0 else 0.0
            print(
                f"{row['name']} rep {row['replicate']}: "
                f"theta_hat=({row['theta_x']:.4f}, {row['theta_y']:.4f}) "
                f"error={row['error']:.4f} loss_ratio={ratio:.4f}"
            )
            if args.check and ratio > CHECK_LOSS_RATIO:
                failures.append(f"{row['name']} rep {row['replicate']}: loss ratio {ratio:.3f}")
        print(f"{plan.name}: wall time {result.wall_time:.1f}s")
        if args.emit_plot_data and args.out:
            _emit_trace_long_format(result, args.out)
    if failures:
        print("check failed:\n  " + "\n  ".join(failures), file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def _emit_trace_long_format(result: harness.ExperimentResult, out_dir: str) -> None:
    """Long-format iterate table: one row per (replicate, step)."""
    path = Path(out_dir) / f"{result.plan.name}_long.csv"
    with open(path, "w") as fh:
        fh.write("name,replicate,k,theta_x,theta_y,loss\n")
        for i, tr in enumerate(result.traces):
            for k in range(tr.n_steps):
                fh.write(
                    f"{result.plan.name},{i},{k},{float(tr.thetas[k, 0])!r},"
                    f"{float(tr.thetas[k, 1])!r},{float(tr.losses[k])!r}\n"
                )


def _cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    source = _source_from_config(config["source"])
    layout = _layout_from_config(config["layout"])
    grid_cfg = config.get("grid", {})
    grid = harness.candidate_grid(
        center=source.theta,
        half_width=float(grid_cfg.get("half_width", 0.3)),
        per_side=int(grid_cfg.get("per_side", 100)),
    )
    grid_p = harness.grid_probability_table(grid, source.beta, source.profile, layout)
    seed = args.seed if args.seed is not None else int(config.get("master_seed", 0))
    if "p_hat" in config:
        p_hat = np.asarray(config["p_hat"], float)
    else:
        n = int(config.get("n", 10_000))
        p_true = bm_oracle_table(source, layout).p
        rng = streams.make_rng(seed, streams.DATA)
        counts = generate_counts_multinomial(
            np.concatenate(([1.0 - p_true.sum()], p_true)), n, rng
        )
        p_hat = counts_to_probabilities(counts)
    theta_hat = harness.sweep_estimator(grid, grid_p, p_hat)
    error = float(np.linalg.norm(theta_hat - source.theta))
    print(f"theta_hat=({theta_hat[0]:.6f}, {theta_hat[1]:.6f}) error={error:.6f}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "sweep.json").write_text(
            json.dumps(
                {
                    "theta_hat": theta_hat.tolist(),
                    "error": error,
                    "p_hat": p_hat.tolist(),
                    "master_seed": seed,
                },
                indent=1,
            )
        )
    return EXIT_OK


def _cmd_consistency(args: argparse.Namespace) -> int:
    source = SourceSpec(harness.TRUE_THETA, harness.TRUE_BETA, Profile.BUMP)
    layout = harness.experiment_layout()
    seed = args.seed if args.seed is not None else 0
    result, samples = harness.consistency_sweep(
        source,
        layout,
        n_grid=tuple(args.n_grid),
        replicates=args.replicates,
        master_seed=seed,
    )
    for n, err, se, reps in result.grid:
        print(f"N={n}: mean |error| = {err:.5f} (se {se:.5f}, {reps} replicates)")
    print(f"fitted slope: {result.fitted_slope:.4f} +/- {result.slope_se:.4f}")
    if args.out:
        harness.write_scaling_outputs(
            result, samples, args.out, "consistency", "N", seed,
            emit_samples=args.emit_plot_data,
        )
    return EXIT_OK


def _cmd_mstudy(args: argparse.Namespace) -> int:
    from .sim_diffusion import DiffusionSpec

    source = SourceSpec(harness.TRUE_THETA, harness.TRUE_BETA, Profile.BUMP)
    layout = harness.experiment_layout()
    process = DiffusionSpec(drift=np.zeros(2), eta=0.5, dt=harness.DEFAULT_DT)
    seed = args.seed if args.seed is not None else 0
    result, clouds = harness.m_fluctuation_study(
        process,
        source,
        layout,
        m_grid=tuple(args.m_grid),
        burn_in=args.burn_in,
        trailing=args.trailing,
        replicates=args.replicates,
        data_n=args.data_n if args.data_n > 0 else None,
        master_seed=seed,
        cache_dir=args.cache_dir,
    )
    for m, err, se, reps in result.grid:
        print(f"M={m}: trailing mean |error| = {err:.5f} (se {se:.5f}, {reps} iterates)")
    print(f"fitted slope: {result.fitted_slope:.4f} +/- {result.slope_se:.4f}")
    if args.out:
        harness.write_scaling_outputs(
            result, clouds, args.out, "mstudy", "M", seed,
            emit_samples=args.emit_plot_data,
        )
    return EXIT_OK


def _cmd_oracle_build(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    source = _source_from_config(config["source"])
    layout = _layout_from_config(config["layout"])
    process = process_from_dict(config["process"])
    out = Path(args.out or ".")
    table = harness.true_probabilities(
        process, source, layout,
        cache_dir=out,
        reference_budget=args.m_ref,
        master_seed=args.seed if args.seed is not None else 20260823,
    )
    path = out / f"oracle_{table.spec_hash}.json"
    if not path.exists():  # closed-form tables are not cached automatically
        out.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(table.to_dict(), indent=1))
    print(f"method={table.method} p={np.round(table.p, 6).tolist()}")
    print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fountain-id",
        description="Source identification from binned boundary-exit counts.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment plan end to end")
    run.add_argument("--config", help="JSON plan file (default: built-in suite)")
    run.add_argument("--out", help="output directory for traces and summaries")
    run.add_argument("--seed", type=int, help="master seed override")
    run.add_argument("--cache-dir", help="directory for cached reference tables")
    run.add_argument("--reference-budget", type=int,
                     default=harness.DEFAULT_REFERENCE_BUDGET,
                     help="path budget for Monte Carlo reference tables")
    run.add_argument("--check", action="store_true",
                     help="fail (exit 4) unless final loss <= 10%% of initial")
    run.add_argument("--emit-plot-data", action="store_true",
                     help="also write long-format iterate tables")
    run.set_defaults(func=_cmd_run)

    sweep = sub.add_parser("sweep", help="brute-force grid estimate")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out")
    sweep.add_argument("--seed", type=int)
    sweep.set_defaults(func=_cmd_sweep)

    cons = sub.add_parser("consistency", help="error scaling vs data size N")
    cons.add_argument("--out")
    cons.add_argument("--seed", type=int)
    cons.add_argument("--replicates", type=int, default=100)
    cons.add_argument("--n-grid", type=int, nargs="+",
                      default=[1000, 2000, 5000, 10000])
    cons.add_argument("--emit-plot-data", action="store_true",
                      help="also write raw error samples")
    cons.set_defaults(func=_cmd_consistency)

    mst = sub.add_parser("mstudy", help="fluctuation scaling vs ensemble size M")
    mst.add_argument("--out")
    mst.add_argument("--seed", type=int)
    mst.add_argument("--m-grid", type=int, nargs="+",
                     default=[1000, 3000, 8000, 15000])
    mst.add_argument("--burn-in", type=int, default=2000)
    mst.add_argument("--trailing", type=int, default=2000)
    mst.add_argument("--replicates", type=int, default=3)
    mst.add_argument("--data-n", type=int, default=15_000,
                     help="observed dataset size per replicate (0: exact data)")
    mst.add_argument("--cache-dir")
    mst.add_argument("--emit-plot-data", action="store_true",
                     help="also write trailing iterate clouds")
    mst.set_defaults(func=_cmd_mstudy)

    ob = sub.add_parser("oracle-build", help="build a ground-truth table")
    ob.add_argument("--config", required=True)
    ob.add_argument("--out", help="cache directory (default: current directory)")
    ob.add_argument("--seed", type=int)
    ob.add_argument("--m-ref", type=int, default=harness.DEFAULT_REFERENCE_BUDGET)
    ob.set_defaults(func=_cmd_oracle_build)
    return parser


def main(argv: list[str] | None = None) -> int:
    _apply_thread_cap()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PathBudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (ConfigError, FountainIdError, KeyError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
