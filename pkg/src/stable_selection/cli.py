"""Command-line front end: size simulation, leave-one-out stability runs, the
L=3 region map, and the randomized invariant suite.

Every subcommand takes an explicit ``--seed`` (no wall-clock seeding) and is
a pure function of its flags: rerunning with the same arguments reproduces
the output files byte for byte.  ``loo-stability`` additionally accepts a
JSON config file via ``--config``; explicit flags override file values.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .experiments import (
    LooConfig,
    region_map_rows,
    run_loo_experiment,
    simulate_set_sizes,
    write_loo_reports,
    write_region_map_csv,
    write_size_table_csv,
    write_size_table_json,
)
from .verify import run_all


def _cmd_simulate_sizes(args: argparse.Namespace) -> int:
    rows = simulate_set_sizes(args.L, eps=args.eps, draws=args.draws, seed=args.seed)
    if args.format == "json":
        write_size_table_json(rows, args.out)
    else:
        write_size_table_csv(rows, args.out)
    for r in rows:
        print(
            f"L={r.L:>4d}  inflated {r.mean_inflated:.4f} (se {r.se_inflated:.4f})  "
            f"margin {r.mean_margin:.4f} (se {r.se_margin:.4f})  ratio {r.ratio:.4f}"
        )
    print(f"wrote {args.out}")
    return 0


_LOO_FIELDS = {f.name: f for f in dataclasses.fields(LooConfig)}


def _merge_loo_config(args: argparse.Namespace) -> LooConfig:
    values: dict = {}
    if args.config is not None:
        loaded = json.loads(Path(args.config).read_text())
        if not isinstance(loaded, dict):
            raise SystemExit(f"config file {args.config} must hold a JSON object")
        for key in loaded:
            if key not in _LOO_FIELDS:
                raise SystemExit(f"config file {args.config}: unknown field {key!r}")
        values.update(loaded)
    for name in _LOO_FIELDS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    if "seed" not in values:
        raise SystemExit("loo-stability needs --seed (or a seed in the config file)")
    return LooConfig(**values)


def _cmd_loo_stability(args: argparse.Namespace) -> int:
    config = _merge_loo_config(args)
    reports = run_loo_experiment(config)
    written = write_loo_reports(reports, args.out)
    for method in sorted(reports):
        print(reports[method].summary())
        print()
    print("wrote " + ", ".join(str(p) for p in written))
    return 0


def _cmd_region_map(args: argparse.Namespace) -> int:
    rows = region_map_rows(args.eps, args.grid_resolution)
    write_region_map_csv(rows, args.out)
    print(f"wrote {args.out} ({len(rows)} grid points)")
    return 0


def _cmd_verify(args: argparse.Namespace) -> int:
    results = run_all(args.seed, args.trials)
    failed = [r for r in results if not r.ok]
    for r in results:
        status = "PASS" if r.ok else "FAIL"
        print(f"{status}  {r.name}: {r.cases} cases, {r.failures} failures")
    if failed:
        example = failed[0].counterexample
        blob = json.dumps(example, indent=2, sort_keys=True)
        print("first counterexample (replayable):")
        print(blob)
        if args.out is not None:
            Path(args.out).write_text(blob + "\n")
            print(f"wrote {args.out}")
        return 1
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stable-selection",
        description="Stable set-valued selection: experiments and verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-sizes", help="mean set sizes: inflated argmax vs fixed margin")
    p.add_argument("--L", type=int, nargs="+", required=True, help="class counts to simulate")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--draws", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=_cmd_simulate_sizes)

    p = sub.add_parser("loo-stability", help="leave-one-out stability comparison of three pipelines")
    p.add_argument("--config", default=None, help="JSON file with LooConfig fields")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--L", type=int, default=None)
    p.add_argument("--overlap", type=float, default=None)
    p.add_argument("--scheme-kind", dest="scheme_kind", choices=("bootstrap", "subbag"), default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--B", type=int, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--tie-tol", dest="tie_tol", type=float, default=None)
    p.add_argument("--K", type=int, default=None)
    p.add_argument("--n-test", dest="n_test", type=int, default=None)
    p.add_argument("--learner", choices=("centroid", "logistic"), default=None)
    p.add_argument("--temperature", type=float, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--lr", type=float, default=None)
    p.add_argument("--csv-path", dest="csv_path", default=None)
    p.add_argument("--label-column", dest="label_column", default=None)
    p.add_argument("--out", required=True, help="output directory for reports")
    p.set_defaults(func=_cmd_loo_stability)

    p = sub.add_parser("region-map", help="inflated-argmax regions on the L=3 simplex")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--grid-resolution", dest="grid_resolution", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_region_map)

    p = sub.add_parser("verify", help="run the randomized invariant suites")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--out", default=None, help="where to write the first counterexample")
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv: "list[str] | None" = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
