"""Command-line harness.

    restartopt continuous --algo restarted-gd --instance quadratic:L=10,mu=1,n=2
    restartopt augment --algo bit-scaling --instance cube-powers:n=10
    restartopt submodular --algo threshold-greedy --instance toy --k 2 --epsilon 0.25
    restartopt matrix --config configs/acceptance_matrix.json --jobs 4

Exit status: 0 when every bound holds, 1 on any violation or failed cell,
2 on usage errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bench import ALGORITHMS, ConfigError, ExperimentConfig, format_summary, format_trace, load_configs, run_matrix

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


def _add_common(p, algos=None):
    p.add_argument("--out", help="trace output path (summary goes to <out>.summary.<format>)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--quiet", action="store_true", help="suppress the summary table")
    if algos is None:
        return
    p.add_argument("--algo", choices=algos)
    p.add_argument("--instance", help="built-in name[:key=value,...] or a file path")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")


def build_parser():
    parser = argparse.ArgumentParser(prog="restartopt", description="Run restart / scaling experiments and check their bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("continuous", help="restarted first-order methods")
    _add_common(p, ALGORITHMS["continuous"])
    p.add_argument("--mu-scale", type=float, help="multiply the mu given to the solver")
    p.add_argument("--c", type=float, help="initial AGD constant")

    p = sub.add_parser("augment", help="augmentation with bit / geometric scaling")
    _add_common(p, ALGORITHMS["augment"])
    p.add_argument("--policy")

    p = sub.add_parser("submodular", help="greedy and threshold greedy")
    _add_common(p, ALGORITHMS["submodular"])
    p.add_argument("--k", type=int)

    p = sub.add_parser("matrix", help="run every experiment in a config file")
    _add_common(p)
    p.add_argument("--config", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--filter", help="only run cells whose experiment_id contains this text")
    p.add_argument("--mu-scale", type=float, help="override mu_scale in every continuous cell")
    return parser


def _single_config(args):
    cells = load_configs(args.config) if args.config else []
    if len(cells) > 1:
        raise ConfigError(f"config: {args.config} holds {len(cells)} experiments; use the matrix command")
    base = vars(cells[0]).copy() if cells else {}
    base["domain"] = args.command
    base["experiment_id"] = None
    for key in ("algo", "instance", "epsilon", "seed", "k", "policy", "mu_scale", "c"):
        val = getattr(args, key, None)
        if val is not None:
            base[key] = val
    for key in ("algo", "instance"):
        if base.get(key) is None:
            raise ConfigError(f"{key}: required (give --{key} or --config)")
    return [ExperimentConfig.from_dict(base)]


def _write_outputs(args, records, rows):
    if args.out:
        out = Path(args.out)
        out.write_text(format_trace(rows, args.format))
        summary = out.with_name(out.name + f".summary.{args.format}")
        summary.write_text(format_summary(records, args.format, with_time=False))
    if not args.quiet:
        for r in records:
            status = "ok" if r.bound_satisfied else "VIOLATED"
            extra = f" error={r.error}" if r.error else ""
            print(
                f"{status:8s} {r.experiment_id}  measured={r.measured} bound={r.bound} "
                f"final={r.final_value} gap/ratio={r.gap_or_ratio}{extra}"
            )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "matrix":
            configs = load_configs(args.config)
            if args.filter:
                configs = [c for c in configs if args.filter in c.experiment_id]
            if args.mu_scale is not None:
                for c in configs:
                    if c.domain == "continuous":
                        c.mu_scale = args.mu_scale
            if not configs:
                raise ConfigError("no experiments left after filtering")
            records, rows = run_matrix(configs, jobs=max(1, args.jobs))
        else:
            records, rows = run_matrix(_single_config(args))
            if records[0].error and records[0].error.startswith("ConfigError"):
                raise ConfigError(records[0].error.split(": ", 1)[1])
    except ConfigError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _write_outputs(args, records, rows)
    return EXIT_OK if all(r.bound_satisfied for r in records) else EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
