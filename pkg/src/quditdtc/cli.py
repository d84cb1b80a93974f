"""Command-line entry point.

    qdtc run <config>          execute a config (path or preset name)
    qdtc sweep <config>        same, but requires >= 2 epsilon values
    qdtc stats <config>        force level-statistics analysis on
    qdtc identities [config]   write the closed-form identity report
    qdtc baseline <config>     force baseline comparisons on
    qdtc plot <results-dir>    render SVG plots from a results directory
    qdtc list-presets          show protocol and experiment presets
    qdtc schema                print the JSON config schema

The output root comes from --output-root or $QDTC_OUTPUT_ROOT (default
./runs); --seed overrides the config's base_seed; --threads caps
realization parallelism.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .normal_form import identity_report
from .plots import emit_plots
from .presets import PROTOCOL_PRESETS, experiment_preset_names
from .runner import config_schema, load_config, run_experiment


def _add_run_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("config", help="config file path or experiment preset name")
    p.add_argument("--output-root", default=None, help="directory for results")
    p.add_argument("--threads", type=int, default=1, help="realization workers")
    p.add_argument("--seed", type=int, default=None, help="override base_seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qdtc", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("run", "sweep", "stats", "baseline"):
        _add_run_args(sub.add_parser(name))

    p_id = sub.add_parser("identities")
    p_id.add_argument("config", nargs="?", default=None)
    p_id.add_argument("--output-root", default=None)

    p_plot = sub.add_parser("plot")
    p_plot.add_argument("results_dir")

    sub.add_parser("list-presets")
    sub.add_parser("schema")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "list-presets":
        print("protocol presets:")
        for name in sorted(PROTOCOL_PRESETS):
            print(f"  {name}")
        print("experiment presets:")
        for name in experiment_preset_names():
            print(f"  {name}")
        return 0

    if args.command == "schema":
        print(json.dumps(config_schema(), indent=2, sort_keys=True))
        return 0

    if args.command == "plot":
        for path in emit_plots(args.results_dir):
            print(path)
        return 0

    if args.command == "identities":
        report = identity_report()
        if args.config is not None:
            cfg = load_config(args.config)
            out = Path(args.output_root or "runs") / cfg.name
            out.mkdir(parents=True, exist_ok=True)
            target = out / "identity_report.json"
            target.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
            print(target)
        else:
            print(json.dumps(report, indent=2))
        worst = max(row["residual"] for row in report)
        print(f"# worst residual: {worst:.3e}", file=sys.stderr)
        return 0 if all(row["pass"] for row in report) else 1

    cfg = load_config(args.config)
    if args.command == "sweep" and len(cfg.epsilons) < 2:
        print("sweep requires at least 2 epsilon values", file=sys.stderr)
        return 2
    if args.command == "stats" and cfg.analyses.spectrum_stats is None:
        from .runner import SpectrumStatsConfig

        cfg = cfg.model_copy(deep=True)
        cfg.analyses.spectrum_stats = SpectrumStatsConfig()
    if args.command == "baseline" and cfg.analyses.baselines is None:
        print("baseline command requires an analyses.baselines section",
              file=sys.stderr)
        return 2

    out = run_experiment(cfg, output_root=args.output_root,
                         n_workers=args.threads, base_seed=args.seed)
    print(out)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
