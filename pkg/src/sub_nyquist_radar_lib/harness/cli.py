import argparse
import pathlib
import sys

import yaml

from sub_nyquist_radar_lib.harness import sweeps
from sub_nyquist_radar_lib.harness.config import RunConfig, load_config, profile_dict, PROFILES
from sub_nyquist_radar_lib.harness.emit import EmitPaths, emit
from sub_nyquist_radar_lib.utils.exceptions import RadarLibError
from sub_nyquist_radar_lib.utils.logger import LoggerFactory
from sub_nyquist_radar_lib.utils.util import DirectoryFactory

logger = LoggerFactory.get_logger(__name__)

# command -> (sweep, x column, plotted columns, group column)
TABLE_COMMANDS = {
    "sweep-snr": (sweeps.sweep_snr, "sweep_value", ["rrmse_tau", "rrmse_nu"], None),
    "sweep-resolution": (sweeps.sweep_resolution, "sweep_value", ["rrmse_tau", "rrmse_nu"], None),
    "sweep-clutter": (sweeps.sweep_clutter, "sweep_value", ["rrmse_tau", "rrmse_nu"], None),
    "theorem1": (sweeps.sweep_theorem1, "M", ["success_rate"], "K_tau"),
    "theorem2": (sweeps.sweep_theorem2, "K_tau", ["pass_rate"], "family"),
    "com-test": (sweeps.sweep_com, "M", ["empirical_tail"], "kind"),
}
METRIC_COMMANDS = ("sweep-snr", "sweep-resolution", "sweep-clutter")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=pathlib.Path, default=None, help="YAML file merged over the profile")
    common.add_argument("--seed", type=int, default=None, help="Master seed (u64)")
    common.add_argument("--out", type=pathlib.Path, default=None, help="Output directory")
    common.add_argument("--profile", choices=sorted(PROFILES), default="desk")
    common.add_argument("--method", choices=["gesedd1", "gesedd2"], default=None)
    common.add_argument("--trials", type=int, default=None, help="Trials per sweep point")
    common.add_argument("--workers", type=int, default=None, help="Worker processes for trials")

    parser = argparse.ArgumentParser(prog="gesedd", description="Sub-Nyquist delay-Doppler estimation experiments")
    commands = parser.add_subparsers(dest="command", required=True)
    for name in TABLE_COMMANDS:
        commands.add_parser(name, parents=[common])
    commands.add_parser("run-once", parents=[common])
    commands.add_parser("emit-config", parents=[common])
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config, args.profile)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.method is not None:
        overrides["pipeline.method"] = args.method
    if args.trials is not None:
        overrides["sweep.trials"] = args.trials
    if args.workers is not None:
        overrides["workers"] = args.workers
    return cfg.with_overrides(**overrides) if overrides else cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "emit-config":
            data = profile_dict(args.profile) if args.config is None else resolve_config(args).raw
            sys.stdout.write(yaml.safe_dump(data, sort_keys=False))
            return 0

        cfg = resolve_config(args)
        out = args.out or DirectoryFactory.get_directory(DirectoryFactory.DirectoryName.DATA)
        if args.command == "run-once":
            report, truth, _ = sweeps.run_once(cfg, out)
            sys.stdout.write(report.to_record())
            return 0 if report.ok else 1

        sweep, x, ys, group = TABLE_COMMANDS[args.command]
        table = sweep(cfg)
        pooling = sweeps.POOLING if args.command in METRIC_COMMANDS else None
        paths = EmitPaths.in_directory(out, args.command.replace("-", "_"), cfg.output.svg)
        emit(table, paths, cfg.hash, x=x, ys=ys, group=group, pooling=pooling)
        sys.stdout.write(table.to_string(index=False) + "\n")
        return 0
    except RadarLibError as e:
        logger.error(f"{args.command} failed: {e}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
