"""Command-line entry point: ``helicality run``."""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys

from .errors import ConfigError, HelicalityError
from .pipeline import PipelineConfig, run_pipeline
from .report import export_csv, export_intermediates, export_json
from .svg import export_svg

log = logging.getLogger("helicality")


def build_parser():
    parser = argparse.ArgumentParser(prog="helicality", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="score a corpus and write report.json / scores.csv")
    src = run.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest", help="CSV with header path,group")
    src.add_argument("--features", help="precomputed P x N features CSV (first column: bin frequency)")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--group-by", default=None, help="manifest column defining groups")
    run.add_argument("--group-name", default="all", help="record name for a --features run")
    run.add_argument("--q", type=int, default=24, help="bins per octave")
    run.add_argument("--octaves", type=int, default=3, help="octaves kept (J)")
    run.add_argument("--knn", type=int, default=3)
    run.add_argument("--fmin", type=float, default=32.703)
    run.add_argument("--sr", type=int, default=22050)
    run.add_argument("--hop", type=int, default=512)
    run.add_argument("--n-octaves-computed", type=int, default=8)
    run.add_argument("--rho-floor", type=float, default=1e-12)
    run.add_argument("--disconnect-policy", choices=["fail", "largest-component"], default="fail")
    run.add_argument("--shared-window", action="store_true", help="one octave window for the whole corpus")
    run.add_argument("--drop-zero-variance", action="store_true", help="drop constant bins (whole chroma)")
    run.add_argument("--skip-bad-files", action="store_true", help="warn and skip unreadable audio")
    run.add_argument("--keep-going", action="store_true", help="record failing groups and continue")
    run.add_argument("--jobs", type=int, default=1, help="threads for per-file analysis")
    run.add_argument("--dump-intermediates", action="store_true")
    run.add_argument("--svg", action="store_true")
    return parser


def config_from_args(args) -> PipelineConfig:
    return PipelineConfig(
        manifest=args.manifest,
        features=args.features,
        q=args.q,
        j=args.octaves,
        knn=args.knn,
        f_min=args.fmin,
        sample_rate=args.sr,
        hop=args.hop,
        n_octaves_computed=args.n_octaves_computed,
        rho_floor=args.rho_floor,
        disconnect_policy=args.disconnect_policy,
        group_by=args.group_by,
        group_name=args.group_name,
        shared_window=args.shared_window,
        drop_zero_variance=args.drop_zero_variance,
        on_file_error="skip" if args.skip_bad_files else "fail",
        keep_going=args.keep_going,
        jobs=args.jobs,
        output_dir=args.out,
        dump_intermediates=args.dump_intermediates,
        svg=args.svg,
    )


def run(config: PipelineConfig):
    report = run_pipeline(config)
    out = config.output_dir
    os.makedirs(out, exist_ok=True)
    export_json(report, os.path.join(out, "report.json"))
    export_csv(report, os.path.join(out, "scores.csv"))
    if config.dump_intermediates:
        export_intermediates(report, os.path.join(out, "intermediates"))
    if config.svg:
        export_svg(report, os.path.join(out, "svg"))
    return report


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = config_from_args(args)
        report = run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return exc.exit_code
    except HelicalityError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    failed = [g for g in report.groups if "error" in g]
    for g in report.groups:
        if "error" in g:
            print(f"{g['group']}: FAILED ({g['error_type']}: {g['error']})", file=sys.stderr)
        else:
            h = g["helicality"]
            print(f"{g['group']}: helicality {'inf' if math.isinf(h) else f'{h:.4f}'} (n_files={g['n_files']})")
    if failed and len(failed) == len(report.groups):
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
