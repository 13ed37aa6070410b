"""Command-line entry point.

Subcommands:
  gen-data   write a synthetic cohort (records + manifest)
  evaluate   leave-one-subject-out CV for one variant over a cohort
  compare    pairwise signed-rank comparison of CV reports
  bench      time the transform stage per variant, Table-style mean (SD)

All commands are deterministic given their configuration (timing values
excepted). Exit codes: 0 success, 2 configuration error, 3 data error,
4 I/O error.
"""

import argparse
import json
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from .config import RunConfig
from .errors import (
    DataError,
    InvalidArgumentError,
    InvalidConfigurationError,
    InvalidTrainingSetError,
    UndefinedTestError,
)
from .evaluate import CvReport, compare_variants, leave_one_out
from .kernels import generate_kernels
from .pipeline import EPOCH_SAMPLES, read_cohort, write_record
from .synth import SynthConfig, generate_cohort
from .transform import transform_dataset
from .variants import Variant

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_IO = 4

_EPILOG = """\
exit codes:
  0  success
  2  invalid configuration or arguments
  3  malformed or unusable data
  4  I/O failure
"""


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="msrocket",
        description="Multi-scale random convolution kernel toolkit for "
                    "time-series classification",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser(
        "gen-data", help="generate a synthetic burst-suppression cohort",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    gen.add_argument("--config", help="synth config JSON file")
    gen.add_argument("--subjects", type=int, help="override subject count")
    gen.add_argument("--duration", type=float,
                     help="override record duration in seconds")
    gen.add_argument("--seed", type=int, help="override generator seed")
    gen.add_argument("--out", required=True, help="cohort output directory")

    ev = sub.add_parser(
        "evaluate", help="leave-one-subject-out evaluation of one variant",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    ev.add_argument("--cohort", required=True,
                    help="directory of record CSV/JSON pairs")
    ev.add_argument("--config", help="run config JSON file")
    ev.add_argument("--variant",
                    choices=[v.value for v in Variant])
    ev.add_argument("--kernels", type=int, help="number of random kernels")
    ev.add_argument("--seed", type=int, help="kernel generator seed")
    ev.add_argument("--alpha", type=float, help="ridge regularization")
    ev.add_argument("--workers", type=int,
                    help="transform thread count (default: all cores)")
    ev.add_argument("--save-artifacts", action="store_true",
                    help="also write the kernel set plus per-fold model "
                         "and feature-matrix files under <out>/artifacts")
    ev.add_argument("--out", required=True, help="report output directory")

    cmp_ = sub.add_parser(
        "compare", help="pairwise Wilcoxon comparison of CV reports",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    cmp_.add_argument("reports", nargs="+", help="CV report JSON files")
    cmp_.add_argument("--out", help="directory for comparison JSON/CSV")

    bench = sub.add_parser(
        "bench", help="time the transform stage for every variant",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    bench.add_argument("--epochs", type=int, default=1000,
                       help="number of random epochs (default 1000)")
    bench.add_argument("--kernels", type=int, default=10000,
                       help="number of kernels (default 10000)")
    bench.add_argument("--repeats", type=int, default=5,
                       help="timing repeats per variant (default 5)")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--workers", type=int,
                       help="transform thread count (default: all cores)")
    bench.add_argument("--out", help="directory for the timing CSV")
    return parser


def _cmd_gen_data(args):
    if args.config:
        config = SynthConfig.from_json_file(args.config)
    else:
        config = SynthConfig()
    overrides = {}
    if args.subjects is not None:
        overrides["n_subjects"] = args.subjects
    if args.duration is not None:
        overrides["duration_s"] = args.duration
    if args.seed is not None:
        overrides["seed"] = args.seed
    if overrides:
        doc = config.to_dict()
        doc.update(overrides)
        config = SynthConfig.from_dict(doc)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    cohort = generate_cohort(config)
    files = []
    for record in cohort:
        path = write_record(record, out_dir)
        files.append(path.name)
        print(f"wrote {path}")
    manifest = {
        "format": "msrocket-cohort",
        "version": 1,
        "config": config.to_dict(),
        "subjects": [r.subject_id for r in cohort],
        "files": files,
    }
    manifest_path = out_dir / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"wrote {manifest_path} ({len(cohort)} subjects)")
    return EXIT_OK


def _cmd_evaluate(args):
    if args.config:
        config = RunConfig.from_json_file(args.config)
    else:
        config = RunConfig()
    doc = config.to_dict()
    if args.variant is not None:
        doc["variant"] = args.variant
    if args.kernels is not None:
        doc["n_kernels"] = args.kernels
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.alpha is not None:
        doc["alpha"] = args.alpha
    if args.workers is not None:
        doc["workers"] = args.workers
    doc["cohort_dir"] = args.cohort
    doc["out_dir"] = args.out
    config = RunConfig.from_dict(doc)

    cohort = read_cohort(args.cohort)
    out_dir = Path(args.out)
    artifacts = out_dir / "artifacts" if args.save_artifacts else None
    report = leave_one_out(cohort, config, artifacts_dir=artifacts)

    out_dir.mkdir(parents=True, exist_ok=True)
    tag = config.variant.value
    report_path = out_dir / f"report_{tag}.json"
    report.save(report_path)
    csv_path = out_dir / f"mcc_{tag}.csv"
    report.write_csv(csv_path)

    s = report.summary
    print(f"variant {tag}: median MCC {s['median']:.3f} "
          f"(IQR {s['iqr_low']:.3f} to {s['iqr_high']:.3f}, "
          f"range {s['min']:.3f} to {s['max']:.3f})")
    if report.degenerate_subjects:
        print(f"degenerate test subjects (single-class truth): "
              f"{', '.join(report.degenerate_subjects)}")
    print(f"wrote {report_path}")
    print(f"wrote {csv_path}")
    return EXIT_OK


def _cmd_compare(args):
    reports = [CvReport.load(p) for p in args.reports]
    result = compare_variants(reports)
    print(result.format_text())
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        json_path = out_dir / "comparison.json"
        with open(json_path, "w", encoding="utf-8") as fh:
            fh.write(result.to_json())
        csv_path = out_dir / "comparison.csv"
        result.write_csv(csv_path)
        print(f"wrote {json_path}")
        print(f"wrote {csv_path}")
    return EXIT_OK


def _cmd_bench(args):
    if args.epochs < 1 or args.kernels < 1 or args.repeats < 1:
        raise InvalidConfigurationError(
            "epochs, kernels and repeats must all be >= 1"
        )
    rng = np.random.Generator(np.random.Philox(args.seed))
    epochs = rng.standard_normal((args.epochs, EPOCH_SAMPLES))
    warmup = epochs[: min(8, args.epochs)]

    rows = []
    for variant in Variant:
        kernel_set = generate_kernels(args.kernels, EPOCH_SAMPLES, args.seed,
                                      variant)
        transform_dataset(warmup, kernel_set, variant, workers=args.workers)
        times = []
        for _ in range(args.repeats):
            start = time.perf_counter()
            transform_dataset(epochs, kernel_set, variant,
                              workers=args.workers)
            times.append(time.perf_counter() - start)
        mean = statistics.fmean(times)
        sd = statistics.stdev(times) if len(times) > 1 else 0.0
        rows.append((variant.value, mean, sd, times))

    print(f"transform time for {args.kernels} kernels x {args.epochs} "
          f"epochs of {EPOCH_SAMPLES} samples, {args.repeats} repeats")
    print(f"{'variant':<18} mean (SD) s")
    for tag, mean, sd, _ in rows:
        print(f"{tag:<18} {mean:.2f} ({sd:.2f})")

    by_tag = {tag: mean for tag, mean, _, _ in rows}
    faster = by_tag[Variant.MS_HLF_DILATION.value] < by_tag[Variant.MS_HLF.value]
    print(f"trend check: ms_hlf_dilation mean "
          f"{'<' if faster else '>='} ms_hlf mean "
          f"({'matches' if faster else 'does not match'} the expected "
          f"shorter-sequence speedup)")

    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        csv_path = out_dir / "bench.csv"
        with open(csv_path, "w", encoding="utf-8") as fh:
            fh.write("variant,mean_s,sd_s," +
                     ",".join(f"run{i}_s" for i in range(args.repeats)) + "\n")
            for tag, mean, sd, times in rows:
                run_cols = ",".join(repr(t) for t in times)
                fh.write(f"{tag},{mean!r},{sd!r},{run_cols}\n")
        print(f"wrote {csv_path}")
    return EXIT_OK


_COMMANDS = {
    "gen-data": _cmd_gen_data,
    "evaluate": _cmd_evaluate,
    "compare": _cmd_compare,
    "bench": _cmd_bench,
}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (InvalidConfigurationError, InvalidArgumentError,
            InvalidTrainingSetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, UndefinedTestError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
