"""
dirdep - Main Entry Point

Command-line interface for the directional independence tests:

    test       permutation test on a data file or an embedded dataset
    power      Monte Carlo power study from a study file
    datasets   list or export the embedded datasets

Usage:
    python -m src.main test --dataset wind --stat dcor:energy:0.5 -B 1000
    python -m src.main power --config config/table1_desk.cfg --out table1.csv --jobs 4
    python -m src.main datasets --export bloodpressure --out bp.csv
"""

import sys
import os
import argparse
import logging
from pathlib import Path
from typing import List, Optional, Tuple

_SRC_DIR = os.path.dirname(os.path.abspath(__file__))

# Run as a script, src/ heads sys.path and src/statistics.py would shadow the stdlib module
sys.path[:] = [p for p in sys.path if os.path.abspath(p or os.curdir) != _SRC_DIR]
sys.path.insert(0, os.path.abspath(os.path.join(_SRC_DIR, '../..')))
sys.path.insert(0, os.path.abspath(os.path.join(_SRC_DIR, '..')))

from shared.config_loader import load_app_config
from shared.errors import (
    ConfigurationError,
    DegenerateMarginalError,
    InputError,
    SamplerError,
)
from shared.models import AppConfig, PairedSample, StatisticName

from src.config_parser import StudyParser
from src.data_io import ColumnType, DataFile, read_paired_sample
from src.datasets import export_dataset, get_dataset, list_datasets
from src.harness import emit_table, run_study
from src.inference import independence_test, two_sample_test
from src.kernels import parse_kernel
from src.reporting import PermutationTestReport, PowerReport
from src.statistics import parse_statistic


DEFAULT_APP_CONFIG = Path(_SRC_DIR).parent / 'config' / 'dirdep.yaml'

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_CONFIG = 2
EXIT_INTERRUPTED = 130


logger = logging.getLogger(__name__)


def setup_logging(log_level: str = "INFO", log_file: Optional[str] = None,
                  log_format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s") -> None:
    """
    Setup logging configuration

    Console output goes to stderr; stdout carries results only.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_file: Optional log file path
        log_format: Record format
    """
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        # Create log directory if it doesn't exist
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format=log_format,
        handlers=handlers
    )


def build_parser() -> argparse.ArgumentParser:
    """
    Build the command line parser

    Returns:
        Parser with the test, power and datasets subcommands
    """
    parser = argparse.ArgumentParser(
        prog="dirdep",
        description="Kernel distance-correlation independence tests for directional data",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Test the embedded wind data with the energy kernel, a = 0.5
  dirdep test --dataset wind --stat dcor:energy:0.5 -B 1000

  # Spherical pairs from a csv file
  dirdep test rock.csv --x-cols x1,y1,z1 --y-cols x2,y2,z2 --x-type sphere --y-type sphere

  # Desk-scale power table on four workers
  dirdep power --config config/table1_desk.cfg --out table1.csv --text table1.txt --jobs 4
        """
    )

    parser.add_argument(
        '--app-config',
        type=str,
        default=None,
        help=f'Application config (default: {DEFAULT_APP_CONFIG.name} if present)'
    )
    parser.add_argument(
        '--log-level',
        type=str,
        default=None,
        choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
        help='Logging level (default: from the app config, INFO)'
    )
    parser.add_argument(
        '--log-file',
        type=str,
        default=None,
        help='Optional log file path'
    )

    sub = parser.add_subparsers(dest='command', required=True)

    test = sub.add_parser('test', help='Permutation test of independence (or two-sample test with nk)')
    test.add_argument('data', nargs='?', default=None, help='Delimited data file with a header row')
    test.add_argument('--dataset', type=str, default=None, help='Embedded dataset instead of a data file')
    test.add_argument('--x-cols', type=str, default='0', help='X column names or positions, comma-separated (default: 0)')
    test.add_argument('--y-cols', type=str, default='1', help='Y column names or positions, comma-separated (default: 1)')
    column_types = [t.value for t in ColumnType]
    test.add_argument('--x-type', type=str, default=ColumnType.CIRCULAR_DEG.value, choices=column_types)
    test.add_argument('--y-type', type=str, default=ColumnType.CIRCULAR_DEG.value, choices=column_types)
    test.add_argument('--stat', type=str, default='dcor', help='dcor[:kernel] | dcov[:kernel] | ccor | trig[:lambda] | nk[:kernel]')
    test.add_argument('--kernel', type=str, default=None, help='Kernel when --stat has none: energy:<a> | ratio | log')
    test.add_argument('-B', '--bootstrap', dest='B', type=int, default=None, help='Number of permutations')
    test.add_argument('--seed', type=int, default=None, help='Master seed')
    test.add_argument('--jobs', type=int, default=None, help='Worker count, -1 for all CPUs')
    test.add_argument('--json', action='store_true', help='Print a JSON report')
    test.add_argument('--renormalize', action='store_true', help='Scale non-unit sphere rows to norm 1')
    test.set_defaults(func=cmd_test)

    power = sub.add_parser('power', help='Monte Carlo power study')
    power.add_argument('--config', type=str, required=True, help='Study file (.cfg JSON or YAML)')
    power.add_argument('--out', type=str, default=None, help='Write the csv table here')
    power.add_argument('--text', type=str, default=None, help='Write the text table here')
    power.add_argument('--jobs', type=int, default=None, help='Worker count, -1 for all CPUs (default: DIRDEP_JOBS)')
    power.add_argument('--seed', type=int, default=None, help='Override the study seed')
    power.add_argument('--json', action='store_true', help='Print a JSON report instead of the text table')
    power.set_defaults(func=cmd_power)

    datasets = sub.add_parser('datasets', help='List or export the embedded datasets')
    datasets.add_argument('--export', type=str, default=None, metavar='NAME', help='Dataset to export as csv')
    datasets.add_argument('--out', type=str, default=None, help='Output path (default: NAME.csv)')
    datasets.set_defaults(func=cmd_datasets)

    return parser


def _load_sample(args: argparse.Namespace) -> Tuple[PairedSample, str]:
    if args.dataset and args.data:
        raise ConfigurationError("Give either a data file or --dataset, not both")
    if args.dataset:
        dataset = get_dataset(args.dataset)
        return dataset.to_paired_sample(), dataset.name
    if not args.data:
        raise ConfigurationError("A data file or --dataset is required")

    data = DataFile(
        path=args.data,
        x_cols=args.x_cols,
        y_cols=args.y_cols,
        x_type=args.x_type,
        y_type=args.y_type,
        renormalize=args.renormalize
    )
    return read_paired_sample(data), args.data


def cmd_test(args: argparse.Namespace, app: AppConfig) -> int:
    """Run one permutation test and print the report"""
    defaults = app.defaults
    kernel = parse_kernel(args.kernel or defaults.kernel)
    spec = parse_statistic(args.stat, default_kernel=kernel)
    B = args.B if args.B is not None else defaults.bootstrap
    seed = args.seed if args.seed is not None else defaults.seed
    jobs = args.jobs if args.jobs is not None else defaults.jobs

    sample, source = _load_sample(args)
    logger.info(f"Testing {source}: n={sample.n}, statistic={spec.spec}, B={B}, seed={seed}")

    if spec.name == StatisticName.NK:
        result = two_sample_test(spec.kernel, sample.x, sample.y, B=B, seed=seed, jobs=jobs)
    else:
        result = independence_test(sample.x, sample.y, spec, B=B, seed=seed, jobs=jobs)

    report = PermutationTestReport.from_result(result, spec, source)
    if args.json:
        print(report.model_dump_json(indent=2))
    else:
        sys.stdout.write(report.to_text())
    return EXIT_OK


def cmd_power(args: argparse.Namespace, app: AppConfig) -> int:
    """Run a study file and write its power tables"""
    jobs = args.jobs if args.jobs is not None else app.defaults.jobs
    study = StudyParser(app.defaults).load_study(args.config, seed=args.seed)

    table = run_study(study.scenarios, jobs=jobs, name=study.name)
    text = emit_table(table, 'text')

    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(emit_table(table, 'csv'), encoding='utf-8')
        logger.info(f"Wrote csv table to {out}")
    if args.text:
        out = Path(args.text)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding='utf-8')
        logger.info(f"Wrote text table to {out}")

    if args.json:
        print(PowerReport.from_table(table, args.out, args.text).model_dump_json(indent=2))
    else:
        sys.stdout.write(text)

    seeds = sorted({meta.seed for meta in table.scenarios})
    print(
        f"{study.name}: {len(table.scenarios)} scenario(s) in {table.runtime:.1f}s, "
        f"seed {', '.join(str(s) for s in seeds)}",
        file=sys.stderr
    )
    return EXIT_OK


def cmd_datasets(args: argparse.Namespace, app: AppConfig) -> int:
    """List the embedded datasets or export one as csv"""
    if args.export:
        path = args.out or f"{args.export.strip().lower()}.csv"
        out = export_dataset(args.export, path)
        print(f"Wrote {out}")
        return EXIT_OK

    for dataset in list_datasets():
        print(f"{dataset.name:<14} {dataset.n:>3} pairs  {dataset.description}")
    print(f"{'rock':<14} {'-':>3}        not embedded; see `dirdep datasets --export rock`")
    return EXIT_OK


def _resolve_app_config(path: Optional[str]) -> AppConfig:
    if path is not None:
        return load_app_config(path)
    if DEFAULT_APP_CONFIG.is_file():
        return load_app_config(str(DEFAULT_APP_CONFIG))
    return load_app_config(None)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main entry point for dirdep

    Args:
        argv: Argument list, sys.argv[1:] when None

    Returns:
        Exit code (0 success, 1 bad input data, 2 bad configuration, 130 interrupted)
    """
    args = build_parser().parse_args(argv)

    try:
        app = _resolve_app_config(args.app_config)
    except ConfigurationError as e:
        setup_logging(args.log_level or "INFO", args.log_file)
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG

    setup_logging(args.log_level or app.logging.level, args.log_file or app.logging.file,
                  app.logging.format)

    try:
        return args.func(args, app)

    except ConfigurationError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG

    except (InputError, DegenerateMarginalError, SamplerError) as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_INPUT

    except KeyboardInterrupt:
        logger.warning("Interrupted by user")
        return EXIT_INTERRUPTED


if __name__ == "__main__":
    sys.exit(main())
