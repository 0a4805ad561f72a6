#!/usr/bin/env python3
"""
svcq - Support Vector Clustering, classical and quantum-emulated

Clusters CSV datasets with a least-squares SVM contour model and a
same-contour adjacency graph, on a classical backend or on a quantum
emulation backend, and benchmarks the two by operation and query counts.
"""

import argparse
import sys
from typing import Callable, List, Optional

from pydantic import ValidationError

from src.bench import cmd_cluster, cmd_scaling, cmd_sweep_sigma, cmd_synth, cmd_table1_analog
from src.config import config
from src.exceptions import InputError
from src.models import ExperimentConfig, KernelSpec
from src.utils import setup_logging

KERNEL_KINDS = {"linear": "linear", "poly": "polynomial", "gaussian": "gaussian"}


def _list_of(cast: Callable) -> Callable[[str], List]:
    def parse(text: str) -> List:
        try:
            return [cast(item) for item in text.split(',') if item.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected a comma-separated list, got {text!r}")
    return parse


def _add_common_arguments(parser: argparse.ArgumentParser, kernel_choice: bool = True):
    parser.add_argument('-i', '--input', required=True, help='Input CSV file path')
    parser.add_argument('--has-labels', action='store_true', help='Last CSV column holds ±1 labels')
    if kernel_choice:
        parser.add_argument('--kernel', choices=list(KERNEL_KINDS), default='gaussian', help='Kernel family')
        parser.add_argument('--degree', type=int, help='Polynomial degree (poly only)')
        parser.add_argument('--sigma', type=float, help='Gaussian scale in exp(-sigma |x-y|^2) (gaussian only)')
    parser.add_argument('--gamma', type=float, help='Regularization weight (also called Upsilon or zeta)')
    parser.add_argument('--backend', choices=['classical', 'quantum-exact', 'quantum-shots'],
                        default='classical', help='Clustering backend')
    parser.add_argument('--shots', type=int, help='Measurement shots (quantum-shots only)')
    parser.add_argument('--line-samples', type=int, help='Sample points per segment test')
    parser.add_argument('--contour-level', type=float, help='Contour offset as a fraction of the smallest training value')
    parser.add_argument('--seed', type=int, default=0, help='Seed for every sampling step')
    parser.add_argument('-o', '--out', help='Output directory')


def create_parser():
    """Create and configure argument parser"""
    parser = argparse.ArgumentParser(
        prog='svcq',
        description="Support vector clustering with classical and quantum-emulated backends",
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument('--config', help='Configuration file path')
    parser.add_argument('--log-file', help='Log file path')
    parser.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], default='INFO',
                        help='Logging level')

    commands = parser.add_subparsers(dest='command', required=True)

    cluster = commands.add_parser('cluster', help='Cluster one dataset')
    _add_common_arguments(cluster)

    sweep = commands.add_parser('sweep-sigma', help='Cluster once per gaussian sigma')
    _add_common_arguments(sweep, kernel_choice=False)
    sweep.add_argument('--sigmas', type=_list_of(float), required=True, help='Comma-separated sigma values')

    bench = commands.add_parser('bench', help='Benchmark reports')
    bench_commands = bench.add_subparsers(dest='bench_command', required=True)

    scaling = bench_commands.add_parser('scaling', help='Identification counters against M')
    scaling.add_argument('--m', type=_list_of(int), default=[64, 128, 256, 512, 1024],
                         help='Comma-separated ascending M values')
    scaling.add_argument('--seed', type=int, default=0)
    scaling.add_argument('-o', '--out', help='Output directory')

    table1 = bench_commands.add_parser('table1', help='Classical vs quantum-exact classification after PCA')
    table1.add_argument('-i', '--input', required=True, help='Labeled CSV file path')
    table1.add_argument('--train-count', type=int, default=20, help='Training rows')
    table1.add_argument('--gamma', type=float, help='Regularization weight')
    table1.add_argument('--seed', type=int, default=0)
    table1.add_argument('-o', '--out', help='Output directory')

    synth = commands.add_parser('synth', help='Write the two-blob synthetic dataset as CSV')
    synth.add_argument('-o', '--out', required=True, help='Output CSV file path')
    synth.add_argument('--seed', type=int, default=0)

    return parser


def build_experiment(args, kernel: Optional[KernelSpec] = None) -> ExperimentConfig:
    """Translate parsed arguments into a validated ExperimentConfig"""
    if kernel is None:
        kernel = KernelSpec(kind=KERNEL_KINDS[args.kernel], degree=args.degree, sigma=args.sigma)
    shots = args.shots
    if args.backend == 'quantum-shots' and shots is None:
        shots = config.get('quantum', 'shots')
    return ExperimentConfig(
        input_path=args.input,
        has_labels=args.has_labels,
        kernel=kernel,
        gamma=args.gamma if args.gamma is not None else config.get('lssvm', 'gamma'),
        backend=args.backend,
        line_samples=args.line_samples if args.line_samples is not None else config.get('svc', 'line_samples'),
        shots=shots,
        seed=args.seed,
        out_dir=args.out or config.get('data', 'output_dir'),
        contour_level=args.contour_level if args.contour_level is not None else config.get('svc', 'contour_level'),
    )


def run_command(args) -> None:
    if args.command == 'cluster':
        experiment = build_experiment(args)
        report = cmd_cluster(experiment)
        print(f"clusterCount: {report.records[0].cluster_count}")
        print(f"Output saved to: {experiment.out_dir}")

    elif args.command == 'sweep-sigma':
        if len(args.sigmas) < 2:
            raise InputError(f"need >= 2 sigma values, got {len(args.sigmas)}")
        experiment = build_experiment(args, kernel=KernelSpec.gaussian(args.sigmas[0]))
        report = cmd_sweep_sigma(experiment, args.sigmas)
        for row in report.metadata['sigma_table']:
            print(f"sigma={row['sigma']:g}: clusterCount {row['cluster_count']}")

    elif args.command == 'bench' and args.bench_command == 'scaling':
        report = cmd_scaling(args.m, args.out, seed=args.seed)
        slopes = report.metadata['slopes']
        print(f"classical neighbour-scan slope: {slopes['classical_neighbour_scans']:.3f}")
        print(f"quantum oracle-query slope: {slopes['quantum_oracle_queries']:.3f}")

    elif args.command == 'bench' and args.bench_command == 'table1':
        gamma = args.gamma if args.gamma is not None else config.get('lssvm', 'gamma')
        report = cmd_table1_analog(args.input, args.train_count, args.seed, args.out, gamma=gamma)
        for record in report.records:
            print(f"{record.backend} test accuracy: {record.extra['accuracy']:.3f}")

    elif args.command == 'synth':
        print(f"Synthetic dataset saved to: {cmd_synth(args.out, seed=args.seed)}")


def main(argv: Optional[List[str]] = None) -> int:
    """Main application entry point"""
    parser = create_parser()
    args = parser.parse_args(argv)

    if args.config:
        config.load_from_file(args.config)

    logger = setup_logging(log_file=args.log_file, level=args.log_level)

    try:
        logger.info(f"Starting svcq {args.command}")
        run_command(args)
        logger.info("Completed successfully")
        return 0

    except (FileNotFoundError, InputError, ValidationError, ValueError) as e:
        logger.error(f"Input error: {e}")
        print(f"Error: {e}")
        return 2

    except Exception as e:
        logger.error(f"Run failed: {e}")
        print(f"Error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
