"""
CLI interface for chromacomm
Handles argument parsing and command dispatching
"""
import argparse
import logging
import os
import shutil
import sys

from . import __version__
from .config import Config
from .utils import parse_seed_range, write_jsonl_record


def _validate_file_args(args: argparse.Namespace, names) -> None:
    """File arguments may be omitted but never given as empty strings"""
    empty = [f"--{name.replace('_', '-')}" for name in names
             if getattr(args, name, None) is not None and not getattr(args, name).strip()]
    if empty:
        logging.error(f"Empty file path provided for: {', '.join(empty)}")
        logging.error("Either provide valid file paths or omit the arguments to use defaults")
        sys.exit(1)


def run_command(args: argparse.Namespace) -> None:
    """Run one protocol over a range of seeds and report bits per vertex"""
    from .harness import config_from_settings, run_experiment, summary_record

    _validate_file_args(args, ["csv", "config_file"])
    config = Config(args.config_file)
    seeds = parse_seed_range(args.seeds) if args.seeds else None

    cfg = config_from_settings(
        config,
        name="run",
        protocol=args.protocol,
        family=args.family,
        n=args.n,
        delta=args.delta,
        partition=args.partition,
        transport=args.transport,
        csv_path=args.csv,
        c_sample=args.c_sample,
        edge_prob=args.edge_prob,
        base_seed=seeds[0] if seeds else None,
        trials=len(seeds) if seeds else None,
        workers=args.workers,
        allow_overlap=True if args.allow_overlap else None,
        record_wall_time=True if args.timing else None,
    )
    result = run_experiment(cfg)
    write_jsonl_record(summary_record(result), sys.stdout)


def exp_command(args: argparse.Namespace) -> None:
    """Run one of the canned experiments"""
    from . import harness

    _validate_file_args(args, ["csv", "config_file"])
    config = Config(args.config_file)

    if args.experiment == "clique-scaling":
        settings = config.clique_scaling
        result = harness.experiment_clique_scaling(
            deltas=settings['deltas'],
            n=args.n or settings['n'],
            seeds=args.seeds or settings['seeds'],
            c_sample=config.c_sample,
            flatness_c_sample=settings['flatness_c_sample'],
            base_seed=config.base_seed,
            workers=config.workers,
            csv_path=args.csv,
        )
        print(result.table.to_string(index=False))
        for name, ratio in result.ratios.items():
            print(f"ratio {name}: {ratio:.4f}")

    elif args.experiment == "slack-concentration":
        settings = config.slack_concentration
        table = harness.experiment_slack_concentration(
            ms=settings['ms'],
            draws=args.seeds or settings['draws'],
            seed=settings['seed'],
            c_sample=config.c_sample,
        )
        if args.csv:
            table.to_csv(args.csv, index=False)
        print(table.to_string(index=False))
        if not table["within_bound"].all():
            logging.error("Slack test failure frequency exceeded the bound")
            sys.exit(1)

    else:
        settings = config.tail
        histogram_path = None
        if args.csv:
            root, ext = os.path.splitext(args.csv)
            histogram_path = f"{root}_histogram{ext or '.csv'}"
        result = harness.experiment_tail(
            family=settings['family'],
            n=args.n or settings['n'],
            delta=settings['delta'],
            seeds=args.seeds or settings['seeds'],
            bins=settings['histogram_bins'],
            c_sample=config.c_sample,
            base_seed=config.base_seed,
            workers=config.workers,
            csv_path=args.csv,
            histogram_path=histogram_path,
        )
        write_jsonl_record(
            {"quantiles": result.quantiles, "p99_over_median": result.p99_over_median,
             "all_proper": result.all_proper},
            sys.stdout,
        )


def lowerbound_command(args: argparse.Namespace) -> None:
    """Encode a bit string as gadgets, color it, decode it back"""
    from .lowerbound import parse_bits_argument, roundtrip

    bits = parse_bits_argument(args.bits, args.seed)
    result = roundtrip(bits, seed=args.seed, method=args.method)
    print(result.decoded)
    print("PASS" if result.ok else "FAIL")
    if not result.ok:
        sys.exit(1)


def count_command(args: argparse.Namespace) -> None:
    """Counting commands; each prints one JSON-lines record"""
    from . import counting
    from .graph import read_graph, read_partition

    _validate_file_args(args, ["graph_file", "config_file"])
    config = Config(args.config_file)
    limits = config.counting

    if args.count_mode == "bound":
        if args.n is None or args.delta is None:
            logging.error("count bound needs --n and --delta")
            sys.exit(1)
        record = {"n": args.n, "delta": args.delta, "bound": counting.coloring_bound(args.n, args.delta)}

    elif args.count_mode == "cover":
        if args.graph_file:
            pg = read_partition(args.graph_file)
            n, delta = pg.n, args.delta if args.delta is not None else pg.delta
        else:
            pg = None
            n, delta = args.n, args.delta
        if n is None or delta is None:
            logging.error("count cover needs --n and --delta, or --graph-file")
            sys.exit(1)
        cover = counting.build_cover_set(
            n, delta, args.seed,
            max_vertices=limits['cover_max_vertices'], max_delta=limits['cover_max_delta'],
        )
        record = {
            "n": n,
            "delta": delta,
            "graphs": len(cover.graphs),
            "cover_size": len(cover.colorings),
            "draws": cover.draws,
            "prover_bits": cover.certificate_bits,
            "verified": counting.verify_cover_set(cover),
        }
        if pg is not None:
            run = counting.nondeterministic_protocol(pg, cover)
            record.update({"index": run.index, "alice_accepts": run.alice_accepts, "bob_accepts": run.bob_accepts})

    else:
        if not args.graph_file:
            logging.error(f"count {args.count_mode} needs --graph-file")
            sys.exit(1)
        g = read_graph(args.graph_file)
        exact = args.count_mode == "exact"
        report = counting.count_report(
            g, args.q,
            trials=0 if exact else args.trials,
            seed=args.seed,
            exact=exact,
            max_vertices=limits['exact_max_vertices'],
            batch_size=limits['mc_batch_size'],
        )
        record = report.to_dict()

    write_jsonl_record(record, sys.stdout)


def gen_command(args: argparse.Namespace) -> None:
    """Write a graph file, and optionally a partition file, for one family instance"""
    from .graph import partition_edges, write_graph, write_partition
    from .harness import ExperimentConfig, build_graph

    _validate_file_args(args, ["output", "partition_output"])
    cfg = ExperimentConfig(family=args.family, n=args.n, delta=args.delta, edge_prob=args.edge_prob)
    g = build_graph(cfg, args.seed)
    write_graph(g, args.output)
    if args.partition_output:
        write_partition(partition_edges(g, args.partition, args.seed), args.partition_output)


def init_config_command(args: argparse.Namespace) -> None:
    """Initialize configuration file in current directory"""
    output_file = args.output if args.output else "chromacomm.yaml"

    if os.path.exists(output_file) and not args.force:
        logging.error(f"Configuration file '{output_file}' already exists.")
        logging.error("Use --force to overwrite existing file.")
        sys.exit(1)

    try:
        shutil.copy2(Config._get_bundled_config_path(), output_file)
        logging.info(f"Configuration file created: {output_file}")
        logging.info("Use --config-file to specify this file in other commands.")
    except Exception as e:
        logging.error(f"Failed to create configuration file: {e}")
        sys.exit(1)


class CustomHelpFormatter(argparse.RawDescriptionHelpFormatter):
    """Custom formatter to prevent help text from wrapping to multiple lines"""
    def __init__(self, prog: str) -> None:
        super().__init__(prog, max_help_position=70, width=180)


def _add_common(parser: argparse.ArgumentParser, config: bool = True) -> None:
    if config:
        parser.add_argument('-c', '--config-file',
                            help='Configuration file (uses bundled default if not specified)')
    parser.add_argument('-v', '--verbose', action='store_true',
                        help='Enable verbose logging')


def create_parser() -> argparse.ArgumentParser:
    """Create and configure the argument parser"""
    from .harness import FAMILIES
    from .protocols import PROTOCOLS

    parser = argparse.ArgumentParser(
        description="chromacomm - two-party communication protocols for (Delta+1)-coloring",
        formatter_class=CustomHelpFormatter
    )
    parser.add_argument('--version', action='version', version=f'chromacomm {__version__}')

    subparsers = parser.add_subparsers(dest='command')
    partitions = ['uniform', 'all-alice', 'all-bob', 'interleave', 'overlap']

    # Run command
    run_parser = subparsers.add_parser('run', help='Run a protocol over a seed range',
                                       formatter_class=CustomHelpFormatter)
    run_parser.add_argument('--protocol', choices=list(PROTOCOLS), default='main',
                            help='Protocol to run (default: main)')
    run_parser.add_argument('--family', choices=FAMILIES, default='clique-union',
                            help='Graph family (default: clique-union)')
    run_parser.add_argument('--n', type=int, default=64, help='Number of vertices (default: 64)')
    run_parser.add_argument('--delta', type=int, default=7, help='Maximum degree (default: 7)')
    run_parser.add_argument('--partition', choices=partitions, default='uniform',
                            help='How edges are split between Alice and Bob (default: uniform)')
    run_parser.add_argument('--seeds', help='Seed range A..B or a single seed (default: from config)')
    run_parser.add_argument('--transport', choices=['memory', 'socket'], default='memory',
                            help='In-process simulation or localhost TCP (default: memory)')
    run_parser.add_argument('--csv', help='Write one CSV row per trial to this file')
    run_parser.add_argument('--c-sample', type=float, help='Override protocol.c_sample')
    run_parser.add_argument('--edge-prob', type=float, help='Edge probability for the random family')
    run_parser.add_argument('--allow-overlap', action='store_true',
                            help='Permit the overlap partition (rejection protocol only)')
    run_parser.add_argument('--timing', action='store_true', help='Record wall time per trial')
    run_parser.add_argument('--workers', type=int, help='Worker processes (default: from config)')
    _add_common(run_parser)
    run_parser.set_defaults(func=run_command)

    # Exp command
    exp_parser = subparsers.add_parser('exp', help='Run a canned experiment',
                                       formatter_class=CustomHelpFormatter)
    exp_parser.add_argument('experiment', choices=['clique-scaling', 'slack-concentration', 'tail'])
    exp_parser.add_argument('--csv', help='Write per-trial records (or the result table) to this file')
    exp_parser.add_argument('--seeds', type=int, help='Override the number of seeds (draws for slack-concentration)')
    exp_parser.add_argument('--n', type=int, help='Override the number of vertices')
    _add_common(exp_parser)
    exp_parser.set_defaults(func=exp_command)

    # Lowerbound command
    lb_parser = subparsers.add_parser('lowerbound', help='Gadget encode/decode checks',
                                      formatter_class=CustomHelpFormatter)
    lb_sub = lb_parser.add_subparsers(dest='lowerbound_command', required=True)
    rt_parser = lb_sub.add_parser('roundtrip', help='Encode bits, 3-color, decode',
                                  formatter_class=CustomHelpFormatter)
    rt_parser.add_argument('--bits', required=True, help='Bit string, or random:N')
    rt_parser.add_argument('--seed', type=int, default=0, help='Seed (default: 0)')
    rt_parser.add_argument('--method', choices=['greedy', 'main'], default='greedy',
                           help='How the gadget graph is colored (default: greedy)')
    _add_common(rt_parser, config=False)
    rt_parser.set_defaults(func=lowerbound_command)

    # Count command
    count_parser = subparsers.add_parser('count', help='Count proper colorings',
                                         formatter_class=CustomHelpFormatter)
    count_parser.add_argument('count_mode', choices=['exact', 'mc', 'bound', 'cover'])
    count_parser.add_argument('--graph-file', help='Graph file (partition file for cover)')
    count_parser.add_argument('--q', type=int, help='Palette size (default: max degree + 1)')
    count_parser.add_argument('--trials', type=int, default=100000, help='Monte Carlo trials (default: 100000)')
    count_parser.add_argument('--seed', type=int, default=0, help='Seed (default: 0)')
    count_parser.add_argument('--n', type=int, help='Number of vertices (bound, cover)')
    count_parser.add_argument('--delta', type=int, help='Maximum degree (bound, cover)')
    _add_common(count_parser)
    count_parser.set_defaults(func=count_command)

    # Gen command
    gen_parser = subparsers.add_parser('gen', help='Write a graph (and partition) file',
                                       formatter_class=CustomHelpFormatter)
    gen_parser.add_argument('--family', choices=FAMILIES, default='clique-union')
    gen_parser.add_argument('--n', type=int, default=64)
    gen_parser.add_argument('--delta', type=int, default=7)
    gen_parser.add_argument('--edge-prob', type=float)
    gen_parser.add_argument('--seed', type=int, default=0)
    gen_parser.add_argument('--partition', choices=partitions, default='uniform')
    gen_parser.add_argument('-o', '--output', default='graph.txt', help='Graph file (default: graph.txt)')
    gen_parser.add_argument('-p', '--partition-output', help='Also write a partition file')
    _add_common(gen_parser, config=False)
    gen_parser.set_defaults(func=gen_command)

    # Init-config command
    init_parser = subparsers.add_parser('init-config', help='Generate configuration file in current directory',
                                        formatter_class=CustomHelpFormatter)
    init_parser.add_argument('-o', '--output', default='chromacomm.yaml',
                             help='Output configuration file (default: chromacomm.yaml)')
    init_parser.add_argument('-f', '--force', action='store_true',
                             help='Overwrite existing configuration file')
    _add_common(init_parser, config=False)
    init_parser.set_defaults(func=init_config_command)

    return parser


def main(argv=None) -> None:
    """Main CLI entry point with subcommand dispatch"""
    parser = create_parser()
    args = parser.parse_args(argv)

    if not hasattr(args, 'func') or args.func is None:
        parser.error("the following arguments are required: command")

    log_level = logging.INFO if getattr(args, 'verbose', False) else logging.WARNING
    logging.basicConfig(level=log_level, format='%(asctime)s - %(levelname)s - %(message)s')

    try:
        args.func(args)
    except FileNotFoundError as e:
        logging.error(f"File not found: {e}")
        sys.exit(1)
    except Exception as e:
        logging.error(f"Error: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
