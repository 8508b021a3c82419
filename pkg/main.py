#!/usr/bin/env python3
"""
aigsynth: synthesize circuits from AIGER safety specifications.

    aigsynth [options] SPEC.aag [-o IMPL.aag]
    aigsynth gen --kind {add,mult} --bits N [-o SPEC.aag]

Exit codes: 10 realizable (implementation written), 20 unrealizable,
1 error, 2 timeout.
"""

import argparse
import logging
import sys
from typing import List, Optional

from modules.benchmarks.generator import BENCHMARK_KINDS, gen_benchmark
from modules.circuits.aiger import save_aiger, write_aiger
from modules.core.synth_job import EXIT_ERROR, SynthMethod, run_synth
from modules.synthesis.game import NEGW_MODES
from modules.utility.config import Config

logger = logging.getLogger(__name__)


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-o", "--output", type=str, help="Output AIGER file (default: stdout)")
    parser.add_argument("--config", type=str, help="YAML or JSON configuration file")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log debugging output")
    parser.add_argument("-q", "--quiet", action="store_true", help="Log warnings and errors only")


def parse_arguments(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse the command line; a leading `gen` selects the benchmark generator."""
    argv = sys.argv[1:] if argv is None else list(argv)
    if argv and argv[0] == "gen":
        parser = argparse.ArgumentParser(prog="aigsynth gen", description="Generate an arithmetic benchmark")
        parser.add_argument("--kind", choices=BENCHMARK_KINDS, required=True, help="Benchmark family")
        parser.add_argument("--bits", type=int, required=True, help="Operand width")
        _add_common_arguments(parser)
        args = parser.parse_args(argv[1:])
        args.command = "gen"
        return args

    parser = argparse.ArgumentParser(
        prog="aigsynth",
        description="Synthesize an implementation of an AIGER safety specification",
        epilog="Use 'aigsynth gen --kind add --bits 4' to generate a benchmark.",
    )
    parser.add_argument("spec", type=str, help="AIGER specification (aag or aig)")
    parser.add_argument("--method", choices=[m.value for m in SynthMethod], help="Circuit extraction method")
    parser.add_argument("--negw", choices=NEGW_MODES, help="Encoding of the negated winning region")
    parser.add_argument("--verify", action="store_true", help="Model check the implementation")
    parser.add_argument("--timeout", type=float, help="Time budget in seconds")
    parser.add_argument("--stats", type=str, help="Append a statistics record to this CSV file")
    parser.add_argument("--no-minimize", action="store_true", help="Skip post-minimization of the learned functions")
    parser.add_argument("--self-check", action="store_true", help="Check every algorithm postcondition by SAT")
    _add_common_arguments(parser)
    args = parser.parse_args(argv)
    args.command = "synth"
    return args


def load_config(args: argparse.Namespace) -> Config:
    """Load the configuration file, if any, and apply command-line overrides."""
    config = Config(args.config)
    if getattr(args, "method", None):
        config.set("synthesis.method", args.method)
    if getattr(args, "negw", None):
        config.set("synthesis.negw", args.negw)
    if getattr(args, "no_minimize", False):
        config.set("synthesis.post_minimize", False)
    if getattr(args, "self_check", False):
        config.set("checks.self_check", True)
    return config


def setup_logging(args: argparse.Namespace, config: Optional[Config] = None) -> None:
    if args.verbose:
        level = logging.DEBUG
    elif args.quiet:
        level = logging.WARNING
    else:
        name = config.get("app.log_level", "INFO") if config else "INFO"
        level = getattr(logging, str(name).upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        stream=sys.stderr,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def run_gen(args: argparse.Namespace) -> int:
    try:
        aig = gen_benchmark(args.kind, args.bits)
    except ValueError as e:
        logger.error("%s", e)
        return EXIT_ERROR
    if args.output:
        save_aiger(aig, args.output)
        logger.info("Benchmark written to %s", args.output)
    else:
        sys.stdout.write(write_aiger(aig).decode("ascii"))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = parse_arguments(argv)
    try:
        config = load_config(args)
    except (OSError, ValueError) as e:
        setup_logging(args)
        logger.error("Cannot load configuration: %s", e)
        return EXIT_ERROR
    setup_logging(args, config)
    if args.command == "gen":
        return run_gen(args)
    return run_synth(args, config)


if __name__ == "__main__":
    sys.exit(main())
