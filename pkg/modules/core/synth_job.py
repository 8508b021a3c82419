"""
Synthesis Job

The pipeline behind the command line: read a specification, compute the
winning region, extract output functions with the selected method, build
and optionally verify the implementation, then write it and a stats record.
"""

import logging
import os
import sys
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from modules.circuits.aiger import Aig, load_aiger, save_aiger, write_aiger
from modules.circuits.circuit import build_implementation
from modules.circuits.safety_spec import SafetySpec, spec_from_aig
from modules.circuits.verify import Verdict, verify_implementation
from modules.core.errors import SynthesisError, SynthesisTimeout
from modules.core.options import SynthOptions
from modules.core.stats import SynthStats, append_stats
from modules.solvers.sat_oracle import configure_backend
from modules.synthesis.extract_interp import sy_int
from modules.synthesis.extract_qbf import sy_learn_qbf
from modules.synthesis.game import WinningRegion, check_realizability, compute_winning_region
from modules.synthesis.result import ExtractionResult
from modules.utility.config import Config

logger = logging.getLogger(__name__)

EXIT_REALIZABLE = 10
EXIT_UNREALIZABLE = 20
EXIT_ERROR = 1
EXIT_TIMEOUT = 2


class SynthMethod(Enum):
    """Circuit extraction methods."""
    QL = "ql"    # QBF-based learning
    SL = "sl"    # interpolation by learning, dependency optimization on
    SLN = "sln"  # interpolation by learning, dependency optimization off
    SI = "si"    # external interpolator


@dataclass
class SynthOutcome:
    """Everything a job produced; later fields stay None when the pipeline stopped early."""
    stats: SynthStats
    realizable: Optional[bool] = None
    region: Optional[WinningRegion] = None
    extraction: Optional[ExtractionResult] = None
    implementation: Optional[Aig] = None
    verdict: Optional[Verdict] = None
    spec: Optional[SafetySpec] = field(default=None, repr=False)


def extract(spec: SafetySpec, region: WinningRegion, options: SynthOptions) -> ExtractionResult:
    """Run the extraction method named by `options.method`."""
    method = SynthMethod(options.method)
    if method is SynthMethod.QL:
        return sy_learn_qbf(spec, region, options)
    return sy_int(spec, region, options)


def synthesize(
    aig: Aig,
    options: SynthOptions,
    benchmark: str = "",
    verify: bool = False,
    config: Optional[Config] = None,
    stats: Optional[SynthStats] = None,
) -> SynthOutcome:
    """
    Solve a specification and build its implementation.

    Args:
        aig: The specification
        options: Run options
        benchmark: Name recorded in the stats
        verify: Model check the implementation and simulate it
        config: Source of the simulation settings (default: built-in defaults)
        stats: Record to fill (default: a new one)

    Returns:
        The outcome; `stats` is filled as far as the pipeline got
    """
    config = config or Config()
    stats = stats or SynthStats(benchmark=benchmark, method=options.method)
    outcome = SynthOutcome(stats=stats)
    start = time.monotonic()
    try:
        spec = spec_from_aig(aig, self_check=options.self_check)
        outcome.spec = spec
        logger.info(
            "Specification %s: %d inputs (%d controllable), %d latches, %d AND gates",
            benchmark or "<input>", len(aig.inputs), len(spec.controllable_vars), len(aig.latches), aig.num_ands,
        )

        phase = time.monotonic()
        region = compute_winning_region(spec, options)
        stats.time_winning_region_s = time.monotonic() - phase
        outcome.region = region
        outcome.realizable = check_realizability(spec, region)
        if not outcome.realizable:
            return outcome

        phase = time.monotonic()
        extraction = extract(spec, region, options)
        stats.time_extraction_s = time.monotonic() - phase
        outcome.extraction = extraction
        stats.per_output_iterations = extraction.iteration_counts()
        logger.info(
            "Extracted %d functions: %d clauses, %d literals",
            len(extraction.circuits), extraction.total_clauses, extraction.total_literals,
        )

        impl = build_implementation(spec, extraction.circuits, extraction.dep_graph, extraction.shared_aux)
        outcome.implementation = impl
        stats.aig_and_gates = impl.num_ands

        if verify:
            outcome.verdict = verify_implementation(
                spec,
                impl,
                region.w,
                simulation_runs=config.get("verify.simulation_runs", 10000),
                simulation_steps=config.get("verify.simulation_steps", 100),
                simulation_seed=config.get("verify.simulation_seed", 0),
            )
            stats.verified = outcome.verdict.passed
        return outcome
    finally:
        stats.time_total_s = time.monotonic() - start


def run_synth(args, config: Config) -> int:
    """
    Run one synthesis job from parsed command-line arguments.

    Args:
        args: Namespace with `spec`, `output`, `verify`, `timeout` and `stats`
        config: Configuration with command-line overrides applied

    Returns:
        10 realizable and synthesized, 20 unrealizable, 1 error (including a
        failed verification), 2 timeout
    """
    options = SynthOptions.from_config(config, args.timeout)
    benchmark = os.path.splitext(os.path.basename(args.spec))[0]
    stats = SynthStats(benchmark=benchmark, method=options.method)
    code = EXIT_ERROR
    try:
        configure_backend(config.get("sat.solver", "g4"))
        aig = load_aiger(args.spec)
        outcome = synthesize(aig, options, benchmark, args.verify, config, stats)
        if not outcome.realizable:
            code = EXIT_UNREALIZABLE
        elif outcome.verdict is not None and not outcome.verdict.passed:
            logger.error("Implementation failed verification: %s", outcome.verdict.message)
            code = EXIT_ERROR
        else:
            if args.output:
                save_aiger(outcome.implementation, args.output)
                logger.info("Implementation written to %s", args.output)
            else:
                sys.stdout.write(write_aiger(outcome.implementation).decode("ascii"))
                sys.stdout.flush()
            code = EXIT_REALIZABLE
    except SynthesisTimeout as e:
        logger.error("Timeout: %s", e)
        code = EXIT_TIMEOUT
    except (SynthesisError, OSError, ValueError) as e:
        logger.error("%s: %s", type(e).__name__, e)
        logger.debug("Traceback:", exc_info=True)
        code = EXIT_ERROR

    stats_path = args.stats or config.get("stats.path")
    if stats_path:
        append_stats(stats_path, stats)
    return code
