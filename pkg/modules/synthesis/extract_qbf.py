"""
QBF-based circuit extraction.

For one controllable output v after the other, a CNF f_v over the state and
uncontrollable variables u is learned:

    f_v := true, R := v & not S
    while exists u. forall (later outputs). exists (v, earlier outputs, rest): R
        u2 := core of u under which not v & not S is false
        f_v := f_v & not u2,  R := R & not u2
    S := S & (v <-> f_v)

with not S = W & T & not W'. Each output uses two sessions: the check
session only gains clauses, the core session never changes.
"""

import logging
from typing import List, Tuple

import networkx as nx

from modules.circuits.circuit import definition_clauses
from modules.circuits.safety_spec import SafetySpec
from modules.circuits.verify import check_strategy
from modules.core.errors import ContractError, InconsistentStrategyError, SelfCheckError
from modules.core.options import DEFAULT_OPTIONS, SynthOptions
from modules.logic.cnf import Cnf, VarPool, block
from modules.solvers.qbf_oracle import Prefix, QbfSession
from modules.synthesis.game import WinningRegion, negated_next_region
from modules.synthesis.result import ExtractionResult, OutputStats

logger = logging.getLogger(__name__)


def sy_learn_qbf(spec: SafetySpec, region: WinningRegion, options: SynthOptions = DEFAULT_OPTIONS) -> ExtractionResult:
    """
    Learn a CNF over state and uncontrollable variables for every controllable output.

    Args:
        spec: The game
        region: Its winning region; the initial state must be winning
        options: Run options

    Returns:
        The functions in processing (declaration) order and per-output counters

    Raises:
        InconsistentStrategyError: If some input forbids both values of an output
        SelfCheckError: If the combined functions do not keep play inside W
    """
    pool = VarPool(spec.pool.next_free)
    not_w_next = negated_next_region(spec, region.w, options.negw, pool, options)
    losing = region.w.conjoin(spec.transition, not_w_next)
    staying = spec.transition.conjoin(region.w_next)
    u = tuple(spec.state_vars + spec.uncontrollable_vars)
    rest = tuple(spec.next_vars + spec.aux_vars)

    result = ExtractionResult(method="ql", dep_graph=nx.DiGraph())
    result.dep_graph.add_nodes_from(spec.controllable_vars)
    definitions = Cnf()
    processed: List[int] = []
    outputs = list(spec.controllable_vars)

    for index, v in enumerate(outputs):
        later = tuple(outputs[index + 1:])
        inner = (v,) + tuple(processed) + rest
        prefix = Prefix(u, later, inner)
        matrix = losing.conjoin(definitions)
        prefix = prefix.with_inner(sorted(matrix.variables() - set(u) - set(later) - set(inner)))
        stats = OutputStats()
        f = Cnf()

        with QbfSession(prefix, matrix.conjoin(Cnf([[v]])), Cnf([[v]]).conjoin(staying, definitions), options) as check, \
                QbfSession(prefix, matrix.conjoin(Cnf([[-v]])), Cnf([[-v]]).conjoin(staying, definitions), options) as core:
            check_base, core_base = check.clauses_added, core.clauses_added
            while True:
                options.tick()
                if not check.solve():
                    break
                witness = check.model_cube()
                try:
                    u2 = core.core_min(witness, options.minimize_cores)
                except ContractError:
                    raise InconsistentStrategyError(
                        f"output {spec.name_of(v)} can take neither value for input {witness}"
                    ) from None
                clause = block(u2)
                f.add_clause(clause)
                check.add_clause(clause)
                stats.iterations += 1
                logger.debug("%s: learned clause of %d literals", spec.name_of(v), len(clause))
                if not clause:
                    break
            stats.check_clauses_added = check.clauses_added - check_base
            stats.core_clauses_added = core.clauses_added - core_base

        stats.clauses, stats.literals = len(f), f.literal_count
        result.circuits.append((v, f))
        result.stats[v] = stats
        definitions.extend(definition_clauses(v, f, pool))
        processed.append(v)
        logger.info(
            "Output %s: %d clauses, %d literals after %d iterations",
            spec.name_of(v), stats.clauses, stats.literals, stats.iterations,
        )

    if options.self_check and not check_strategy(spec, region.w, result.circuits):
        raise SelfCheckError("learned functions do not implement a winning strategy")
    return result
