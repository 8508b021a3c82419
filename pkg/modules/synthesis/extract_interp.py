"""
Interpolation-based circuit extraction.

Outputs are synthesized one after the other. For output v the variables are
split into d (what f_v may read) and r (everything else). Two formulas over
d and disjoint fresh copies of r characterize where v must be true (M1) and
where it must be false (M0); f_v is an interpolant between them, computed by
learning:

    f := true
    while M0 & f has a model d:
        f := f & not core(d, M1)

With the dependency optimization, d also contains already synthesized
outputs that do not (transitively) read v, and transition-relation
auxiliaries whose cone only reads d. A final pass drops every clause and
literal the strategy check does not need.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx

from modules.circuits.circuit import definition_clauses
from modules.circuits.safety_spec import SafetySpec
from modules.circuits.verify import check_strategy
from modules.core.errors import (
    ContractError,
    ExternalInterpolatorError,
    SelfCheckError,
    StrategyConflictError,
)
from modules.core.options import DEFAULT_OPTIONS, SynthOptions
from modules.logic.cnf import Cnf, VarPool, block, lit_var, negate_cnf_with_aux, rename_apart
from modules.solvers.sat_oracle import SatSession, implies, is_satisfiable
from modules.synthesis.game import WinningRegion, negated_next_region
from modules.synthesis.result import ExtractionResult, OutputStats

logger = logging.getLogger(__name__)

Interpolator = Callable[[Cnf, Cnf, Sequence[int], SynthOptions, Optional[OutputStats]], Cnf]


@dataclass
class DepContext:
    """Variable split for the output currently being synthesized."""
    d: List[int]
    dep_graph: nx.DiGraph
    shared_aux: Set[int] = field(default_factory=set)
    r: Set[int] = field(default_factory=set)

    def admit_outputs(self, processed: Iterable[int], v: int) -> None:
        """Share every processed output whose function does not read v, directly or transitively."""
        self.d += [p for p in processed if not nx.has_path(self.dep_graph, p, v)]

    def admit_auxiliaries(self, supports: Dict[int, FrozenSet[int]]) -> None:
        """Share the transition gates whose cone only reads d."""
        leaves = set(self.d)
        self.shared_aux = {aux for aux, support in supports.items() if support <= leaves}
        self.d += sorted(self.shared_aux)


def aux_supports(spec: SafetySpec) -> Dict[int, FrozenSet[int]]:
    """
    Structural support of every gate variable of T.

    The support is the set of state, input and output variables in the
    gate's fan-in cone; the constant contributes nothing.
    """
    supports: Dict[int, FrozenSet[int]] = {}
    leaves = set(spec.leaf_vars)
    # gate variables are allocated after their operands
    for gate in sorted(spec.gate_defs):
        support: Set[int] = set()
        for lit in spec.gate_defs[gate]:
            var = lit_var(lit)
            if var in leaves:
                support.add(var)
            elif var in supports:
                support |= supports[var]
        supports[gate] = frozenset(support)
    return supports


def _rename_copy(f: Cnf, shared: Set[int], pool: VarPool, tag: str) -> Tuple[Cnf, Set[int]]:
    renamed_vars = {var for var in f.variables() if var not in shared}
    renamed, _ = rename_apart(f, renamed_vars, pool, tag)
    return renamed, renamed_vars


def build_m1_m0(
    spec: SafetySpec,
    region: WinningRegion,
    v: int,
    ctx: DepContext,
    pool: VarPool,
    not_w_next: Cnf,
    definitions: Optional[Cnf] = None,
) -> Tuple[Cnf, Cnf]:
    """
    Build the must-be-true and must-be-false formulas for output v.

        M1 = (T & W' & v)[r<-r1] & (T & not v & W & not W')[r<-r2]
        M0 = (T & W' & not v)[r<-r3] & (T & v & W & not W')[r<-r4]

    T is conjoined with the definitions of the outputs synthesized so far.

    Args:
        spec: The game
        region: Its winning region
        v: The output
        ctx: Variable split; ctx.r receives every renamed variable
        pool: Pool for the copies
        not_w_next: CNF for not W'
        definitions: v_j <-> f_j for the processed outputs

    Returns:
        (M1, M0)
    """
    shared = set(ctx.d)
    base = spec.transition.conjoin(definitions or Cnf())
    stay = base.conjoin(region.w_next)
    leave = base.conjoin(region.w, not_w_next)
    copies = []
    for formula, lit, tag in (
        (stay, v, "r1"), (leave, -v, "r2"), (stay, -v, "r3"), (leave, v, "r4"),
    ):
        renamed, renamed_vars = _rename_copy(formula.conjoin(Cnf([[lit]])), shared, pool, tag)
        ctx.r |= renamed_vars
        copies.append(renamed)
    return copies[0].conjoin(copies[1]), copies[2].conjoin(copies[3])


def int_learn(
    m1: Cnf,
    m0: Cnf,
    d: Sequence[int],
    options: SynthOptions = DEFAULT_OPTIONS,
    stats: Optional[OutputStats] = None,
) -> Cnf:
    """
    Interpolant between M1 and M0 over d by computational learning.

    Args:
        m1: Formula over d and private copies; where the output must be true
        m0: Formula over d and private copies; where the output must be false
        d: Shared variables
        options: Run options
        stats: Receives the iteration count

    Returns:
        f over d with M1 => f and f & M0 unsatisfiable

    Raises:
        StrategyConflictError: If M1 & M0 is satisfiable
    """
    present = m1.variables() | m0.variables()
    projection = [var for var in d if var in present]
    f = Cnf()
    iterations = 0
    with SatSession(m0) as candidates, SatSession(m1) as cores:
        while True:
            options.tick()
            sat, cube = candidates.solve_assuming((), projection)
            if not sat:
                break
            iterations += 1
            try:
                core = cores.core_min(cube, options.minimize_cores)
            except ContractError:
                raise StrategyConflictError(f"output must be both true and false under {cube}") from None
            clause = block(core)
            f.add_clause(clause)
            candidates.add_clause(clause)
            if not clause:
                break
    if stats is not None:
        stats.iterations += iterations
    if options.self_check:
        if not implies(m1, f) or is_satisfiable(f.conjoin(m0)):
            raise SelfCheckError("learned function violates the interpolant contract")
    return f


def _no_external_interpolator(m1, m0, d, options, stats) -> Cnf:
    raise ExternalInterpolatorError("external interpolator not configured")


def dependency_graph(spec: SafetySpec, circuits: Iterable[Tuple[int, Cnf]], supports: Dict[int, FrozenSet[int]]) -> Tuple[nx.DiGraph, Set[int]]:
    """
    Dependencies between outputs and the referenced transition-relation auxiliaries.

    Returns:
        Graph with edge u -> v if f_u reads output v directly or through an
        auxiliary, and the set of referenced auxiliaries
    """
    outputs = set(spec.controllable_vars)
    graph = nx.DiGraph()
    graph.add_nodes_from(spec.controllable_vars)
    referenced: Set[int] = set()
    for v, f in circuits:
        for var in f.variables():
            if var in outputs:
                graph.add_edge(v, var)
            elif var in supports:
                referenced.add(var)
                for other in supports[var] & outputs:
                    graph.add_edge(v, other)
    return graph, referenced


def _check_shared_aux_determined(spec: SafetySpec, ctx: DepContext) -> bool:
    """SAT check that the shared auxiliaries are functions of the other shared variables under T."""
    shared = ctx.shared_aux
    if not shared:
        return True
    scratch = VarPool(spec.pool.next_free)
    keep = set(ctx.d) - shared
    twin, mapping = rename_apart(spec.transition, spec.transition.variables() - keep, scratch, "twin")
    query = spec.transition.conjoin(twin)
    differs = []
    for aux in shared:
        other = mapping.get(aux)
        if other is None:
            continue
        diff = scratch.fresh("diff")
        query.add_clause([-diff, aux, other])
        query.add_clause([-diff, -aux, -other])
        differs.append(diff)
    if not differs:
        return True
    query.add_clause(differs)
    return not is_satisfiable(query)


def sy_int(
    spec: SafetySpec,
    region: WinningRegion,
    options: SynthOptions = DEFAULT_OPTIONS,
    interp: Optional[Interpolator] = None,
) -> ExtractionResult:
    """
    Synthesize every controllable output by interpolation.

    Method "sl" enables the dependency and shared-auxiliary optimization,
    "sln" disables it, "si" needs an external interpolator.

    Args:
        spec: The game
        region: Its winning region; the initial state must be winning
        options: Run options
        interp: Interpolation procedure (default: int_learn)

    Returns:
        Functions, dependency graph, referenced auxiliaries and counters

    Raises:
        ExternalInterpolatorError: For method "si" without an interpolator
        StrategyConflictError: If some output is forced both ways
    """
    if interp is None:
        interp = _no_external_interpolator if options.method == "si" else int_learn
    optimize = options.dependency_optimization
    pool = VarPool(spec.pool.next_free)
    not_w_next = negated_next_region(spec, region.w, options.negw, pool, options)
    supports = aux_supports(spec)
    outputs = list(spec.controllable_vars)

    result = ExtractionResult(method=options.method)
    graph = result.dep_graph
    graph.add_nodes_from(outputs)
    definitions = Cnf()
    processed: List[int] = []

    for index, v in enumerate(outputs):
        ctx = DepContext(d=spec.state_vars + spec.uncontrollable_vars + outputs[index + 1:], dep_graph=graph)
        if optimize:
            ctx.admit_outputs(processed, v)
            ctx.admit_auxiliaries(supports)
            if options.self_check and not _check_shared_aux_determined(spec, ctx):
                raise SelfCheckError("shared auxiliaries are not determined by the shared variables")
        d = ctx.d
        m1, m0 = build_m1_m0(spec, region, v, ctx, pool, not_w_next, definitions)

        stats = OutputStats()
        f = interp(m1, m0, d, options, stats)
        stats.clauses, stats.literals = len(f), f.literal_count
        result.circuits.append((v, f))
        result.stats[v] = stats
        definitions.extend(definition_clauses(v, f, pool))
        processed.append(v)

        step_graph, referenced = dependency_graph(spec, [(v, f)], supports)
        graph.add_edges_from(step_graph.edges())
        result.shared_aux |= referenced
        if not nx.is_directed_acyclic_graph(graph):
            raise SelfCheckError(f"dependency cycle after output {spec.name_of(v)}")
        logger.info(
            "Output %s: %d clauses, %d literals after %d iterations (|d| = %d)",
            spec.name_of(v), stats.clauses, stats.literals, stats.iterations, len(d),
        )

    if options.post_minimize:
        result.circuits = post_minimize(result.circuits, spec, region, options)
        result.dep_graph, result.shared_aux = dependency_graph(spec, result.circuits, supports)
        for v, f in result.circuits:
            result.stats[v].clauses, result.stats[v].literals = len(f), f.literal_count

    if options.self_check and not check_strategy(spec, region.w, result.circuits):
        raise SelfCheckError("learned functions do not implement a winning strategy")
    return result


def post_minimize(
    circuits: Sequence[Tuple[int, Cnf]],
    spec: SafetySpec,
    region: WinningRegion,
    options: SynthOptions = DEFAULT_OPTIONS,
) -> List[Tuple[int, Cnf]]:
    """
    Drop every clause, then every literal, that the strategy check does not need.

    One SAT session holds W & T & not W'; each output's definition is added
    under an activation literal, and a trial version replaces the current
    one only if the strategy check stays unsatisfiable.

    Args:
        circuits: Verified (output, f_v) pairs
        spec: The game
        region: Its winning region
        options: Run options

    Returns:
        The minimized pairs, in the same order
    """
    pool = VarPool(spec.pool.next_free)
    base = region.w.conjoin(spec.transition, negate_cnf_with_aux(region.w_next, pool))
    current = [(v, f.copy()) for v, f in circuits]
    active: Dict[int, int] = {}
    removed_clauses = removed_literals = 0

    with SatSession(base) as session:
        def install(v: int, f: Cnf) -> int:
            act = pool.fresh("act")
            for clause in definition_clauses(v, f, pool):
                session.add_clause(clause + (-act,))
            return act

        def accept(v: int, clauses: List[Tuple[int, ...]]) -> bool:
            trial = install(v, Cnf(clauses))
            others = [act for u, act in active.items() if u != v]
            if session.solve(others + [trial]):
                session.add_clause([-trial])
                return False
            session.add_clause([-active[v]])
            active[v] = trial
            return True

        for v, f in current:
            active[v] = install(v, f)

        for position, (v, f) in enumerate(current):
            clauses = list(f.clauses)
            j = 0
            while j < len(clauses):
                options.tick()
                trial = clauses[:j] + clauses[j + 1:]
                if accept(v, trial):
                    clauses = trial
                    removed_clauses += 1
                else:
                    j += 1
            for j in range(len(clauses)):
                lits = list(clauses[j])
                idx = 0
                while idx < len(lits):
                    options.tick()
                    shorter = tuple(lits[:idx] + lits[idx + 1:])
                    if accept(v, clauses[:j] + [shorter] + clauses[j + 1:]):
                        lits = list(shorter)
                        clauses[j] = shorter
                        removed_literals += 1
                    else:
                        idx += 1
            current[position] = (v, Cnf(clauses))

    logger.info("Post-minimization removed %d clauses and %d literals", removed_clauses, removed_literals)
    return current
