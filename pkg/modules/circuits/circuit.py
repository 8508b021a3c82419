"""
Circuit Construction

Resubstitution of learned output functions into the strategy, a structurally
hashed AIG builder, and assembly of the final implementation: the
specification's latches and bad output, with every controllable input
replaced by the AND/OR network of its learned CNF.
"""

import logging
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import networkx as nx

from modules.circuits.aiger import Aig
from modules.circuits.safety_spec import SafetySpec
from modules.core.errors import MalformedGraphError
from modules.logic.cnf import Cnf, Lit, VarPool, lit_var

logger = logging.getLogger(__name__)

FALSE = 0
TRUE = 1


def definition_clauses(v: int, f: Cnf, pool: VarPool) -> Cnf:
    """
    Clauses for v <-> f.

    A unit clause (l) stands for its literal; every longer clause c gets an
    auxiliary k <-> OR(c). Then v -> k for every k, and (v | -k_1 | ... | -k_m).

    Args:
        v: Output variable
        f: Its function as a CNF
        pool: Pool for the clause auxiliaries (group "def")

    Returns:
        The definition
    """
    if f.is_false:
        return Cnf([[-v]])
    if f.is_true:
        return Cnf([[v]])
    result = Cnf()
    selectors: List[Lit] = []
    for clause in f:
        if len(clause) == 1:
            selectors.append(clause[0])
            continue
        k = pool.fresh("def")
        result.add_clause((-k,) + clause)
        for lit in clause:
            result.add_clause([k, -lit])
        selectors.append(k)
    for k in selectors:
        result.add_clause([-v, k])
    result.add_clause([v] + [-k for k in selectors])
    return result


def resubstitute(strategy: Cnf, v: int, f: Cnf, pool: VarPool) -> Cnf:
    """Return strategy & (v <-> f)."""
    return strategy.conjoin(definition_clauses(v, f, pool))


class AigBuilder:
    """
    Builds an AIG with constant propagation and structural hashing.

    Literals use the AIGER convention (2 * index + negation bit). Inputs and
    latches must be created before any gate.
    """

    def __init__(self):
        self.logger = logging.getLogger(__name__)
        self._inputs: List[int] = []
        self._latches: List[int] = []
        self._latch_next: Dict[int, int] = {}
        self._gates: List[Tuple[int, int, int]] = []
        self._strash: Dict[Tuple[int, int], int] = {}
        self._names: Dict[Tuple[str, int], str] = {}
        self._next_index = 1

    def _fresh(self) -> int:
        lit = 2 * self._next_index
        self._next_index += 1
        return lit

    def add_input(self, name: Optional[str] = None) -> int:
        if self._gates:
            raise ValueError("inputs must be created before gates")
        lit = self._fresh()
        if name:
            self._names[("i", len(self._inputs))] = name
        self._inputs.append(lit)
        return lit

    def add_latch(self, name: Optional[str] = None) -> int:
        if self._gates:
            raise ValueError("latches must be created before gates")
        lit = self._fresh()
        if name:
            self._names[("l", len(self._latches))] = name
        self._latches.append(lit)
        return lit

    def set_latch_next(self, latch: int, nxt: int) -> None:
        self._latch_next[latch] = nxt

    @staticmethod
    def NOT(a: int) -> int:
        return a ^ 1

    def AND(self, a: int, b: int) -> int:
        if a == FALSE or b == FALSE or a == b ^ 1:
            return FALSE
        if a == TRUE:
            return b
        if b == TRUE or a == b:
            return a
        if a < b:
            a, b = b, a
        key = (a, b)
        if key not in self._strash:
            lhs = self._fresh()
            self._strash[key] = lhs
            self._gates.append((lhs, a, b))
        return self._strash[key]

    def OR(self, a: int, b: int) -> int:
        return self.NOT(self.AND(self.NOT(a), self.NOT(b)))

    def XOR(self, a: int, b: int) -> int:
        return self.OR(self.AND(a, self.NOT(b)), self.AND(self.NOT(a), b))

    def and_all(self, lits: Iterable[int]) -> int:
        result = TRUE
        for lit in lits:
            result = self.AND(result, lit)
        return result

    def or_all(self, lits: Iterable[int]) -> int:
        result = FALSE
        for lit in lits:
            result = self.OR(result, lit)
        return result

    def cnf(self, f: Cnf, lit_of: Mapping[int, int]) -> int:
        """Build the AND of ORs for a CNF whose variables map to builder literals."""
        return self.and_all(self.or_all(_signed(lit_of, lit) for lit in clause) for clause in f)

    @property
    def num_gates(self) -> int:
        return len(self._gates)

    def build(
        self,
        outputs: Sequence[int],
        output_names: Optional[Sequence[str]] = None,
        controls: Optional[Mapping[int, int]] = None,
    ) -> Aig:
        """
        Emit the AIG, keeping only gates reachable from outputs, latch inputs
        and the `controls` wires, which are carried over to `Aig.controls`.

        Gates are renumbered in creation order, which is topological, so every
        AND gate's lhs exceeds both operands.
        """
        live = set()
        controls = dict(controls or {})
        stack = [lit >> 1 for lit in outputs] + [self._latch_next.get(l, FALSE) >> 1 for l in self._latches]
        stack += [lit >> 1 for lit in controls.values()]
        operands = {lhs >> 1: (a, b) for lhs, a, b in self._gates}
        while stack:
            index = stack.pop()
            if index in live or index not in operands:
                continue
            live.add(index)
            stack.extend(lit >> 1 for lit in operands[index])

        renumber: Dict[int, int] = {0: 0}
        for lit in self._inputs + self._latches:
            renumber[lit >> 1] = len(renumber)
        kept = [(lhs, a, b) for lhs, a, b in self._gates if lhs >> 1 in live]
        for lhs, _, _ in kept:
            renumber[lhs >> 1] = len(renumber)

        def image(lit: int) -> int:
            return 2 * renumber[lit >> 1] + (lit & 1)

        aig = Aig(max_var_index=len(renumber) - 1)
        aig.inputs = [image(lit) for lit in self._inputs]
        aig.latches = [(image(l), image(self._latch_next.get(l, FALSE))) for l in self._latches]
        aig.outputs = [image(lit) for lit in outputs]
        aig.controls = {position: image(lit) for position, lit in controls.items()}
        for lhs, a, b in kept:
            a, b = image(a), image(b)
            aig.and_gates.append((image(lhs), max(a, b), min(a, b)))
        for (kind, position), name in self._names.items():
            (aig.input_names if kind == "i" else aig.latch_names)[position] = name
        for position, name in enumerate(output_names or ()):
            if name:
                aig.output_names[position] = name
        self.logger.debug("AIG built: %d of %d gates live", len(kept), len(self._gates))
        return aig


def _signed(lit_of: Mapping[int, int], lit: Lit) -> int:
    image = lit_of[lit_var(lit)]
    return image if lit > 0 else image ^ 1


def output_order(dep_graph: nx.DiGraph, outputs: Sequence[int]) -> List[int]:
    """
    Order in which output networks can be built: dependencies first.

    Raises:
        MalformedGraphError: If the dependency graph is cyclic
    """
    graph = nx.DiGraph(dep_graph)
    graph.add_nodes_from(outputs)
    try:
        order = list(nx.lexicographical_topological_sort(graph))
    except nx.NetworkXUnfeasible:
        raise MalformedGraphError("dependency graph between outputs is cyclic") from None
    return list(reversed(order))


def build_implementation(
    spec: SafetySpec,
    circuits: Sequence[Tuple[int, Cnf]],
    dep_graph: Optional[nx.DiGraph] = None,
    shared_aux: Iterable[int] = (),
) -> Aig:
    """
    Assemble the implementation AIG.

    The result has the specification's uncontrollable inputs and latches; the
    controllable inputs are replaced by the networks of their learned
    functions. Shared auxiliaries are inlined as their defining cones from
    the transition relation.

    Args:
        spec: The game
        circuits: (output variable, f_v) for every controllable variable
        dep_graph: Edge u -> v if f_u references output v
        shared_aux: Transition-relation auxiliaries referenced by some f_v

    Returns:
        The implementation circuit

    Raises:
        MalformedGraphError: If the dependency graph is cyclic
        ValueError: If some controllable variable has no function
    """
    functions = dict(circuits)
    missing = [v for v in spec.controllable_vars if v not in functions]
    if missing:
        raise ValueError(f"no function for outputs {[spec.name_of(v) for v in missing]}")

    aig = spec.aig
    builder = AigBuilder()
    lit_of: Dict[int, int] = {}
    for position, var in enumerate(spec.input_vars):
        if var in spec.uncontrollable_vars:
            lit_of[var] = builder.add_input(aig.input_name(position))
    for position, var in enumerate(spec.latch_vars):
        lit_of[var] = builder.add_latch(aig.latch_names.get(position))
    if spec.const_var is not None:
        lit_of[spec.const_var] = TRUE

    shared = set(shared_aux)

    def aux_lit(var: int) -> int:
        stack = [var]
        while stack:
            top = stack[-1]
            if top in lit_of:
                stack.pop()
                continue
            if top not in spec.gate_defs:
                raise MalformedGraphError(f"variable {top} has no definition for inlining")
            pending = [lit_var(l) for l in spec.gate_defs[top] if lit_var(l) not in lit_of]
            if pending:
                stack.extend(pending)
                continue
            a, b = spec.gate_defs[top]
            lit_of[top] = builder.AND(_signed(lit_of, a), _signed(lit_of, b))
            stack.pop()
        return lit_of[var]

    graph = dep_graph if dep_graph is not None else nx.DiGraph()
    for v in output_order(graph, spec.controllable_vars):
        f = functions[v]
        for var in sorted(f.variables()):
            if var in shared and var not in lit_of:
                aux_lit(var)
        lit_of[v] = builder.cnf(f, lit_of)

    # the specification logic with controllable inputs substituted
    node_lit: Dict[int, int] = {0: FALSE}
    for position, lit in enumerate(aig.inputs):
        node_lit[lit >> 1] = lit_of[spec.input_vars[position]]
    for position, (cur, _) in enumerate(aig.latches):
        node_lit[cur >> 1] = lit_of[spec.latch_vars[position]]

    gates = aig.gate_map()

    def node(aiger_lit: int) -> int:
        stack = [aiger_lit >> 1]
        while stack:
            index = stack[-1]
            if index in node_lit:
                stack.pop()
                continue
            pending = [r >> 1 for r in gates[index] if r >> 1 not in node_lit]
            if pending:
                stack.extend(pending)
                continue
            r0, r1 = gates[index]
            node_lit[index] = builder.AND(node_lit[r0 >> 1] ^ (r0 & 1), node_lit[r1 >> 1] ^ (r1 & 1))
            stack.pop()
        return node_lit[aiger_lit >> 1] ^ (aiger_lit & 1)

    for position, (_, nxt) in enumerate(aig.latches):
        builder.set_latch_next(lit_of[spec.latch_vars[position]], node(nxt))
    bad = node(aig.outputs[0])

    controls = {
        position: lit_of[var] for position, var in enumerate(spec.input_vars) if var in spec.controllable_vars
    }
    impl = builder.build([bad], [aig.output_names.get(0, "")], controls)
    impl.comments = ["synthesized implementation"]
    logger.info("Implementation: %d AND gates", impl.num_ands)
    return impl
