"""
Brute-force reference implementations and small specifications for the tests.
"""

import itertools
import random
from typing import Dict, Iterable, Iterator, List, Sequence, Set, Tuple

from modules.circuits.aiger import Aig
from modules.circuits.safety_spec import SafetySpec
from modules.logic.cnf import Cnf
from modules.solvers.qbf_oracle import Prefix
from modules.solvers.sat_oracle import SatSession

# i xor c is bad: the controller copies i
XOR_SPEC = """aag 5 2 0 1 3
2
4
11
6 2 5
8 3 4
10 7 9
i0 i
i1 controllable_c
"""

# bad = i, whatever the controller does
UNREALIZABLE_SPEC = """aag 2 2 0 1 0
2
4
2
i0 i
i1 controllable_c
"""

# latch l follows c; bad = l & i: the controller keeps c low
DELAY_SPEC = """aag 4 2 1 1 1
2
4
6 4
8
8 6 2
i0 i
i1 controllable_c
l0 l
"""

# the bad output is itself a latch, set by i & c
LATCHED_BAD_SPEC = """aag 4 2 1 1 1
2
4
6 8
6
8 2 4
i0 i
i1 controllable_c
l0 err
"""

# two outputs with c1 = i0 and c0 = c1 & i1 required
TWO_OUTPUT_SPEC = """aag 12 4 0 1 8
2
4
6
8
25
10 6 3
12 7 2
14 11 13
16 6 4
18 8 17
20 9 16
22 19 21
24 14 22
i0 i0
i1 i1
i2 controllable_c1
i3 controllable_c0
"""


def assignments(variables: Sequence[int]) -> Iterator[Dict[int, bool]]:
    for values in itertools.product((False, True), repeat=len(variables)):
        yield dict(zip(variables, values))


def models(f: Cnf, variables: Sequence[int]) -> Set[Tuple[bool, ...]]:
    """Satisfying assignments of f over `variables`, which must cover vars(f)."""
    return {
        tuple(a[v] for v in variables)
        for a in assignments(variables)
        if f.evaluate(a)
    }


def projected_models(f: Cnf, variables: Sequence[int]) -> Set[Tuple[bool, ...]]:
    """Assignments to `variables` that extend to a model of f."""
    free = sorted(f.variables() - set(variables))
    result = set()
    for a in assignments(list(variables)):
        for b in assignments(free):
            if f.evaluate({**a, **b}):
                result.add(tuple(a[v] for v in variables))
                break
    return result


def random_aig(rng: random.Random, max_nodes: int) -> Aig:
    """Combinational AIG with at most `max_nodes` inputs and gates and one output."""
    num_inputs = rng.randint(1, min(3, max_nodes - 1))
    num_gates = rng.randint(1, max_nodes - num_inputs)
    available = [2 * i for i in range(1, num_inputs + 1)]
    gates = []
    for index in range(num_inputs + 1, num_inputs + num_gates + 1):
        operands = [
            (0 if rng.random() < 0.05 else rng.choice(available)) | rng.randint(0, 1)
            for _ in range(2)
        ]
        gates.append((2 * index, max(operands), min(operands)))
        available.append(2 * index)
    return Aig(
        max_var_index=num_inputs + num_gates,
        inputs=[2 * i for i in range(1, num_inputs + 1)],
        outputs=[available[-1] | rng.randint(0, 1)],
        and_gates=gates,
    )


def random_cnf(rng: random.Random, variables: Sequence[int], max_clauses: int, max_width: int = 3) -> Cnf:
    f = Cnf()
    for _ in range(rng.randint(0, max_clauses)):
        width = rng.randint(1, min(max_width, len(variables)))
        f.add_clause(v if rng.random() < 0.5 else -v for v in rng.sample(list(variables), width))
    return f


def qbf_value(prefix: Prefix, matrix: Cnf, fixed: Dict[int, bool] = None) -> bool:
    """Quantifier-tree enumeration of exists U. forall A. exists E. matrix."""
    fixed = dict(fixed or {})
    outer = [v for v in prefix.outer_exists if v not in fixed]
    for u in assignments(outer):
        base = {**fixed, **u}
        if all(
            any(matrix.evaluate({**base, **a, **e}) for e in assignments(list(prefix.inner_exists)))
            for a in assignments(list(prefix.forall))
        ):
            return True
    return False


def cube_assignment(cube: Iterable[int]) -> Dict[int, bool]:
    return {abs(lit): lit > 0 for lit in cube}


def successor_table(spec: SafetySpec) -> Dict[Tuple[Tuple[bool, ...], Tuple[bool, ...], Tuple[bool, ...]], Tuple[bool, ...]]:
    """Next state for every (state, uncontrollable, controllable) triple, read off T by SAT."""
    table = {}
    x, i, o = spec.state_vars, spec.uncontrollable_vars, spec.controllable_vars
    with SatSession(spec.transition) as session:
        for s in assignments(x):
            for a in assignments(i):
                for b in assignments(o):
                    full = {**s, **a, **b}
                    assert session.solve([v if full[v] else -v for v in x + i + o])
                    key = (tuple(s[v] for v in x), tuple(a[v] for v in i), tuple(b[v] for v in o))
                    table[key] = tuple(session.value(v) for v in spec.next_vars)
    return table


def is_error(spec: SafetySpec, state: Tuple[bool, ...]) -> bool:
    values = dict(zip(spec.state_vars, state))
    value = values[abs(spec.error_lit)]
    return value if spec.error_lit > 0 else not value


def explicit_winning_states(spec: SafetySpec) -> Set[Tuple[bool, ...]]:
    """Greatest fixpoint of the controllable predecessor, by explicit enumeration."""
    table = successor_table(spec)
    states = [tuple(s[v] for v in spec.state_vars) for s in assignments(spec.state_vars)]
    inputs = [tuple(a[v] for v in spec.uncontrollable_vars) for a in assignments(spec.uncontrollable_vars)]
    outputs = [tuple(b[v] for v in spec.controllable_vars) for b in assignments(spec.controllable_vars)]
    winning = {s for s in states if not is_error(spec, s)}
    while True:
        kept = {
            s for s in winning
            if all(any(table[(s, i, o)] in winning for o in outputs) for i in inputs)
        }
        if kept == winning:
            return winning
        winning = kept


def region_states(spec: SafetySpec, w: Cnf) -> Set[Tuple[bool, ...]]:
    return models(w, spec.state_vars)


def evaluate_aig(aig, input_values: Sequence[bool], latch_values: Sequence[bool]) -> Tuple[List[bool], List[bool]]:
    """One combinational evaluation; returns (outputs, latch next values)."""
    values = {0: False}
    for lit, value in zip(aig.inputs, input_values):
        values[lit >> 1] = value
    for (cur, _), value in zip(aig.latches, latch_values):
        values[cur >> 1] = value
    gates = aig.gate_map()

    def value_of(lit: int) -> bool:
        index = lit >> 1
        if index not in values:
            r0, r1 = gates[index]
            values[index] = value_of(r0) and value_of(r1)
        return values[index] != bool(lit & 1)

    outputs = [value_of(lit) for lit in aig.outputs]
    nexts = [value_of(nxt) for _, nxt in aig.latches]
    return outputs, nexts


def implementation_is_winning(spec: SafetySpec, impl, winning: Set[Tuple[bool, ...]]) -> bool:
    """Every winning state stays winning under the implementation, for every input."""
    latches = len(spec.latch_vars)
    for state in winning:
        for a in assignments(spec.uncontrollable_vars):
            inputs = [a[v] for v in spec.uncontrollable_vars]
            outputs, nexts = evaluate_aig(impl, inputs, list(state[:latches]))
            successor = list(nexts)
            if spec.error_latch_synthetic:
                successor.append(state[-1] or outputs[0])
            if tuple(successor) not in winning:
                return False
    return True
