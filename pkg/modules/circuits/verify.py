"""
Implementation Verification

Checks a synthesized circuit against its specification relative to the
winning region W:

  1. the initial state lies in W
  2. no state of W is unsafe
  3. from every state of W, T driven by the circuit's controller stays in W,
     and the circuit's latch and bad logic agree with T

The SAT checks are complemented by a vectorized random simulation of the
emitted AIG.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from modules.circuits.aiger import Aig
from modules.circuits.circuit import definition_clauses
from modules.circuits.safety_spec import SafetySpec
from modules.core.errors import InterfaceMismatchError, MalformedGraphError
from modules.logic.cnf import Cnf, Cube, Lit, VarPool, map_aiger_lit, negate_cnf_with_aux, tseitin_encode_aig
from modules.solvers.sat_oracle import SatSession

logger = logging.getLogger(__name__)

CHECK_NAMES = {1: "initial state in W", 2: "safety of W", 3: "induction", 4: "random simulation"}


@dataclass
class Verdict:
    """Outcome of `verify_implementation`; `failed_check` is None on PASS."""
    passed: bool
    failed_check: Optional[int] = None
    counterexample: Cube = ()
    message: str = ""

    def __bool__(self) -> bool:
        return self.passed


@dataclass
class SimulationResult:
    runs: int
    steps: int
    failures: int
    first_failure: Optional[Tuple[int, int]] = None

    @property
    def passed(self) -> bool:
        return self.failures == 0


def check_strategy(spec: SafetySpec, w: Cnf, circuits: Sequence[Tuple[int, Cnf]], pool: Optional[VarPool] = None) -> bool:
    """
    Check that the learned functions keep play inside W.

    The formula W & T & (v <-> f_v for every v) & not W' must be unsatisfiable.
    Outputs without a function are left free.

    Args:
        spec: The game
        w: Winning region over the state variables
        circuits: (output variable, f_v) pairs
        pool: Pool for encoding auxiliaries (default: scratch pool above the game)

    Returns:
        True iff the functions implement a winning strategy on W
    """
    pool = pool or VarPool(spec.pool.next_free)
    query = w.conjoin(spec.transition, negate_cnf_with_aux(spec.to_next(w), pool))
    for v, f in circuits:
        query.extend(definition_clauses(v, f, pool))
    with SatSession(query) as session:
        return not session.solve()


def _check_interface(spec: SafetySpec, impl: Aig) -> None:
    if len(impl.inputs) != len(spec.uncontrollable_vars):
        raise InterfaceMismatchError(
            f"implementation has {len(impl.inputs)} inputs, specification has "
            f"{len(spec.uncontrollable_vars)} uncontrollable inputs"
        )
    if len(impl.latches) != len(spec.latch_vars):
        raise InterfaceMismatchError(
            f"implementation has {len(impl.latches)} latches, specification has {len(spec.latch_vars)}"
        )
    if len(impl.outputs) != 1:
        raise InterfaceMismatchError(f"implementation has {len(impl.outputs)} outputs, expected 1")
    if impl.controllable_indices():
        raise InterfaceMismatchError("implementation still has controllable inputs")


def encode_implementation(spec: SafetySpec, impl: Aig, pool: VarPool) -> Tuple[Cnf, List[Lit], Lit, Dict[int, Lit]]:
    """
    Logic of an implementation over the game's variables.

    Implementation inputs and latches are identified with the game's
    uncontrollable and latch variables by position. Latch inputs, the bad
    output and the controller wires become CNF literals; nothing is tied to
    the next-state variables.

    Returns:
        The clauses, the literal of every latch input, the bad literal, and
        the literal of every controller wire by controllable variable
    """
    leaf_map: Dict[int, Lit] = {}
    for position, lit in enumerate(impl.inputs):
        leaf_map[lit >> 1] = spec.uncontrollable_vars[position]
    for position, (cur, _) in enumerate(impl.latches):
        leaf_map[cur >> 1] = spec.latch_vars[position]
    roots = [nxt for _, nxt in impl.latches] + impl.outputs + list(impl.controls.values())
    cnf, node_map = tseitin_encode_aig(impl, pool, leaf_map, roots)
    latch_next = [map_aiger_lit(node_map, nxt) for _, nxt in impl.latches]
    bad = map_aiger_lit(node_map, impl.outputs[0])
    wires = {
        spec.input_vars[position]: map_aiger_lit(node_map, lit)
        for position, lit in impl.controls.items()
    }
    return cnf, latch_next, bad, wires


def _differ(pool: VarPool, a: Lit, b: Lit) -> Tuple[Lit, List[List[Lit]]]:
    d = pool.fresh("diff")
    return d, [[-d, a, b], [-d, -a, -b]]


def verify_implementation(
    spec: SafetySpec,
    impl: Aig,
    w: Cnf,
    simulation_runs: int = 0,
    simulation_steps: int = 100,
    simulation_seed: int = 0,
) -> Verdict:
    """
    Model check an implementation inductively relative to W.

    Check 3 runs the game's own transition relation T with every output tied
    to the implementation's controller wire, and also requires the
    implementation's latch inputs and bad output to agree with T there.

    Args:
        spec: The game
        impl: Candidate implementation; `impl.controls` names the controller wires
        w: Winning region over the state variables
        simulation_runs: Random simulation runs after the SAT checks (0 disables)
        simulation_steps: Steps per simulation run
        simulation_seed: Seed of the simulation

    Returns:
        PASS, or the first failing check with a counterexample cube

    Raises:
        InterfaceMismatchError: If inputs, latches or outputs do not match the specification
    """
    _check_interface(spec, impl)
    state_and_inputs = spec.state_vars + spec.uncontrollable_vars

    with SatSession(w) as session:
        if not session.solve(spec.initial_cube):
            return _fail(1, spec.initial_cube)

    with SatSession(w) as session:
        if session.solve([spec.error_lit]):
            return _fail(2, session.model_cube(state_and_inputs))

    pool = VarPool(spec.pool.next_free)
    impl_logic, latch_next, bad, wires = encode_implementation(spec, impl, pool)
    unwired = [spec.name_of(v) for v in spec.controllable_vars if v not in wires]
    if unwired:
        return _fail(3, (), f"no controller wire for {', '.join(unwired)}")
    closed_loop = w.conjoin(spec.transition, impl_logic)
    for v, wire in wires.items():
        closed_loop.add_clause([-v, wire])
        closed_loop.add_clause([v, -wire])

    not_w_next = negate_cnf_with_aux(spec.to_next(w), pool)
    with SatSession(closed_loop.conjoin(not_w_next)) as session:
        if session.solve():
            return _fail(3, session.model_cube(state_and_inputs))

    pairs = list(zip(spec.next_vars, latch_next)) + [(spec.bad_lit, bad)]
    mismatch = closed_loop.copy()
    selectors = []
    for a, b in pairs:
        d, clauses = _differ(pool, a, b)
        mismatch.extend(clauses)
        selectors.append(d)
    mismatch.add_clause(selectors)
    with SatSession(mismatch) as session:
        if session.solve():
            return _fail(3, session.model_cube(state_and_inputs), "implementation logic disagrees with T")

    if simulation_runs > 0:
        result = simulate_random(impl, simulation_runs, simulation_steps, simulation_seed)
        if not result.passed:
            run, step = result.first_failure
            return Verdict(False, 4, (), f"bad output raised in run {run} at step {step}")

    logger.info("Verification passed (%d state variables)", len(spec.state_vars))
    return Verdict(True)


def _fail(check: int, cube: Cube, detail: str = "") -> Verdict:
    message = f"check {check} ({CHECK_NAMES[check]}) failed"
    if detail:
        message += f": {detail}"
    logger.warning("Verification FAILED: %s", message)
    return Verdict(False, check, tuple(cube), message)


def _topological_gates(aig: Aig) -> List[Tuple[int, int, int]]:
    gates = {lhs >> 1: (lhs, r0, r1) for lhs, r0, r1 in aig.and_gates}
    order: List[Tuple[int, int, int]] = []
    state: Dict[int, int] = {}
    for start in gates:
        stack = [(start, False)]
        while stack:
            index, expanded = stack.pop()
            if index not in gates or state.get(index) == 2:
                continue
            if expanded:
                state[index] = 2
                order.append(gates[index])
                continue
            if state.get(index) == 1:
                raise MalformedGraphError(f"combinational cycle through node {2 * index}")
            state[index] = 1
            stack.append((index, True))
            stack.extend((r >> 1, False) for r in gates[index][1:] if state.get(r >> 1) != 2)
    return order


def simulate_random(aig: Aig, runs: int = 10000, steps: int = 100, seed: int = 0) -> SimulationResult:
    """
    Simulate a circuit from the all-zero state on random inputs.

    All runs advance together as boolean numpy vectors; a run fails when the
    (single) output is raised.

    Args:
        aig: The circuit
        runs: Number of independent runs
        steps: Steps per run
        seed: Seed of the input generator

    Returns:
        Failure count and the first (run, step) at which the output was raised
    """
    rng = np.random.default_rng(seed)
    order = _topological_gates(aig)
    values: Dict[int, np.ndarray] = {0: np.zeros(runs, dtype=bool)}
    latches = {cur >> 1: np.zeros(runs, dtype=bool) for cur, _ in aig.latches}
    failed = np.zeros(runs, dtype=bool)
    first_failure: Optional[Tuple[int, int]] = None

    def value(lit: int) -> np.ndarray:
        v = values[lit >> 1]
        return ~v if lit & 1 else v

    for step in range(steps):
        values.update(latches)
        draws = rng.random((len(aig.inputs), runs)) < 0.5
        for position, lit in enumerate(aig.inputs):
            values[lit >> 1] = draws[position]
        for lhs, r0, r1 in order:
            values[lhs >> 1] = value(r0) & value(r1)
        bad = value(aig.outputs[0])
        newly = bad & ~failed
        if first_failure is None and newly.any():
            first_failure = (int(np.argmax(newly)), step)
        failed |= bad
        latches = {cur >> 1: value(nxt).copy() for cur, nxt in aig.latches}

    result = SimulationResult(runs, steps, int(failed.sum()), first_failure)
    logger.debug("random simulation: %d/%d runs raised the output", result.failures, runs)
    return result
