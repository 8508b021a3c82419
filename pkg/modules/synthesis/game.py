"""
Safety Game Solving

Computes the winning region W of a safety game as a CNF over the state
variables by clause learning:

    W := (not error)
    repeat
        find a state in W and an input such that every output leaves W
        generalize the state to a cube of losing states, block it in W
    until no such state exists

The search uses the quantified formula
exists x, i. forall o. exists x', aux: W & T & not W', whose falsity is
exactly the inductiveness of W.
"""

import logging
from dataclasses import dataclass
from typing import Optional

from modules.core.errors import ContractError, SelfCheckError
from modules.core.options import DEFAULT_OPTIONS, SynthOptions
from modules.circuits.safety_spec import SafetySpec
from modules.logic.cnf import Clause, Cnf, Cube, VarPool, block, lit_var, negate_cnf_with_aux
from modules.solvers.qbf_oracle import Prefix, QbfSession
from modules.solvers.sat_oracle import SatSession, is_satisfiable, simplify_cnf
from modules.synthesis.neglearn import neg_learn

logger = logging.getLogger(__name__)

NEGW_MODES = ("aux", "learn")


@dataclass
class WinningRegion:
    """W over the state variables and the same clauses over the next-state variables."""
    w: Cnf
    w_next: Cnf
    rounds: int = 0
    blocked_cubes: int = 0

    @property
    def is_empty(self) -> bool:
        return self.w.is_false


def negated_next_region(
    spec: SafetySpec,
    w: Cnf,
    mode: str = "aux",
    pool: Optional[VarPool] = None,
    options: SynthOptions = DEFAULT_OPTIONS,
) -> Cnf:
    """
    CNF for not W' in the requested encoding.

    Args:
        spec: The game
        w: W over the state variables
        mode: "aux" (one auxiliary per clause) or "learn" (neg_learn, no auxiliaries)
        pool: Pool for the auxiliaries (default: a scratch pool above the game's variables)
        options: Run options passed on to neg_learn

    Returns:
        The negation over x' (and fresh auxiliaries in "aux" mode)
    """
    w_next = spec.to_next(w)
    if mode == "aux":
        return negate_cnf_with_aux(w_next, pool or VarPool(spec.pool.next_free))
    if mode == "learn":
        return neg_learn(w_next, options)
    raise ValueError(f"unknown negation mode {mode!r}, expected one of {NEGW_MODES}")


def _escape_session(spec: SafetySpec, w: Cnf, options: SynthOptions) -> QbfSession:
    not_w_next = negated_next_region(spec, w, options.negw, options=options)
    matrix = w.conjoin(spec.transition, not_w_next)
    prefix = Prefix(
        tuple(spec.state_vars + spec.uncontrollable_vars),
        tuple(spec.controllable_vars),
        tuple(spec.next_vars + spec.aux_vars),
    ).with_inner(sorted(not_w_next.variables()))
    dual = spec.transition.conjoin(spec.to_next(w))
    return QbfSession(prefix, matrix, dual=dual, options=options)


def find_escape(spec: SafetySpec, w: Cnf, options: SynthOptions = DEFAULT_OPTIONS) -> Optional[Cube]:
    """
    Search a state in W and an input from which every output leaves W.

    Returns:
        A cube over the state and uncontrollable variables, or None if W is inductive
    """
    with _escape_session(spec, w, options) as session:
        if session.solve():
            return session.model_cube()
    return None


def generalize_losing_cube(
    spec: SafetySpec,
    escape: Cube,
    session: SatSession,
    options: SynthOptions = DEFAULT_OPTIONS,
) -> Clause:
    """
    Turn an escape into a clause that blocks a cube of losing states.

    With the input part of the escape fixed, the state part is shrunk to a
    core against T & W': every state of the core, under that input, has no
    output keeping play inside W.

    Args:
        spec: The game
        escape: Cube over state and uncontrollable variables
        session: SAT session holding T & W'
        options: Run options (core minimization)

    Returns:
        The blocking clause over state variables; empty if every state is losing
    """
    states = set(spec.state_vars)
    state_part = [lit for lit in escape if lit_var(lit) in states]
    input_part = [lit for lit in escape if lit_var(lit) not in states]
    try:
        core = session.core_min(state_part, options.minimize_cores, fixed=input_part)
    except ContractError as exc:
        raise SelfCheckError(f"escape {escape} is not losing: {exc}") from exc
    return block(core)


def compute_winning_region(spec: SafetySpec, options: SynthOptions = DEFAULT_OPTIONS) -> WinningRegion:
    """
    Compute the winning region of a safety game.

    Each round opens one escape session for the current W and blocks escapes
    until none is left; the losing cubes of a round are added to the session
    as they are found. Rounds repeat until a round blocks nothing. The result
    is simplified with `simplify_cnf`.

    Args:
        spec: The game
        options: Run options

    Returns:
        The winning region; W is false if every state is losing
    """
    w = Cnf([[-spec.error_lit]])
    rounds = 0
    blocked = 0
    while not w.is_false:
        rounds += 1
        progress = False
        with _escape_session(spec, w, options) as escapes, \
                SatSession(spec.transition.conjoin(spec.to_next(w))) as cores:
            while True:
                options.tick()
                if not escapes.solve():
                    break
                clause = generalize_losing_cube(spec, escapes.model_cube(), cores, options)
                w.add_clause(clause)
                blocked += 1
                progress = True
                logger.debug("round %d: blocked losing cube of %d literals", rounds, len(clause))
                if not clause:
                    break
                escapes.add_clause(clause)
        if not progress:
            break

    w = Cnf.false() if w.is_false else simplify_cnf(w)
    region = WinningRegion(w, spec.to_next(w), rounds, blocked)
    logger.info(
        "Winning region: %d clauses, %d literals (%d rounds, %d losing cubes)",
        len(w), w.literal_count, region.rounds, region.blocked_cubes,
    )
    if options.self_check and not region.is_empty:
        if is_satisfiable(w.conjoin(Cnf([[spec.error_lit]]))):
            raise SelfCheckError("winning region contains an unsafe state")
        if find_escape(spec, w, options) is not None:
            raise SelfCheckError("winning region is not inductive")
    return region


def check_realizability(spec: SafetySpec, region: WinningRegion) -> bool:
    """True iff the all-zero initial state lies in the winning region."""
    realizable = is_satisfiable(region.w, spec.initial_cube)
    logger.info("Specification is %s", "realizable" if realizable else "unrealizable")
    return realizable
