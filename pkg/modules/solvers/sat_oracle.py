"""
SAT Oracle

Incremental SAT sessions over a pysat backend: solving under assumptions,
projected models, failed-assumption cores shrunk to local minimality, and the
SAT-checked simplification of CNFs used on winning regions.
"""

import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from pysat.solvers import Solver

from modules.core.errors import ContractError
from modules.logic.cnf import Cnf, Cube, Lit, normalize_clause

logger = logging.getLogger(__name__)

_backend = "g4"


def configure_backend(name: str) -> None:
    """
    Select the pysat solver used by new sessions.

    Args:
        name: pysat solver name, e.g. "g4", "m22", "cd153"

    Raises:
        ValueError: If pysat does not know the solver
    """
    global _backend
    try:
        Solver(name=name).delete()
    except NotImplementedError:
        raise ValueError(f"unknown SAT solver '{name}'") from None
    _backend = name
    logger.debug("SAT backend set to %s", name)


class SatSession:
    """
    One incremental SAT solver instance.

    Clauses are only ever added. `model` is defined after a SAT verdict and
    `failed` (the failed assumptions, in assumption order) after an UNSAT one.
    A session is owned by one caller and must not be shared between threads.
    """

    def __init__(self, cnf: Optional[Cnf] = None, solver_name: Optional[str] = None):
        """
        Initialize the session.

        Args:
            cnf: Initial clause database
            solver_name: pysat solver name (default: the configured backend)
        """
        self.solver_name = solver_name or _backend
        self._solver = Solver(name=self.solver_name)
        self.clauses = Cnf()
        self.verdict: Optional[bool] = None
        self._model: Dict[int, bool] = {}
        self.failed: Cube = ()
        self.calls = 0
        self._inconsistent = False
        if cnf is not None:
            self.add_cnf(cnf)

    def add_clause(self, lits: Iterable[Lit]) -> None:
        """Add one clause to the database."""
        clause = normalize_clause(lits)
        if clause is None:
            return
        self.clauses.add_clause(clause)
        if not clause:
            self._inconsistent = True
        else:
            self._solver.add_clause(list(clause))

    def add_cnf(self, cnf: Cnf) -> None:
        """Add every clause of a formula."""
        for clause in cnf:
            self.add_clause(clause)

    def solve(self, assumptions: Iterable[Lit] = ()) -> bool:
        """
        Decide the database under assumptions.

        Args:
            assumptions: Literals assumed true for this call only

        Returns:
            True iff database and assumptions are satisfiable
        """
        assumed = list(assumptions)
        self.calls += 1
        if self._inconsistent:
            self.verdict = False
            self._model = {}
            self.failed = ()
            return False
        self.verdict = bool(self._solver.solve(assumptions=assumed))
        if self.verdict:
            self._model = {abs(lit): lit > 0 for lit in (self._solver.get_model() or [])}
            self.failed = ()
        else:
            core = set(self._solver.get_core() or [])
            self._model = {}
            self.failed = tuple(dict.fromkeys(lit for lit in assumed if lit in core))
        return self.verdict

    def value(self, var: int) -> bool:
        """
        Value of a variable in the last model.

        Variables the solver never saw take the value False.

        Raises:
            ContractError: If the last verdict was not SAT
        """
        if self.verdict is not True:
            raise ContractError("no model: the last call was not satisfiable")
        return self._model.get(var, False)

    def model_cube(self, projection: Iterable[int]) -> Cube:
        """Return the last model restricted to `projection` as a cube."""
        return tuple(var if self.value(var) else -var for var in projection)

    def solve_assuming(self, assumptions: Iterable[Lit], projection: Sequence[int]) -> Tuple[bool, Cube]:
        """
        Solve and return the model projected to a variable vector.

        Args:
            assumptions: Literals assumed true for this call only
            projection: Variables the returned cube assigns

        Returns:
            (sat, model cube over projection); the cube is empty on UNSAT
        """
        if self.solve(assumptions):
            return True, self.model_cube(projection)
        return False, ()

    def core_min(self, start: Iterable[Lit], minimize: bool = True, fixed: Iterable[Lit] = ()) -> Cube:
        """
        Shrink an inconsistent cube to a locally minimal core.

        Starts from the solver's failed assumptions, then tries to drop every
        remaining literal in order.

        Args:
            start: Cube that is unsatisfiable together with the database
            minimize: Run the literal-dropping pass after the solver core
            fixed: Literals assumed in every call that never enter the core

        Returns:
            Sub-cube of `start` that is still unsatisfiable with the database

        Raises:
            ContractError: If `start` is consistent with the database
        """
        start = normalize_clause(start)
        if start is None:
            raise ContractError("core requested for a contradictory cube")
        fixed = list(fixed)
        if self.solve(fixed + list(start)):
            raise ContractError("core requested for a satisfiable cube")
        in_start = set(start)
        core = [lit for lit in self.failed if lit in in_start]
        if not minimize:
            return tuple(core)
        i = 0
        while i < len(core):
            trial = core[:i] + core[i + 1:]
            if self.solve(fixed + trial):
                i += 1
            else:
                kept = set(self.failed)
                core = [lit for lit in trial if lit in kept]
        return tuple(core)

    def close(self) -> None:
        """Release the backend solver."""
        if self._solver is not None:
            self._solver.delete()
            self._solver = None

    def __enter__(self) -> "SatSession":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()


def solve_assuming(s: SatSession, assumptions: Iterable[Lit], projection: Sequence[int]) -> Tuple[bool, Cube]:
    """Functional form of `SatSession.solve_assuming`."""
    return s.solve_assuming(assumptions, projection)


def is_satisfiable(f: Cnf, assumptions: Iterable[Lit] = ()) -> bool:
    """One-shot satisfiability check of a formula."""
    with SatSession(f) as session:
        return session.solve(assumptions)


def unsat_core_min(start: Iterable[Lit], f: Cnf, minimize: bool = True) -> Cube:
    """
    Locally minimal sub-cube of `start` that is inconsistent with `f`.

    Args:
        start: Cube with start & f unsatisfiable
        f: The formula
        minimize: Run the literal-dropping pass

    Returns:
        The core

    Raises:
        ContractError: If start & f is satisfiable
    """
    with SatSession(f) as session:
        return session.core_min(start, minimize)


def implies(f: Cnf, g: Cnf) -> bool:
    """True iff every model of `f` satisfies `g` (checked clause by clause)."""
    with SatSession(f) as session:
        return all(not session.solve([-lit for lit in clause]) for clause in g)


def equivalent(f: Cnf, g: Cnf) -> bool:
    """True iff `f` and `g` have the same models over their joint variables."""
    return implies(f, g) and implies(g, f)


def simplify_cnf(f: Cnf) -> Cnf:
    """
    Remove clauses and literals without changing the semantics of `f`.

    First pass: a clause c is dropped if the remaining clauses imply c.
    Second pass: a literal l is dropped from c if the current formula
    implies c without l. Both checks run in one incremental session with an
    activation literal per clause version.

    Args:
        f: Formula to simplify

    Returns:
        An equivalent formula with no more clauses and literals
    """
    if f.is_false:
        return Cnf.false()
    clauses: List[Tuple[int, ...]] = list(f.clauses)
    next_act = f.max_var + 1
    acts: List[int] = []
    with SatSession() as session:
        for clause in clauses:
            acts.append(next_act)
            session.add_clause(clause + (-next_act,))
            next_act += 1
        alive = [True] * len(clauses)

        for j, clause in enumerate(clauses):
            others = [acts[k] for k in range(len(clauses)) if alive[k] and k != j]
            if not session.solve(others + [-lit for lit in clause]):
                alive[j] = False
                session.add_clause([-acts[j]])

        for j in range(len(clauses)):
            if not alive[j]:
                continue
            lits = list(clauses[j])
            idx = 0
            while idx < len(lits):
                rest = lits[:idx] + lits[idx + 1:]
                active = [acts[k] for k in range(len(clauses)) if alive[k]]
                if session.solve(active + [-lit for lit in rest]):
                    idx += 1
                    continue
                session.add_clause([-acts[j]])
                acts[j] = next_act
                next_act += 1
                session.add_clause(tuple(rest) + (-acts[j],))
                lits = rest
            clauses[j] = tuple(lits)

    simplified = Cnf(clause for clause, keep in zip(clauses, alive) if keep)
    logger.debug(
        "simplify_cnf: %d/%d clauses, %d/%d literals",
        len(simplified), len(f), simplified.literal_count, f.literal_count,
    )
    return simplified
