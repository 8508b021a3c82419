"""
QBF Oracle

Solving and core extraction for quantified formulas with the prefix
exists U. forall A. exists E. over a CNF matrix, built on the SAT oracle by
counterexample-guided expansion:

  - an abstraction solver proposes an assignment to U; it holds one copy of
    the matrix per universal counterexample found so far, with A fixed to the
    counterexample and E renamed to fresh variables;
  - a candidate U is checked by a second, two-level loop that searches for an
    assignment to A under which the matrix has no model over E. If none
    exists, U is a witness; otherwise the assignment to A becomes a new copy
    in the abstraction.

Clauses may be added at any time; they are pushed into the abstraction and
into every existing copy, so a session is used incrementally.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Set, Tuple

from modules.core.errors import ContractError
from modules.core.options import DEFAULT_OPTIONS, SynthOptions
from modules.logic.cnf import Clause, Cnf, Cube, Lit, lit_var, normalize_clause
from modules.solvers.sat_oracle import SatSession

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Prefix:
    """Quantifier prefix exists outer_exists. forall forall. exists inner_exists."""
    outer_exists: Tuple[int, ...] = ()
    forall: Tuple[int, ...] = ()
    inner_exists: Tuple[int, ...] = ()

    def __post_init__(self):
        blocks = [set(self.outer_exists), set(self.forall), set(self.inner_exists)]
        total = sum(len(b) for b in blocks)
        if len(blocks[0] | blocks[1] | blocks[2]) != total:
            raise ValueError("quantifier blocks must be pairwise disjoint")

    def block_of(self, var: int) -> Optional[str]:
        """Return "outer", "forall", "inner" or None."""
        if var in self.outer_exists:
            return "outer"
        if var in self.forall:
            return "forall"
        if var in self.inner_exists:
            return "inner"
        return None

    def with_inner(self, variables: Iterable[int]) -> "Prefix":
        """Return a prefix whose inner block is extended by `variables`."""
        known = set(self.outer_exists) | set(self.forall) | set(self.inner_exists)
        extra = tuple(v for v in dict.fromkeys(variables) if v not in known)
        return Prefix(self.outer_exists, self.forall, self.inner_exists + extra)


class QbfSession:
    """
    Incremental exists-forall-exists QBF solver.

    The matrix only ever grows. After `solve`, `model` holds the outer
    assignment on SAT and `failed` the failed outer assumptions on UNSAT.

    A caller that knows the complement of its matrix can pass it as `dual`:
    a CNF over outer, universal and its own auxiliary variables such that, for
    every outer assignment satisfying the outer-only clauses of the matrix,
    dual(u, a) is satisfiable iff the matrix has no inner model under (u, a).
    The universal counterexample search is then a single SAT call. The dual is
    dropped as soon as a clause that is not outer-only is added.
    """

    def __init__(
        self,
        prefix: Prefix,
        matrix: Optional[Cnf] = None,
        dual: Optional[Cnf] = None,
        options: SynthOptions = DEFAULT_OPTIONS,
    ):
        """
        Initialize the session.

        Args:
            prefix: Quantifier prefix; every matrix variable must belong to one block
            matrix: Initial clauses
            dual: Optional complement of the matrix, see the class docstring
            options: Run options (deadline)
        """
        self.logger = logging.getLogger(__name__)
        self.options = options
        self.prefix = prefix
        self.matrix = Cnf()
        self._outer: Set[int] = set(prefix.outer_exists)
        self._forall: Set[int] = set(prefix.forall)
        self._inner: Set[int] = set(prefix.inner_exists)

        self._next_id = 1
        self._outer_ids: Dict[int, int] = {}
        for var in prefix.outer_exists:
            self._outer_ids[var] = self._new_id()
        self._outer_of: Dict[int, int] = {i: v for v, i in self._outer_ids.items()}
        self._expansions: List[Tuple[Dict[int, bool], Dict[int, int]]] = []
        self._universal_clauses: List[Clause] = []

        self.verdict: Optional[bool] = None
        self.model: Dict[int, bool] = {}
        self.failed: Cube = ()
        self.candidates = 0
        self.clauses_added = 0

        self._abstraction = SatSession()
        self._verifier = SatSession()
        self._dual: Optional[SatSession] = None
        try:
            if matrix is not None:
                self.add_cnf(matrix)
            if dual is not None:
                self._dual = SatSession(dual)
        except Exception:
            self.close()
            raise

    @property
    def expansions(self) -> int:
        """Number of universal counterexamples instantiated in the abstraction."""
        return len(self._expansions)

    def _new_id(self) -> int:
        var = self._next_id
        self._next_id += 1
        return var

    def _is_outer_only(self, clause: Clause) -> bool:
        return all(lit_var(lit) in self._outer for lit in clause)

    def add_clause(self, lits: Iterable[Lit]) -> None:
        """
        Add a clause to the matrix, the verifier and the abstraction.

        Outer-only clauses go to the abstraction once; any other clause is
        instantiated in every expansion copy.

        Raises:
            ContractError: If the clause mentions a variable outside the prefix
        """
        clause = normalize_clause(lits)
        if clause is None:
            return
        for lit in clause:
            var = lit_var(lit)
            if var not in self._outer and var not in self._forall and var not in self._inner:
                raise ContractError(f"variable {var} is not quantified")
        self.matrix.add_clause(clause)
        self.clauses_added += 1
        self._verifier.add_clause(clause)
        if self._is_outer_only(clause):
            self._abstraction.add_clause(self._outer_ids[lit] if lit > 0 else -self._outer_ids[-lit] for lit in clause)
            return
        if self._dual is not None:
            self.logger.debug("matrix extended beyond the outer block; dual formula dropped")
            self._dual.close()
            self._dual = None
        if any(lit_var(lit) in self._forall for lit in clause):
            self._universal_clauses.append(clause)
        for assignment, copies in self._expansions:
            instance = self._instantiate(clause, assignment, copies)
            if instance is not None:
                self._abstraction.add_clause(instance)

    def add_cnf(self, cnf: Cnf) -> None:
        """Add every clause of a formula."""
        for clause in cnf:
            self.add_clause(clause)

    def _instantiate(self, clause: Clause, assignment: Dict[int, bool], copies: Dict[int, int]) -> Optional[List[int]]:
        out: List[int] = []
        for lit in clause:
            var = lit_var(lit)
            if var in self._forall:
                if assignment[var] == (lit > 0):
                    return None
                continue
            if var in self._outer:
                image = self._outer_ids[var]
            else:
                image = copies.get(var)
                if image is None:
                    image = copies[var] = self._new_id()
            out.append(image if lit > 0 else -image)
        return out

    def _expand(self, assignment: Dict[int, bool]) -> None:
        copies: Dict[int, int] = {}
        self._expansions.append((assignment, copies))
        for clause in self.matrix:
            if self._is_outer_only(clause):
                continue
            instance = self._instantiate(clause, assignment, copies)
            if instance is not None:
                self._abstraction.add_clause(instance)
        self.logger.debug("expansion %d added (%d universal variables)", len(self._expansions), len(assignment))

    def _counterexample(self, outer: Dict[int, bool]) -> Optional[Dict[int, bool]]:
        """Search an assignment to the universal block that leaves the matrix unsatisfiable."""
        outer_lits = [v if outer[v] else -v for v in self.prefix.outer_exists]
        universal = self.prefix.forall
        if self._dual is not None:
            if not self._dual.solve(outer_lits):
                return None
            assignment = {var: self._dual.value(var) for var in universal}
            if self._verifier.solve(outer_lits + [v if assignment[v] else -v for v in universal]):
                raise ContractError("dual formula does not complement the matrix")
            return assignment
        if not universal:
            return None if self._verifier.solve(outer_lits) else {}
        next_aux = max(universal) + 1
        with SatSession() as candidate:
            while True:
                self.options.tick()
                if not candidate.solve():
                    return None
                assignment = {var: candidate.value(var) for var in universal}
                universal_lits = [v if assignment[v] else -v for v in universal]
                if not self._verifier.solve(outer_lits + universal_lits):
                    return assignment
                # the inner witness only works if the universal block satisfies
                # every clause that outer and inner values leave open
                disjuncts: List[int] = []
                for clause in self._universal_clauses:
                    if any(
                        lit_var(lit) not in self._forall and self._verifier.value(lit_var(lit)) == (lit > 0)
                        for lit in clause
                    ):
                        continue
                    open_lits = [lit for lit in clause if lit_var(lit) in self._forall]
                    if len(open_lits) == 1:
                        disjuncts.append(-open_lits[0])
                        continue
                    k = next_aux
                    next_aux += 1
                    for lit in open_lits:
                        candidate.add_clause([-k, -lit])
                    disjuncts.append(k)
                candidate.add_clause(disjuncts)

    def solve(self, assumptions: Iterable[Lit] = ()) -> bool:
        """
        Decide the QBF with part of the outer block fixed.

        Args:
            assumptions: Cube over outer variables

        Returns:
            True iff some completion of the cube makes forall A. exists E. matrix true

        Raises:
            ContractError: If an assumption is not an outer variable
        """
        assumed: List[int] = []
        for lit in assumptions:
            var = lit_var(lit)
            if var not in self._outer:
                raise ContractError(f"assumption on non-outer variable {var}")
            image = self._outer_ids[var]
            assumed.append(image if lit > 0 else -image)
        while True:
            self.options.tick()
            if not self._abstraction.solve(assumed):
                self.verdict = False
                self.model = {}
                self.failed = tuple(
                    self._outer_of[lit_var(lit)] if lit > 0 else -self._outer_of[lit_var(lit)]
                    for lit in self._abstraction.failed
                )
                return False
            self.candidates += 1
            outer = {var: self._abstraction.value(self._outer_ids[var]) for var in self.prefix.outer_exists}
            assignment = self._counterexample(outer)
            if assignment is None:
                self.verdict = True
                self.model = outer
                self.failed = ()
                return True
            self._expand(assignment)

    def model_cube(self) -> Cube:
        """Outer model of the last SAT answer as a cube in prefix order."""
        if self.verdict is not True:
            raise ContractError("no model: the last call was not satisfiable")
        return tuple(v if self.model[v] else -v for v in self.prefix.outer_exists)

    def core_min(self, start: Iterable[Lit], minimize: bool = True) -> Cube:
        """
        Shrink an outer cube under which the QBF is false.

        Raises:
            ContractError: If the QBF is true under `start`
        """
        start = normalize_clause(start)
        if start is None:
            raise ContractError("core requested for a contradictory cube")
        if self.solve(start):
            raise ContractError("QBF core requested for a cube under which the formula holds")
        core = list(self.failed)
        if not minimize:
            return tuple(core)
        i = 0
        while i < len(core):
            trial = core[:i] + core[i + 1:]
            if self.solve(trial):
                i += 1
            else:
                kept = set(self.failed)
                core = [lit for lit in trial if lit in kept]
        return tuple(core)

    def close(self) -> None:
        self.logger.debug("QBF session closed: %d candidates, %d expansions", self.candidates, self.expansions)
        self._abstraction.close()
        self._verifier.close()
        if self._dual is not None:
            self._dual.close()
            self._dual = None

    def __enter__(self) -> "QbfSession":
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        self.close()


def qsat(s: QbfSession) -> Tuple[bool, Cube]:
    """
    Decide the QBF of a session.

    Returns:
        (sat, witness cube over the outer block); the cube is empty on UNSAT
    """
    if s.solve():
        return True, s.model_cube()
    return False, ()


def qcore(start: Iterable[Lit], s: QbfSession, minimize: bool = True) -> Cube:
    """
    Locally minimal sub-cube of `start` under which the QBF stays false.

    Raises:
        ContractError: If the QBF holds under `start`
    """
    return s.core_min(start, minimize)


def holds_under(prefix: Prefix, matrix: Cnf, outer_cube: Iterable[Lit]) -> bool:
    """
    Independent two-block check of an outer witness.

    Args:
        prefix: Prefix of the original formula
        matrix: Matrix of the original formula
        outer_cube: Total assignment of the outer block

    Returns:
        True iff forall A. exists E. matrix holds once the cube is fixed

    Raises:
        ContractError: If the cube does not assign every outer variable
    """
    cube = list(outer_cube)
    if {lit_var(lit) for lit in cube} != set(prefix.outer_exists):
        raise ContractError("the outer cube must assign exactly the outer block")
    fixed = Cnf(matrix.clauses)
    for lit in cube:
        fixed.add_clause([lit])
    check = Prefix((), prefix.forall, prefix.inner_exists + prefix.outer_exists)
    with QbfSession(check, fixed) as session:
        return session.solve()


def read_qdimacs(text: str) -> Tuple[Prefix, Cnf]:
    """
    Parse a QDIMACS file whose prefix fits exists-forall-exists.

    Free variables join the outer block; missing blocks are empty.

    Args:
        text: File contents

    Returns:
        The prefix and the matrix

    Raises:
        ValueError: If the file is malformed or has more alternations
    """
    blocks: List[Tuple[str, List[int]]] = []
    matrix = Cnf()
    pending: List[int] = []
    header_seen = False
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {number}: malformed problem line")
            header_seen = True
            continue
        if not header_seen:
            raise ValueError(f"line {number}: clause before problem line")
        tokens = line.split()
        if tokens[0] in ("e", "a"):
            if tokens[-1] != "0":
                raise ValueError(f"line {number}: quantifier line must end with 0")
            variables = [int(t) for t in tokens[1:-1]]
            if blocks and blocks[-1][0] == tokens[0]:
                blocks[-1][1].extend(variables)
            else:
                blocks.append((tokens[0], variables))
            continue
        for token in tokens:
            lit = int(token)
            if lit == 0:
                matrix.add_clause(pending)
                pending = []
            else:
                pending.append(lit)
    if pending:
        matrix.add_clause(pending)

    kinds = "".join(kind for kind, _ in blocks)
    if kinds.startswith("a"):
        kinds = "e" + kinds
        blocks.insert(0, ("e", []))
    if kinds not in ("", "e", "ea", "eae"):
        raise ValueError(f"prefix {kinds!r} does not fit exists-forall-exists")
    outer, forall, inner = ([list(vs) for _, vs in blocks] + [[], [], []])[:3]
    bound = set(outer) | set(forall) | set(inner)
    free = sorted(v for v in matrix.variables() if v not in bound)
    return Prefix(tuple(free + outer), tuple(forall), tuple(inner)), matrix


def write_qdimacs(prefix: Prefix, matrix: Cnf) -> str:
    """Return the QBF in QDIMACS text format."""
    top = max([matrix.max_var, *prefix.outer_exists, *prefix.forall, *prefix.inner_exists, 0])
    lines = [f"p cnf {top} {len(matrix)}"]
    for kind, block in (("e", prefix.outer_exists), ("a", prefix.forall), ("e", prefix.inner_exists)):
        if block:
            lines.append(f"{kind} {' '.join(str(v) for v in block)} 0")
    lines.extend(" ".join(str(lit) for lit in clause + (0,)) for clause in matrix)
    return "\n".join(lines) + "\n"
