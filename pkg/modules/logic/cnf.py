"""
Propositional Core

This module provides the clause-level data structures every algorithm in the
synthesizer works on: literals, clauses, cubes, CNF formulas and the variable
pool that hands out fresh variables. It also holds the three structural
transformations on CNFs: Tseitin encoding of and-inverter graphs, negation
with one auxiliary variable per clause, and renaming a variable group apart.

Literals follow the DIMACS convention: a non-zero integer whose absolute value
is the variable and whose sign is the polarity.
"""

import logging
from collections import Counter
from typing import TYPE_CHECKING, Dict, Iterable, Iterator, List, Mapping, Optional, Set, Tuple

from pysat.formula import IDPool

from modules.core.errors import MalformedGraphError

if TYPE_CHECKING:
    from modules.circuits.aiger import Aig

logger = logging.getLogger(__name__)

Lit = int
Clause = Tuple[Lit, ...]
Cube = Tuple[Lit, ...]


def lit_var(lit: Lit) -> int:
    """Return the variable of a literal."""
    return lit if lit > 0 else -lit


def normalize_clause(lits: Iterable[Lit]) -> Optional[Clause]:
    """
    Remove duplicate literals while keeping their first-seen order.

    Args:
        lits: Literals of a clause or cube

    Returns:
        The literals as a tuple, or None if they contain both l and -l

    Raises:
        ValueError: If a literal is 0
    """
    seen: Set[Lit] = set()
    out: List[Lit] = []
    for lit in lits:
        if lit == 0:
            raise ValueError("literal 0 is not a variable")
        if -lit in seen:
            return None
        if lit not in seen:
            seen.add(lit)
            out.append(lit)
    return tuple(out)


def block(cube: Iterable[Lit]) -> Clause:
    """Return the clause that excludes every assignment of a cube."""
    return tuple(-lit for lit in cube)


def cube_of(assignment: Mapping[int, bool], variables: Iterable[int]) -> Cube:
    """Return the cube that fixes `variables` to their values in `assignment`."""
    return tuple(v if assignment[v] else -v for v in variables)


class Cnf:
    """
    A conjunction of clauses.

    The empty CNF is true; a CNF containing the empty clause is false.
    Tautological clauses are dropped when they are added.
    """

    __slots__ = ("clauses", "_has_empty")

    def __init__(self, clauses: Iterable[Iterable[Lit]] = ()):
        """
        Initialize the formula.

        Args:
            clauses: Initial clauses, each an iterable of literals
        """
        self.clauses: List[Clause] = []
        self._has_empty = False
        self.extend(clauses)

    @classmethod
    def false(cls) -> "Cnf":
        """Return the CNF that consists of the empty clause."""
        return cls([()])

    def add_clause(self, lits: Iterable[Lit]) -> bool:
        """
        Append a clause.

        Args:
            lits: Literals of the clause

        Returns:
            False if the clause was a tautology and has been dropped
        """
        clause = normalize_clause(lits)
        if clause is None:
            return False
        if not clause:
            self._has_empty = True
        self.clauses.append(clause)
        return True

    def extend(self, clauses: Iterable[Iterable[Lit]]) -> None:
        """Append several clauses."""
        for clause in clauses:
            self.add_clause(clause)

    @property
    def is_true(self) -> bool:
        """True if the formula has no clauses."""
        return not self.clauses

    @property
    def is_false(self) -> bool:
        """True if the formula contains the empty clause."""
        return self._has_empty

    def variables(self) -> Set[int]:
        """Return the set of variables occurring in the formula."""
        return {lit_var(lit) for clause in self.clauses for lit in clause}

    @property
    def max_var(self) -> int:
        return max((lit_var(lit) for clause in self.clauses for lit in clause), default=0)

    @property
    def literal_count(self) -> int:
        return sum(len(clause) for clause in self.clauses)

    def evaluate(self, assignment: Mapping[int, bool]) -> bool:
        """
        Evaluate the formula under a total assignment of its variables.

        Args:
            assignment: Value per variable

        Returns:
            Truth value of the formula
        """
        return all(
            any(assignment[lit_var(lit)] == (lit > 0) for lit in clause)
            for clause in self.clauses
        )

    def rename(self, mapping: Mapping[int, int]) -> "Cnf":
        """Return a copy with every variable in `mapping` replaced by its image."""
        renamed = Cnf()
        for clause in self.clauses:
            renamed.add_clause(
                (mapping.get(lit, lit) if lit > 0 else -mapping.get(-lit, -lit)) for lit in clause
            )
        return renamed

    def copy(self) -> "Cnf":
        duplicate = Cnf()
        duplicate.clauses = list(self.clauses)
        duplicate._has_empty = self._has_empty
        return duplicate

    def conjoin(self, *others: "Cnf") -> "Cnf":
        """Return the conjunction of this formula with others."""
        result = self.copy()
        for other in others:
            result.clauses.extend(other.clauses)
            result._has_empty = result._has_empty or other._has_empty
        return result

    def __and__(self, other: "Cnf") -> "Cnf":
        return self.conjoin(other)

    def to_dimacs(self) -> str:
        """Return the formula in DIMACS text format."""
        lines = [f"p cnf {self.max_var} {len(self.clauses)}"]
        lines.extend(" ".join(str(lit) for lit in clause + (0,)) for clause in self.clauses)
        return "\n".join(lines) + "\n"

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)

    def __len__(self) -> int:
        return len(self.clauses)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Cnf) and self.clauses == other.clauses

    def __repr__(self) -> str:
        return f"Cnf({[list(c) for c in self.clauses]})"


class VarPool:
    """
    Hands out fresh variables and records the named group each one belongs to.

    Allocation is delegated to a pysat `IDPool`: the k-th variable of group g
    is the id of the object (g, k), so groups are pairwise disjoint and the
    group of a variable is read back from the pool's id-to-object table.
    """

    def __init__(self, start: int = 1):
        """
        Initialize the pool.

        Args:
            start: First variable the pool will hand out
        """
        if start < 1:
            raise ValueError("variables start at 1")
        self._ids = IDPool(start_from=start)
        self._floor = start
        self._sizes: Counter = Counter()

    @property
    def next_free(self) -> int:
        """Variable the next call to `fresh` returns."""
        return max(self._ids.top + 1, self._floor)

    @property
    def top(self) -> int:
        """Largest variable handed out or reserved so far."""
        return self.next_free - 1

    def fresh(self, group: str = "aux") -> int:
        """
        Allocate one fresh variable.

        Args:
            group: Name of the group the variable joins

        Returns:
            The new variable
        """
        var = self._ids.id((group, self._sizes[group]))
        self._sizes[group] += 1
        return var

    def fresh_vector(self, count: int, group: str) -> List[int]:
        """Allocate `count` fresh variables in one group."""
        return [self.fresh(group) for _ in range(count)]

    def reserve(self, var: int) -> None:
        """Make sure `var` and everything below it is never handed out."""
        if var >= self.next_free:
            self._ids.occupy(self.next_free, var)
            self._floor = var + 1

    @property
    def groups(self) -> Dict[str, List[int]]:
        """Every group with its variables in allocation order."""
        result: Dict[str, List[int]] = {}
        for var in sorted(self._ids.id2obj):
            result.setdefault(self._ids.id2obj[var][0], []).append(var)
        return result

    def group(self, name: str) -> List[int]:
        """Return the variables of a group in allocation order."""
        return [self._ids.obj2id[(name, k)] for k in range(self._sizes[name])]

    def group_of(self, var: int) -> Optional[str]:
        obj = self._ids.id2obj.get(var)
        return obj[0] if obj is not None else None


def map_aiger_lit(node_map: Mapping[int, Lit], aiger_lit: int) -> Lit:
    """
    Translate an AIGER literal through a node map built by `tseitin_encode_aig`.

    Args:
        node_map: AIGER variable index to CNF literal
        aiger_lit: AIGER literal (2 * index + negation bit)

    Returns:
        The corresponding CNF literal

    Raises:
        MalformedGraphError: If the node is not mapped
    """
    index = aiger_lit >> 1
    if index not in node_map:
        raise MalformedGraphError(f"AIGER literal {aiger_lit} refers to an undefined node")
    lit = node_map[index]
    return -lit if aiger_lit & 1 else lit


def tseitin_encode_aig(
    aig: "Aig",
    pool: VarPool,
    leaf_map: Mapping[int, Lit],
    roots: Optional[Iterable[int]] = None,
) -> Tuple[Cnf, Dict[int, Lit]]:
    """
    Encode the AND gates of an AIG as clauses.

    Each gate g = a & b gets one fresh variable and the clauses
    (-g | a), (-g | b), (g | -a | -b). A constant node is encoded as a fresh
    variable with a unit clause.

    Args:
        aig: The and-inverter graph
        pool: Variable pool; gate variables join the group "aux"
        leaf_map: CNF literal for every input and latch index the cone reaches
        roots: AIGER literals whose fan-in cones are encoded (default: all gates)

    Returns:
        The clauses and the map from AIGER variable index to CNF literal

    Raises:
        MalformedGraphError: If a node references an undefined input or the graph is cyclic
    """
    gates = {lhs >> 1: (rhs0, rhs1) for lhs, rhs0, rhs1 in aig.and_gates}
    node_map: Dict[int, Lit] = dict(leaf_map)
    cnf = Cnf()

    if roots is None:
        pending = [lhs for lhs in gates]
    else:
        pending = [lit >> 1 for lit in roots]

    # iterative post-order; 1 = on stack, 2 = done
    state: Dict[int, int] = {}
    for start in pending:
        if start in node_map or state.get(start) == 2:
            continue
        stack: List[Tuple[int, bool]] = [(start, False)]
        while stack:
            index, expanded = stack.pop()
            if index in node_map and index != 0:
                continue
            if index == 0:
                if 0 not in node_map:
                    const = pool.fresh("const")
                    cnf.add_clause([const])
                    node_map[0] = -const
                continue
            if index not in gates:
                raise MalformedGraphError(f"node {2 * index} is neither an input, a latch nor a gate")
            if expanded:
                rhs0, rhs1 = gates[index]
                a = map_aiger_lit(node_map, rhs0)
                b = map_aiger_lit(node_map, rhs1)
                g = pool.fresh("aux")
                cnf.add_clause([-g, a])
                cnf.add_clause([-g, b])
                cnf.add_clause([g, -a, -b])
                node_map[index] = g
                state[index] = 2
                continue
            if state.get(index) == 1:
                raise MalformedGraphError(f"combinational cycle through node {2 * index}")
            state[index] = 1
            stack.append((index, True))
            for child in gates[index]:
                child_index = child >> 1
                if child_index not in node_map or child_index == 0:
                    if state.get(child_index) == 1:
                        raise MalformedGraphError(f"combinational cycle through node {2 * child_index}")
                    stack.append((child_index, False))
    logger.debug("Tseitin encoding: %d gates, %d clauses", len(node_map) - len(leaf_map), len(cnf))
    return cnf, node_map


def negate_cnf_with_aux(f: Cnf, pool: VarPool) -> Cnf:
    """
    Build a CNF for the negation of `f`.

    Every non-unit clause c gets an auxiliary k with k -> (all literals of c
    false); a unit clause (l) contributes -l directly. The disjunction of these
    literals is added as one clause. For every assignment to the variables of
    `f`, the result can be extended to a model iff `f` is false.

    Args:
        f: Formula to negate
        pool: Variable pool; auxiliaries join the group "neg"

    Returns:
        The negation
    """
    if f.is_false:
        return Cnf()
    if f.is_true:
        return Cnf.false()
    result = Cnf()
    disjuncts: List[Lit] = []
    for clause in f:
        if len(clause) == 1:
            disjuncts.append(-clause[0])
            continue
        k = pool.fresh("neg")
        for lit in clause:
            result.add_clause([-k, -lit])
        disjuncts.append(k)
    result.add_clause(disjuncts)
    return result


def rename_apart(f: Cnf, group: Iterable[int], pool: VarPool, tag: str = "copy") -> Tuple[Cnf, Dict[int, int]]:
    """
    Replace every variable of `group` by a fresh copy.

    Args:
        f: Formula to rename
        group: Variables to rename; all others are left untouched
        pool: Variable pool handing out the copies
        tag: Group name the copies join

    Returns:
        The renamed formula and the map from original to copy
    """
    mapping = {var: pool.fresh(tag) for var in sorted(set(group))}
    if not mapping:
        return f.copy(), mapping
    return f.rename(mapping), mapping
