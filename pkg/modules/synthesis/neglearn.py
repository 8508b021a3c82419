"""
Learning the negation of a CNF.

`neg_learn` builds a CNF for the complement of a formula over the formula's
own variables, one core-generalized clause per iteration, without the
auxiliary variables of `negate_cnf_with_aux`.
"""

import logging

from modules.core.errors import SelfCheckError
from modules.core.options import DEFAULT_OPTIONS, SynthOptions
from modules.logic.cnf import Cnf, VarPool, block, negate_cnf_with_aux
from modules.solvers.sat_oracle import SatSession, implies, is_satisfiable

logger = logging.getLogger(__name__)


def neg_learn(w_next: Cnf, options: SynthOptions = DEFAULT_OPTIONS) -> Cnf:
    """
    Compute a CNF N' equivalent to the negation of `w_next`.

    While W' & N' has a model x, the clause "not core(x)" is added to N',
    where the core is taken against the aux-variable negation of W'.

    Args:
        w_next: The formula to negate
        options: Run options (deadline, core minimization, self check)

    Returns:
        N' over the variables of `w_next`

    Raises:
        SelfCheckError: If the iteration bound is exceeded or the result is not the negation
    """
    if w_next.is_false:
        return Cnf()
    if w_next.is_true:
        return Cnf.false()
    variables = sorted(w_next.variables())
    negated = negate_cnf_with_aux(w_next, VarPool(w_next.max_var + 1))
    bound = 2 ** len(variables)
    result = Cnf()
    iterations = 0
    with SatSession(w_next) as models, SatSession(negated) as cores:
        while True:
            options.tick()
            sat, cube = models.solve_assuming((), variables)
            if not sat:
                break
            iterations += 1
            if iterations > bound:
                raise SelfCheckError(f"negation learning exceeded {bound} iterations")
            clause = block(cores.core_min(cube, options.minimize_cores))
            result.add_clause(clause)
            models.add_clause(clause)
    logger.debug("neg_learn: %d iterations, %d clauses over %d variables", iterations, len(result), len(variables))

    if options.self_check:
        if is_satisfiable(w_next.conjoin(result)) or not implies(negated, result):
            raise SelfCheckError("learned negation is not equivalent to the complement")
    return result
