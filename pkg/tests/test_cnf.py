import itertools
import random
import unittest

from modules.circuits.aiger import Aig, parse_aiger
from modules.core.errors import MalformedGraphError
from modules.logic.cnf import (
    Cnf,
    VarPool,
    block,
    cube_of,
    map_aiger_lit,
    negate_cnf_with_aux,
    normalize_clause,
    rename_apart,
    tseitin_encode_aig,
)
from tests.oracles import XOR_SPEC, assignments, evaluate_aig, models, projected_models, random_aig, random_cnf


class TestCnf(unittest.TestCase):
    def test_empty_formula_is_true(self):
        f = Cnf()
        self.assertTrue(f.is_true)
        self.assertFalse(f.is_false)
        self.assertTrue(f.evaluate({}))

    def test_empty_clause_makes_formula_false(self):
        f = Cnf([[1, 2], []])
        self.assertTrue(f.is_false)
        self.assertTrue(Cnf.false().is_false)

    def test_tautologies_are_dropped(self):
        f = Cnf()
        self.assertFalse(f.add_clause([1, -1, 2]))
        self.assertEqual(len(f), 0)

    def test_duplicate_literals_are_merged(self):
        self.assertEqual(normalize_clause([3, -1, 3]), (3, -1))
        self.assertIsNone(normalize_clause([2, -2]))
        with self.assertRaises(ValueError):
            normalize_clause([0])

    def test_block_and_cube_of(self):
        self.assertEqual(block((1, -2, 3)), (-1, 2, -3))
        self.assertEqual(cube_of({1: True, 2: False}, [2, 1]), (-2, 1))

    def test_variables_and_counts(self):
        f = Cnf([[1, -3], [2], [-1, 4, 3]])
        self.assertEqual(f.variables(), {1, 2, 3, 4})
        self.assertEqual(f.max_var, 4)
        self.assertEqual(f.literal_count, 6)

    def test_rename_keeps_signs(self):
        f = Cnf([[1, -2], [2, 3]])
        self.assertEqual(f.rename({2: 7}).clauses, [(1, -7), (7, 3)])

    def test_conjoin_does_not_alias(self):
        f = Cnf([[1]])
        g = f.conjoin(Cnf([[2]]))
        g.add_clause([3])
        self.assertEqual(len(f), 1)
        self.assertEqual(len(g), 3)

    def test_to_dimacs(self):
        self.assertEqual(Cnf([[1, -2], [2]]).to_dimacs(), "p cnf 2 2\n1 -2 0\n2 0\n")


class TestVarPool(unittest.TestCase):
    def test_groups_are_disjoint_and_dense(self):
        pool = VarPool(5)
        a = pool.fresh_vector(2, "a")
        b = pool.fresh("b")
        self.assertEqual(a, [5, 6])
        self.assertEqual(b, 7)
        self.assertEqual(pool.group_of(6), "a")
        self.assertEqual(pool.top, 7)
        pool.reserve(20)
        self.assertEqual(pool.next_free, 21)
        self.assertEqual(pool.fresh(), 21)
        self.assertIsNone(pool.group_of(15))
        self.assertEqual(pool.group_of(21), "aux")
        self.assertEqual(pool.groups, {"a": [5, 6], "b": [7], "aux": [21]})
        self.assertEqual(pool.group("a"), [5, 6])
        self.assertEqual(pool.group("missing"), [])

    def test_start_must_be_positive(self):
        with self.assertRaises(ValueError):
            VarPool(0)


class TestNegation(unittest.TestCase):
    def test_negation_matches_truth_table(self):
        rng = random.Random(7)
        variables = [1, 2, 3, 4, 5]
        for _ in range(100):
            f = random_cnf(rng, variables, 6)
            pool = VarPool(len(variables) + 1)
            negation = negate_cnf_with_aux(f, pool)
            expected = set(models(Cnf(), variables)) - models(f, variables)
            self.assertEqual(projected_models(negation, variables), expected, f)

    def test_negation_of_constants(self):
        pool = VarPool(10)
        self.assertTrue(negate_cnf_with_aux(Cnf(), pool).is_false)
        self.assertTrue(negate_cnf_with_aux(Cnf.false(), pool).is_true)

    def test_rename_apart_uses_fresh_copies(self):
        pool = VarPool(10)
        f = Cnf([[1, 2], [-2, 3]])
        renamed, mapping = rename_apart(f, [2], pool, "copy")
        self.assertEqual(mapping, {2: 10})
        self.assertEqual(renamed.clauses, [(1, 10), (-10, 3)])
        self.assertEqual(pool.group("copy"), [10])

    def test_rename_apart_is_fresh_and_pool_independent(self):
        rng = random.Random(11)
        variables = [1, 2, 3, 4, 5, 6]
        for _ in range(50):
            f = random_cnf(rng, variables, 8)
            group = rng.sample(variables, rng.randint(0, len(variables)))
            first, first_map = rename_apart(f, group, VarPool(7), "copy")
            second, second_map = rename_apart(f, group, VarPool(40), "copy")
            self.assertTrue(first.variables().isdisjoint(group))
            self.assertTrue(second.variables().isdisjoint(group))
            # the two results differ only by a bijection of the copies
            relabel = {first_map[v]: second_map[v] for v in first_map}
            self.assertEqual(len(set(relabel.values())), len(relabel))
            self.assertEqual(first.rename(relabel).clauses, second.clauses)


class TestTseitin(unittest.TestCase):
    def test_gate_values_are_forced(self):
        aig = parse_aiger(XOR_SPEC)
        pool = VarPool(3)
        cnf, node_map = tseitin_encode_aig(aig, pool, {1: 1, 2: 2})
        bad = -node_map[5]
        for a in assignments([1, 2]):
            expected = a[1] != a[2]
            for b in assignments(sorted(cnf.variables() - {1, 2})):
                full = {**a, **b}
                if cnf.evaluate(full):
                    self.assertEqual(full[abs(bad)] == (bad > 0), expected)

    def test_random_graphs_match_truth_table(self):
        rng = random.Random(5)
        for _ in range(40):
            aig = random_aig(rng, max_nodes=10)
            leaves = {lit >> 1: lit >> 1 for lit in aig.inputs}
            pool = VarPool(len(aig.inputs) + 1)
            cnf, node_map = tseitin_encode_aig(aig, pool, leaves, aig.outputs)
            out = map_aiger_lit(node_map, aig.outputs[0])
            inputs = sorted(leaves.values())
            expected = set()
            for a in assignments(inputs):
                (value,), _ = evaluate_aig(aig, [a[v] for v in inputs], [])
                expected.add(tuple(a[v] for v in inputs) + (value == (out > 0),))
            self.assertEqual(projected_models(cnf, inputs + [abs(out)]), expected, aig.and_gates)

    def test_chain_of_two_gates(self):
        # g1 = a & b, g2 = g1 & c
        aig = Aig(max_var_index=5, inputs=[2, 4, 6], outputs=[10], and_gates=[(8, 2, 4), (10, 8, 6)])
        pool = VarPool(4)
        cnf, node_map = tseitin_encode_aig(aig, pool, {1: 1, 2: 2, 3: 3}, [10])
        self.assertEqual(len(cnf), 6)
        self.assertEqual(len(pool.group("aux")), 2)
        expected = {(a, b, c, a and b and c) for a, b, c in itertools.product((False, True), repeat=3)}
        self.assertEqual(projected_models(cnf, [1, 2, 3, node_map[5]]), expected)

    def test_undefined_leaf_is_rejected(self):
        aig = parse_aiger(XOR_SPEC)
        with self.assertRaises(MalformedGraphError):
            tseitin_encode_aig(aig, VarPool(3), {1: 1})


if __name__ == "__main__":
    unittest.main()
