import unittest

import networkx as nx

from modules.benchmarks.generator import gen_benchmark
from modules.circuits.aiger import parse_aiger
from modules.circuits.circuit import build_implementation
from modules.circuits.safety_spec import spec_from_aig
from modules.circuits.verify import check_strategy, verify_implementation
from modules.core.errors import ExternalInterpolatorError, StrategyConflictError
from modules.core.options import SynthOptions
from modules.logic.cnf import Cnf, VarPool
from modules.solvers.sat_oracle import implies, is_satisfiable
from modules.synthesis.extract_interp import (
    DepContext,
    aux_supports,
    build_m1_m0,
    int_learn,
    post_minimize,
    sy_int,
)
from modules.synthesis.game import compute_winning_region, negated_next_region
from modules.synthesis.result import OutputStats
from tests.oracles import (
    DELAY_SPEC,
    LATCHED_BAD_SPEC,
    TWO_OUTPUT_SPEC,
    XOR_SPEC,
    explicit_winning_states,
    implementation_is_winning,
)


def solve(aig, method="sl", **kwargs):
    options = SynthOptions(method=method, self_check=True, **kwargs)
    spec = spec_from_aig(aig)
    region = compute_winning_region(spec, options)
    return spec, region, sy_int(spec, region, options)


class TestIntLearn(unittest.TestCase):
    def test_interpolant_contract(self):
        # M1: x1 & x2 & p, M0: -x1 & q over shared {x1, x2}
        m1 = Cnf([[1], [2], [3]])
        m0 = Cnf([[-1], [4]])
        stats = OutputStats()
        f = int_learn(m1, m0, [1, 2], stats=stats)
        self.assertTrue(f.variables() <= {1, 2})
        self.assertTrue(implies(m1, f))
        self.assertFalse(is_satisfiable(f.conjoin(m0)))
        self.assertGreater(stats.iterations, 0)

    def test_empty_must_be_false_set(self):
        f = int_learn(Cnf([[1]]), Cnf.false(), [1])
        self.assertTrue(f.is_true)

    def test_empty_must_be_true_set(self):
        f = int_learn(Cnf.false(), Cnf([[1, 2]]), [1, 2])
        self.assertTrue(f.is_false)

    def test_overlapping_sets_conflict(self):
        with self.assertRaises(StrategyConflictError):
            int_learn(Cnf([[1, 2]]), Cnf([[1]]), [1, 2])


class TestDepContext(unittest.TestCase):
    def test_outputs_reading_v_stay_private(self):
        graph = nx.DiGraph()
        graph.add_nodes_from([5, 6, 7, 8])
        # f_5 reads f_6, which reads 7
        graph.add_edges_from([(5, 6), (6, 7)])
        ctx = DepContext(d=[1, 2], dep_graph=graph)
        ctx.admit_outputs([5, 6, 8], 7)
        self.assertEqual(ctx.d, [1, 2, 8])

    def test_auxiliaries_need_a_shared_cone(self):
        ctx = DepContext(d=[1, 2], dep_graph=nx.DiGraph())
        ctx.admit_auxiliaries({10: frozenset({1}), 11: frozenset({1, 3}), 12: frozenset()})
        self.assertEqual(ctx.shared_aux, {10, 12})
        self.assertEqual(ctx.d, [1, 2, 10, 12])


class TestBuildM1M0(unittest.TestCase):
    def test_copies_share_only_d(self):
        spec = spec_from_aig(parse_aiger(TWO_OUTPUT_SPEC))
        region = compute_winning_region(spec)
        pool = VarPool(spec.pool.next_free)
        not_w_next = negated_next_region(spec, region.w, "aux", pool)
        v = spec.controllable_vars[0]
        d = spec.state_vars + spec.uncontrollable_vars + spec.controllable_vars[1:]
        ctx = DepContext(d=d, dep_graph=nx.DiGraph())
        m1, m0 = build_m1_m0(spec, region, v, ctx, pool, not_w_next)
        shared = m1.variables() & m0.variables()
        self.assertTrue(shared <= set(d))
        self.assertNotIn(v, m1.variables() | m0.variables())
        self.assertTrue(ctx.r.isdisjoint(d))
        self.assertFalse(is_satisfiable(m1.conjoin(m0)))
        f = int_learn(m1, m0, d, SynthOptions(self_check=True))
        self.assertTrue(f.variables() <= set(d))


class TestSyInt(unittest.TestCase):
    def test_small_specs_are_winning(self):
        for method in ("sl", "sln"):
            for text in (XOR_SPEC, DELAY_SPEC, LATCHED_BAD_SPEC, TWO_OUTPUT_SPEC):
                spec, region, result = solve(parse_aiger(text), method)
                self.assertTrue(check_strategy(spec, region.w, result.circuits))
                impl = build_implementation(spec, result.circuits, result.dep_graph, result.shared_aux)
                self.assertTrue(implementation_is_winning(spec, impl, explicit_winning_states(spec)), (method, text))

    def test_dependency_graph_is_acyclic(self):
        for kind, bits in (("add", 3), ("mult", 2)):
            _, _, result = solve(gen_benchmark(kind, bits))
            self.assertTrue(nx.is_directed_acyclic_graph(result.dep_graph))

    def test_without_dependency_optimization_outputs_read_later_outputs_only(self):
        spec, _, result = solve(gen_benchmark("add", 3), "sln")
        outputs = spec.controllable_vars
        allowed_base = set(spec.state_vars + spec.uncontrollable_vars)
        self.assertEqual(result.shared_aux, set())
        for index, (v, f) in enumerate(result.circuits):
            self.assertTrue(f.variables() <= allowed_base | set(outputs[index + 1:]))

    def test_shared_aux_are_transition_gates(self):
        spec, _, result = solve(gen_benchmark("add", 3))
        self.assertTrue(result.shared_aux <= set(spec.gate_defs))
        supports = aux_supports(spec)
        for aux in result.shared_aux:
            self.assertTrue(supports[aux] <= set(spec.leaf_vars))

    def test_adder_circuit_verifies(self):
        spec, region, result = solve(gen_benchmark("add", 4))
        impl = build_implementation(spec, result.circuits, result.dep_graph, result.shared_aux)
        verdict = verify_implementation(spec, impl, region.w, simulation_runs=500, simulation_steps=20)
        self.assertTrue(verdict, verdict.message)

    def test_multiplier_circuit_verifies(self):
        spec, region, result = solve(gen_benchmark("mult", 2))
        impl = build_implementation(spec, result.circuits, result.dep_graph, result.shared_aux)
        self.assertTrue(verify_implementation(spec, impl, region.w))

    def test_external_interpolator_is_not_configured(self):
        spec = spec_from_aig(parse_aiger(XOR_SPEC))
        options = SynthOptions(method="si")
        region = compute_winning_region(spec, options)
        with self.assertRaises(ExternalInterpolatorError):
            sy_int(spec, region, options)

    def test_custom_interpolator_hook(self):
        spec = spec_from_aig(parse_aiger(XOR_SPEC))
        options = SynthOptions(method="si")
        region = compute_winning_region(spec, options)
        result = sy_int(spec, region, options, interp=int_learn)
        self.assertTrue(check_strategy(spec, region.w, result.circuits))


class TestPostMinimize(unittest.TestCase):
    def test_minimization_never_grows_and_stays_winning(self):
        spec, region, plain = solve(gen_benchmark("add", 3), post_minimize=False)
        minimized = post_minimize(plain.circuits, spec, region)
        self.assertTrue(check_strategy(spec, region.w, minimized))
        for (v, before), (u, after) in zip(plain.circuits, minimized):
            self.assertEqual(v, u)
            self.assertLessEqual(len(after), len(before))
            self.assertLessEqual(after.literal_count, before.literal_count)
            self.assertTrue(after.variables() <= before.variables())

    def test_redundant_clauses_are_removed(self):
        spec = spec_from_aig(parse_aiger(XOR_SPEC))
        region = compute_winning_region(spec)
        c, i = spec.controllable_vars[0], spec.uncontrollable_vars[0]
        err = spec.state_vars[-1]
        # c = i, padded with a clause implied by the first and a useless literal
        f = Cnf([[i, -err], [i, err]])
        self.assertTrue(check_strategy(spec, region.w, [(c, f)]))
        [(_, g)] = post_minimize([(c, f)], spec, region)
        self.assertEqual(g.clauses, [(i,)])


if __name__ == "__main__":
    unittest.main()
