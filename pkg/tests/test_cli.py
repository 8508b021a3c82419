import io
import os
import tempfile
import unittest
from contextlib import redirect_stdout

from main import main, parse_arguments
from modules.circuits.aiger import load_aiger, parse_aiger
from modules.core.stats import STATS_COLUMNS, SynthStats, append_stats, read_stats
from modules.core.synth_job import EXIT_ERROR, EXIT_REALIZABLE, EXIT_TIMEOUT, EXIT_UNREALIZABLE
from tests.oracles import UNREALIZABLE_SPEC, XOR_SPEC


class CliTestCase(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def write(self, name, text):
        with open(self.path(name), "w") as f:
            f.write(text)
        return self.path(name)


class TestArguments(CliTestCase):
    def test_gen_arguments(self):
        args = parse_arguments(["gen", "--kind", "mult", "--bits", "3"])
        self.assertEqual((args.command, args.kind, args.bits), ("gen", "mult", 3))

    def test_synth_arguments(self):
        args = parse_arguments(["spec.aag", "--method", "ql", "--negw", "learn", "--timeout", "2.5"])
        self.assertEqual(args.command, "synth")
        self.assertEqual((args.method, args.negw, args.timeout), ("ql", "learn", 2.5))
        self.assertFalse(args.verify)

    def test_invalid_choices_exit(self):
        with self.assertRaises(SystemExit):
            parse_arguments(["spec.aag", "--method", "bdd"])
        with self.assertRaises(SystemExit):
            parse_arguments(["gen", "--kind", "div", "--bits", "2"])


class TestGenCommand(CliTestCase):
    def test_writes_benchmark(self):
        code = main(["gen", "--kind", "add", "--bits", "3", "-o", self.path("add3.aag"), "-q"])
        self.assertEqual(code, 0)
        aig = load_aiger(self.path("add3.aag"))
        self.assertEqual(len(aig.inputs), 9)
        self.assertEqual(len(aig.controllable_indices()), 3)

    def test_writes_to_stdout(self):
        out = io.StringIO()
        with redirect_stdout(out):
            code = main(["gen", "--kind", "mult", "--bits", "1", "-q"])
        self.assertEqual(code, 0)
        self.assertTrue(out.getvalue().startswith("aag "))

    def test_invalid_width(self):
        self.assertEqual(main(["gen", "--kind", "add", "--bits", "0", "-q"]), EXIT_ERROR)


class TestSynthCommand(CliTestCase):
    def test_realizable_with_verification_and_stats(self):
        main(["gen", "--kind", "add", "--bits", "2", "-o", self.path("add2.aag"), "-q"])
        stats = self.path("stats.csv")
        code = main([self.path("add2.aag"), "--verify", "--stats", stats, "-o", self.path("impl.aag"), "-q"])
        self.assertEqual(code, EXIT_REALIZABLE)
        impl = load_aiger(self.path("impl.aag"))
        self.assertEqual(impl.controllable_indices(), [])
        self.assertEqual(len(impl.inputs), 4)

        code = main([self.write("unreal.aag", UNREALIZABLE_SPEC), "--stats", stats, "-q"])
        self.assertEqual(code, EXIT_UNREALIZABLE)

        rows = read_stats(stats)
        self.assertEqual(len(rows), 2)
        self.assertEqual(tuple(rows[0]), STATS_COLUMNS)
        self.assertEqual((rows[0]["benchmark"], rows[0]["method"], rows[0]["verified"]), ("add2", "sl", "true"))
        self.assertEqual(len(rows[0]["per_output_iterations"].split()), 2)
        self.assertGreater(int(rows[0]["aig_and_gates"]), 0)
        self.assertEqual((rows[1]["benchmark"], rows[1]["aig_and_gates"], rows[1]["verified"]), ("unreal", "", ""))

    def test_implementation_on_stdout(self):
        out = io.StringIO()
        with redirect_stdout(out):
            code = main([self.write("xor.aag", XOR_SPEC), "--method", "ql", "-q"])
        self.assertEqual(code, EXIT_REALIZABLE)
        impl = parse_aiger(out.getvalue().encode("ascii"))
        self.assertEqual(len(impl.inputs), 1)

    def test_external_interpolator_is_an_error(self):
        self.assertEqual(main([self.write("xor.aag", XOR_SPEC), "--method", "si", "-q"]), EXIT_ERROR)

    def test_malformed_and_missing_specs(self):
        self.assertEqual(main([self.write("bad.aag", "aag 1 1 0 0\n2\n"), "-q"]), EXIT_ERROR)
        self.assertEqual(main([self.path("missing.aag"), "-q"]), EXIT_ERROR)

    def test_timeout(self):
        main(["gen", "--kind", "mult", "--bits", "3", "-o", self.path("mult3.aag"), "-q"])
        stats = self.path("stats.csv")
        code = main([self.path("mult3.aag"), "--timeout", "1e-9", "--stats", stats, "-q"])
        self.assertEqual(code, EXIT_TIMEOUT)
        [row] = read_stats(stats)
        self.assertEqual(row["aig_and_gates"], "")

    def test_bad_configuration(self):
        config = self.write("bad.yaml", "sat: [\n")
        self.assertEqual(main([self.write("xor.aag", XOR_SPEC), "--config", config, "-q"]), EXIT_ERROR)

    def test_configuration_selects_method(self):
        config = self.write("run.yaml", "synthesis:\n  method: sln\n")
        stats = self.path("stats.csv")
        code = main([self.write("xor.aag", XOR_SPEC), "--config", config, "--stats", stats, "-o", self.path("o.aag"), "-q"])
        self.assertEqual(code, EXIT_REALIZABLE)
        self.assertEqual(read_stats(stats)[0]["method"], "sln")


class TestStats(CliTestCase):
    def test_row_format(self):
        row = SynthStats("add4", "sl", 0.12345, 1.0, 1.5, 40, [3, 1, 2], False).to_row()
        self.assertEqual(row["time_winning_region_s"], "0.123")
        self.assertEqual(row["per_output_iterations"], "3 1 2")
        self.assertEqual(row["verified"], "false")

    def test_header_written_once(self):
        path = self.path("nested/stats.csv")
        append_stats(path, SynthStats("a", "ql"))
        append_stats(path, SynthStats("b", "sl"))
        with open(path) as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], ",".join(STATS_COLUMNS))
        self.assertEqual(len(lines), 3)


if __name__ == "__main__":
    unittest.main()
