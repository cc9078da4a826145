import io
import math
import os
import tempfile
from unittest import mock

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase
from rest_framework.exceptions import ValidationError

from common import consts as common_consts
from common.exceptions import NumericError, ParameterError
from decoding.services import ChannelService
from gentle.entities import GentleGap
from lab.models import ResultRecord
from lab.services import FileService, GridService, RecordService, SweepService
from linalg.utils import encode_matrix

PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


class WorkspaceMixin:
    def setUp(self):
        super().setUp()
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.dir = tmp.name

    def path(self, name: str) -> str:
        return os.path.join(self.dir, name)

    def write(self, name: str, data) -> str:
        path = self.path(name)
        FileService.write(path, data)
        return path

    def state_file(self, name: str, rho) -> str:
        return self.write(name, {"state": encode_matrix(rho)})

    def povm_file(self, name: str, *elements) -> str:
        return self.write(name, {"elements": [encode_matrix(e) for e in elements]})

    def channel_file(self, name: str, channel, prior) -> str:
        path = self.path(name)
        FileService.save_channel(path, channel, prior)
        return path

    def raw_channel(self, probs, states):
        return {
            "dim_b": 2,
            "inputs": [
                {"symbol": str(i), "prob": p, "state": encode_matrix(s)} for i, (p, s) in enumerate(zip(probs, states))
            ],
        }


class FileServiceTests(WorkspaceMixin, SimpleTestCase):
    def test_channel_round_trip(self):
        channel = ChannelService.two_pure_states(0.5)
        loaded, prior = FileService.load_channel(self.channel_file("ch.json", channel, [0.25, 0.75]))
        self.assertEqual(loaded.symbols, ("0", "1"))
        self.assertTrue(np.allclose(prior, [0.25, 0.75]))
        for x in channel.symbols:
            self.assertTrue(np.allclose(loaded.output(x), channel.output(x), atol=1e-12))

    def test_prior_tolerance(self):
        states = [np.diag([1.0, 0.0]), np.diag([0.0, 1.0])]
        _, prior = FileService.load_channel(self.write("ok.json", self.raw_channel([0.5, 0.4999999995], states)))
        self.assertAlmostEqual(math.fsum(prior), 1.0, places=15)

        with self.assertRaises(ValidationError) as ctx:
            FileService.load_channel(self.write("bad.json", self.raw_channel([0.5, 0.4], states)))
        self.assertIn("prior sum", str(ctx.exception.detail))

    def test_invalid_state_names_symbol(self):
        data = self.raw_channel([0.5, 0.5], [np.diag([1.0, 0.0]), np.diag([1.5, -0.5])])
        with self.assertRaises(ValidationError) as ctx:
            FileService.load_channel(self.write("neg.json", data))
        self.assertIn("'1'", str(ctx.exception.detail))

    def test_malformed_matrix(self):
        with self.assertRaises(ValidationError):
            FileService.load_state(self.write("s.json", {"state": [[[1, 0], [0, 0]]]}))
        with self.assertRaises(ValidationError):
            FileService.load_state(self.write("s2.json", {"state": [[[1, 0], [0]], [[0, 0], [0, 0]]]}))

    def test_subnormalized_state(self):
        path = self.state_file("half.json", np.diag([0.5, 0.0]))
        with self.assertRaises(ValidationError):
            FileService.load_state(path)
        self.assertAlmostEqual(float(np.real(np.trace(FileService.load_state(path, subnormalized=True)))), 0.5)

    def test_codebook_symbols(self):
        channel = ChannelService.noiseless_bits()
        self.assertEqual(FileService.load_codebook(self.write("cb.json", {"codewords": ["1", "0"]}), channel).codewords, ("1", "0"))
        with self.assertRaises(ValidationError):
            FileService.load_codebook(self.write("cb2.json", {"codewords": ["2"]}), channel)

    def test_codebook_round_trip(self):
        channel = ChannelService.tensor_power(ChannelService.noiseless_bits(), 2)
        codebook = ChannelService.codebook(["01", "11", "01"], channel)
        path = self.path("cb.json")
        FileService.save_codebook(path, codebook)
        self.assertEqual(FileService.load_codebook(path, channel), codebook)

    def test_result_record_round_trip(self):
        record = RecordService.build(
            command="hypotest",
            parameters={"rho": "rho.json", "eps": 0.1, "dual_check": True},
            outputs={"beta": 0.123456789012345, "threshold": math.inf, "q": [[[1.0, 0.0], [0.0, -0.5]]]},
            seed=2 ** 64 - 1,
            wall_time_ms=12.5,
        )
        path = self.write("record.json", record)
        self.assertEqual(RecordService.render(FileService.load_result(path)), RecordService.render(record))


class GridServiceTests(SimpleTestCase):
    def test_range_grid_is_inclusive(self):
        self.assertTrue(np.allclose(GridService.eps_prime_grid("0:0.02:0.01"), [0.0, 0.01, 0.02]))
        self.assertEqual(GridService.eps_prime_grid("0.01, 0.03"), [0.01, 0.03])

    def test_bad_grids(self):
        for spec in ("0.1:0:0.01", "0:1:0", "a,b", "", "0:1"):
            with self.assertRaises(ParameterError):
                GridService.eps_prime_grid(spec)

    def test_prior_grids(self):
        self.assertTrue(np.allclose(GridService.prior_grid("uniform", 4)[0], [0.25] * 4))
        simplex = GridService.prior_grid("simplex:2", 2)
        self.assertEqual([list(p) for p in simplex], [[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]])
        self.assertEqual(len(GridService.prior_grid("simplex:4", 3)), 15)
        self.assertEqual(len(GridService.prior_grid("0.2,0.8;0.5,0.5", 2)), 2)
        with self.assertRaises(ParameterError):
            GridService.prior_grid("0.2,0.3,0.5", 2)
        with self.assertRaises(ParameterError):
            GridService.prior_grid("simplex:x", 2)


class SweepServiceTests(SimpleTestCase):
    def test_instances_are_reproducible(self):
        a = SweepService.run_instances("povm-union", dim=3, seq_len=3, seed=11, start=0, stop=10)
        b = SweepService.run_instances("povm-union", dim=3, seq_len=3, seed=11, start=5, stop=10)
        self.assertEqual(a[5:], b)

    def test_summary(self):
        rows = [{"index": i, "slack": s} for i, s in enumerate([0.3, -0.1, 0.2, -1e-12])]
        summary = SweepService.summarize(rows)
        self.assertEqual(summary["worst_index"], 1)
        self.assertEqual(summary["violations"], 1)
        self.assertEqual(summary["violating_indices"], [1])

    def test_povm_union_is_checked_against_dilation(self):
        rows = SweepService.run_instances("povm-union", dim=2, seq_len=3, seed=4, start=0, stop=20)
        self.assertLess(SweepService.summarize(rows)["max_dilation_diff"], 1e-9)
        self.assertEqual(rows, SweepService.run_instances("lemma31", dim=2, seq_len=3, seed=4, start=0, stop=20))

        longer = SweepService.run_instances("povm-union", dim=2, seq_len=4, seed=4, start=0, stop=3)
        self.assertNotIn("max_dilation_diff", SweepService.summarize(longer))

    def test_unknown_suite(self):
        with self.assertRaises(ParameterError):
            SweepService.instance("nope", dim=2, seq_len=1, seed=0, index=0)


class CommandTests(WorkspaceMixin, TestCase):
    def run_command(self, name, **options) -> dict:
        out = self.path(f"{name}.json")
        call_command(name, out=out, stdout=io.StringIO(), **options)
        return FileService.read(out)

    def assertExitCode(self, code, name, **options):
        with self.assertRaises(CommandError) as ctx:
            call_command(name, stdout=io.StringIO(), **options)
        self.assertEqual(ctx.exception.returncode, code)
        return ctx.exception

    def test_hypotest(self):
        rho = self.state_file("rho.json", np.diag([1.0, 0.0]))
        sigma = self.state_file("sigma.json", np.eye(2) / 2)
        record = self.run_command("hypotest", rho=rho, sigma=sigma, eps=0.0)
        self.assertEqual(record["command"], "hypotest")
        self.assertEqual(record["seed"], 0)
        self.assertAlmostEqual(record["outputs"]["beta"], 0.5, places=9)
        self.assertAlmostEqual(record["outputs"]["d_h_bits"], 1.0, places=8)

    def test_hypotest_orthogonal_reports_inf(self):
        rho = self.state_file("rho.json", np.diag([1.0, 0.0]))
        sigma = self.state_file("sigma.json", np.diag([0.0, 1.0]))
        outputs = self.run_command("hypotest", rho=rho, sigma=sigma, eps=0.0, dual_check=True)["outputs"]
        self.assertEqual(outputs["d_h_bits"], "inf")
        self.assertEqual(outputs["threshold"], "inf")
        self.assertEqual(outputs["multiplier"], 0.0)

    def test_hypotest_zero_eps_passes_dual_check(self):
        rho = self.state_file("rho.json", np.diag([1.0, 0.0]))
        sigma = self.state_file("sigma.json", 0.5 * np.outer(PLUS, PLUS.conj()) + np.eye(2) / 4)
        outputs = self.run_command("hypotest", rho=rho, sigma=sigma, eps=0.0, dual_check=True)["outputs"]
        self.assertAlmostEqual(outputs["beta"], 0.5, places=12)
        self.assertEqual(outputs["multiplier"], "inf")
        self.assertLess(abs(outputs["duality_gap"]), 1e-12)

    def test_hypotest_rejects_infeasible_null(self):
        rho = self.state_file("half.json", np.diag([0.5, 0.0]))
        sigma = self.state_file("sigma.json", np.eye(2) / 2)
        self.assertExitCode(common_consts.ExitCode.VALIDATION, "hypotest", rho=rho, sigma=sigma, eps=0.1)

    def test_dilate(self):
        povm = self.povm_file("povm.json", np.diag([0.3, 0.7]))
        outputs = self.run_command("dilate", povm=povm, binary=True)["outputs"]
        self.assertEqual((outputs["system_dim"], outputs["probe_dim"]), (2, 2))
        self.assertEqual(len(outputs["unitary"]), 4)

        trine = []
        for k in range(3):
            phi = np.array([np.cos(2 * np.pi * k / 3), np.sin(2 * np.pi * k / 3)])
            trine.append(2 / 3 * np.outer(phi, phi))
        outputs = self.run_command("dilate", povm=self.povm_file("trine.json", *trine))["outputs"]
        self.assertEqual(outputs["probe_dim"], 3)

    def test_decode(self):
        channel = self.channel_file("ch.json", ChannelService.two_pure_states(0.5), [0.5, 0.5])
        codebook = self.write("cb.json", {"codewords": ["0", "1", "0"]})
        exact = self.run_command("decode", channel=channel, codebook=codebook, eps_prime=0.05)["outputs"]
        dilated = self.run_command("decode", channel=channel, codebook=codebook, eps_prime=0.05, mode="dilated")["outputs"]
        self.assertEqual(len(exact["per_message_success"]), 3)
        self.assertTrue(np.allclose(exact["per_message_success"], dilated["per_message_success"], atol=1e-9))
        self.assertLessEqual(exact["average_error"], exact["bound_value"] + 1e-8)

    def test_decode_unknown_codeword(self):
        channel = self.channel_file("ch.json", ChannelService.noiseless_bits(), [0.5, 0.5])
        codebook = self.write("cb.json", {"codewords": ["7"]})
        self.assertExitCode(common_consts.ExitCode.VALIDATION, "decode", channel=channel, codebook=codebook, eps_prime=0.01)

    def test_bounds_check(self):
        record = self.run_command("bounds_check", suite="sen", instances=30, seed=5)
        self.assertEqual(record["command"], "bounds-check")
        self.assertEqual(record["outputs"]["instances"], 30)
        self.assertEqual(record["outputs"]["violations"], 0)
        self.assertGreaterEqual(record["outputs"]["min_slack"], -1e-8)

    def test_bounds_check_hyphenated_name_and_suite_alias(self):
        record = self.run_command("bounds-check", suite="lemma31", instances=40, seed=7)
        self.assertEqual(record["command"], "bounds-check")
        self.assertEqual(record["parameters"]["suite"], "povm-union")
        self.assertEqual(record["outputs"]["violations"], 0)
        self.assertLess(record["outputs"]["max_dilation_diff"], 1e-9)

    def test_bounds_check_parallel_matches_serial(self):
        serial = self.run_command("bounds_check", suite="polar", instances=250, seed=3)
        parallel = self.run_command("bounds_check", suite="polar", instances=250, seed=3, parallel=True)
        self.assertEqual(serial["outputs"], parallel["outputs"])

    def test_records_identical_up_to_wall_time(self):
        first = self.run_command("bounds_check", suite="gentle", instances=20, seed=9)
        second = self.run_command("bounds_check", suite="gentle", instances=20, seed=9)
        first.pop("wall_time_ms")
        second.pop("wall_time_ms")
        self.assertEqual(first, second)

    def test_strict_requires_seed(self):
        self.assertExitCode(common_consts.ExitCode.VALIDATION, "bounds_check", suite="sen", instances=2, strict=True)
        self.run_command("bounds_check", suite="sen", instances=2, strict=True, seed=1)

    def test_save_stores_record(self):
        call_command("bounds_check", suite="sen", instances=5, seed=2, save=True, stdout=io.StringIO())
        record = ResultRecord.objects.get()
        self.assertEqual(record.command, "bounds-check")
        self.assertEqual(record.seed, "2")
        self.assertEqual(record.outputs["instances"], 5)

    def test_stdout_record(self):
        stdout = io.StringIO()
        call_command("bounds_check", suite="sen", instances=3, stdout=stdout)
        self.assertIn('"command":"bounds-check"', stdout.getvalue())

    def test_experiment(self):
        channel = self.channel_file("ch.json", ChannelService.two_pure_states(0.5), [0.5, 0.5])
        outputs = self.run_command("experiment", channel=channel, messages=2, eps_prime=0.01, trials=200, seed=4)["outputs"]
        self.assertLessEqual(outputs["empirical_error"], outputs["analytic_bound"])
        self.assertGreaterEqual(outputs["slack"], 0.0)

    def test_prior_within_tolerance_runs(self):
        base = ChannelService.two_pure_states(0.5)
        channel = self.write("near.json", self.raw_channel([0.5, 0.4999999995], [base.output("0"), base.output("1")]))
        outputs = self.run_command("experiment", channel=channel, messages=2, eps_prime=0.01, trials=200, seed=4)["outputs"]
        self.assertLessEqual(outputs["empirical_error"], outputs["analytic_bound"])

        codebook = self.write("cb.json", {"codewords": ["0", "1"]})
        decoded = self.run_command("decode", channel=channel, codebook=codebook, eps_prime=0.05)["outputs"]
        self.assertLessEqual(decoded["average_error"], decoded["bound_value"] + 1e-8)

    def test_experiment_parallel_matches_serial(self):
        channel = self.channel_file("ch.json", ChannelService.two_pure_states(0.3), [0.4, 0.6])
        options = {"channel": channel, "messages": 3, "eps_prime": 0.02, "trials": 230, "seed": 8}
        self.assertEqual(
            self.run_command("experiment", **options)["outputs"],
            self.run_command("experiment", parallel=True, **options)["outputs"],
        )

    def test_capacity(self):
        channel = self.channel_file("ch.json", ChannelService.noiseless_bits(), [0.5, 0.5])
        outputs = self.run_command("capacity", channel=channel, eps=0.4, eps_prime_grid="0.01,0.02")["outputs"]
        expected = max(-math.log2((1 - e) / 2) + math.log2(0.04 - e) for e in (0.01, 0.02))
        self.assertAlmostEqual(outputs["bits"], expected, places=6)
        self.assertEqual(outputs["argmax_prior"], [0.5, 0.5])

    def test_capacity_infeasible_grid(self):
        channel = self.channel_file("ch.json", ChannelService.noiseless_bits(), [0.5, 0.5])
        self.assertExitCode(common_consts.ExitCode.VALIDATION, "capacity", channel=channel, eps=0.2, eps_prime_grid="0:0.02:0.01")

    def test_gentle(self):
        rho = self.state_file("rho.json", np.outer(PLUS, PLUS.conj()))
        ops = self.povm_file("ops.json", np.diag([1.0, 0.0]))
        outputs = self.run_command("gentle", rho=rho, ops=ops)["outputs"]
        self.assertAlmostEqual(outputs["disturbance"], math.sqrt(5) / 2, places=9)
        self.assertAlmostEqual(outputs["bound"], math.sqrt(2), places=12)

        outputs = self.run_command("gentle", rho=rho, ops=ops, scheme="forward-backward")["outputs"]
        self.assertEqual(outputs["scheme"], "forward_backward")
        self.assertGreaterEqual(outputs["success_slack"], 0.0)

    def test_violation_is_written_then_exits_three(self):
        rho = self.state_file("rho.json", np.outer(PLUS, PLUS.conj()))
        ops = self.povm_file("ops.json", np.diag([1.0, 0.0]))
        out = self.path("violation.json")
        with mock.patch("lab.management.commands.gentle.GentleService.gentle_gap", return_value=GentleGap(1.0, 0.5)):
            self.assertExitCode(common_consts.ExitCode.BOUND_VIOLATION, "gentle", rho=rho, ops=ops, out=out)
        self.assertEqual(FileService.read(out)["outputs"]["disturbance"], 1.0)

    def test_validation_errors_exit_two(self):
        rho = self.state_file("rho.json", np.diag([1.0, 0.0]))
        bad_channel = self.write("bad.json", self.raw_channel([0.5, 0.4], [np.diag([1.0, 0.0])] * 2))
        exc = self.assertExitCode(common_consts.ExitCode.VALIDATION, "experiment", channel=bad_channel, messages=1, eps_prime=0.01)
        self.assertIn("prior sum", str(exc))
        self.assertExitCode(common_consts.ExitCode.VALIDATION, "hypotest", rho=rho, sigma=self.path("missing.json"), eps=0.1)
        self.assertExitCode(common_consts.ExitCode.VALIDATION, "hypotest", rho=rho, sigma=rho, eps=1.5)

    def test_internal_error_exits_one(self):
        rho = self.state_file("rho.json", np.diag([1.0, 0.0]))
        with mock.patch("lab.management.commands.gentle.FileService.load_povm", side_effect=RuntimeError("boom")):
            self.assertExitCode(common_consts.ExitCode.INTERNAL, "gentle", rho=rho, ops=rho)

    def test_numeric_failure_exits_one(self):
        rho = self.state_file("rho.json", np.diag([1.0, 0.0]))
        with mock.patch(
            "lab.management.commands.hypotest.HypothesisTestService.neyman_pearson",
            side_effect=NumericError("Bisection did not converge.", iterations=200),
        ):
            self.assertExitCode(common_consts.ExitCode.INTERNAL, "hypotest", rho=rho, sigma=rho, eps=0.1)
