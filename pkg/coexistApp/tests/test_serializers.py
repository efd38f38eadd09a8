import tempfile
from pathlib import Path

from django.conf import settings
from django.test import SimpleTestCase

from coexistApp.choices import CellModel
from coexistApp.exceptions import ConfigError
from coexistApp.experiments import format_cell, load_config, write_config, write_csv
from coexistApp.serializers import (
    DeploymentSerializer,
    MonteCarloSerializer,
    RocSerializer,
    SearchSerializer,
    SweepSerializer,
)


def defaults(block, **changes):
    return {**settings.COEXIST[block], **changes}


class DeploymentSerializerTests(SimpleTestCase):
    def test_defaults_are_valid(self):
        serializer = DeploymentSerializer(data=defaults("deployment"))
        self.assertTrue(serializer.is_valid(), serializer.errors)
        dep = serializer.save()
        self.assertEqual(dep.r_exc, 5000.0)
        self.assertEqual(dep.bs_array.m, 100)

    def test_blank_pl_ref_means_uma_intercept(self):
        serializer = DeploymentSerializer(data=defaults("deployment", pl_ref=""))
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertIsNone(serializer.validated_data["pl_ref"])
        self.assertIsNone(serializer.save().pl_ref)

    def test_missing_field_is_reported(self):
        data = defaults("deployment")
        del data["r_exc"]
        serializer = DeploymentSerializer(data=data)
        self.assertFalse(serializer.is_valid())
        self.assertIn("r_exc", serializer.errors)

    def test_unknown_field_is_reported(self):
        serializer = DeploymentSerializer(data=defaults("deployment", bogus="1"))
        self.assertFalse(serializer.is_valid())
        self.assertIn("bogus", serializer.errors)

    def test_record_errors_become_non_field_errors(self):
        serializer = DeploymentSerializer(data=defaults("deployment", lambda_bs="0"))
        self.assertFalse(serializer.is_valid())
        self.assertIn("non_field_errors", serializer.errors)


class BlockSerializerTests(SimpleTestCase):
    def test_monte_carlo_parses_bool_and_choice(self):
        serializer = MonteCarloSerializer(data=defaults("mc", exact_geometry="false", cell_model="CBC"))
        self.assertTrue(serializer.is_valid(), serializer.errors)
        mc = serializer.save()
        self.assertFalse(mc.exact_geometry)
        self.assertEqual(mc.cell_model, CellModel.CBC)

    def test_monte_carlo_rejects_unknown_cell_model(self):
        serializer = MonteCarloSerializer(data=defaults("mc", cell_model="HEX"))
        self.assertFalse(serializer.is_valid())
        self.assertIn("cell_model", serializer.errors)

    def test_sweep_parses_comma_separated_values(self):
        serializer = SweepSerializer(data={"parameter": "lambda_bs", "values": "0.01, 0.1 ,1"})
        self.assertTrue(serializer.is_valid(), serializer.errors)
        self.assertEqual(serializer.save().values, (0.01, 0.1, 1.0))

    def test_sweep_rejects_unknown_parameter(self):
        serializer = SweepSerializer(data={"parameter": "seed", "values": "1"})
        self.assertFalse(serializer.is_valid())
        self.assertIn("parameter", serializer.errors)

    def test_roc_needs_positive_minimum(self):
        serializer = RocSerializer(data=defaults("roc", p_th_min="0"))
        self.assertFalse(serializer.is_valid())
        self.assertIn("p_th_min", serializer.errors)

    def test_search_grid(self):
        serializer = SearchSerializer(data=defaults("search"))
        self.assertTrue(serializer.is_valid(), serializer.errors)
        grid = serializer.save()
        self.assertEqual(grid.candidates.size, 71)
        self.assertEqual(grid.candidates[-1], 35000.0)
        self.assertEqual(len(grid.targets()), 9)

    def test_search_rejects_zero_step(self):
        serializer = SearchSerializer(data=defaults("search", step="0"))
        self.assertFalse(serializer.is_valid())
        self.assertIn("step", serializer.errors)


class LoadConfigTests(SimpleTestCase):
    def setUp(self):
        tmp = tempfile.TemporaryDirectory()
        self.addCleanup(tmp.cleanup)
        self.tmp = Path(tmp.name)

    def write_ini(self, text):
        path = self.tmp / "experiment.ini"
        path.write_text(text, encoding="utf-8")
        return path

    def test_defaults_resolve(self):
        config = load_config()
        self.assertEqual(len(config.grid), 4)
        self.assertEqual([p.deployment.r_exc for p in config.grid], [5000.0, 10000.0, 20000.0, 40000.0])
        self.assertEqual(config.detection.n_samples, 10)

    def test_overrides_win(self):
        config = load_config(overrides=["mc.trials=10", "mc.seed = 3"])
        self.assertEqual(config.mc.trials, 10)
        self.assertEqual(config.mc.seed, 3)
        self.assertEqual(config.blocks["mc"]["trials"], "10")

    def test_sweep_over_detection_parameter(self):
        config = load_config(overrides=["sweep.parameter=n_samples", "sweep.values=10,100"])
        self.assertEqual([p.detection.n_samples for p in config.grid], [10, 100])
        self.assertEqual(config.grid[0].deployment, config.deployment)

    def test_sweep_over_integer_deployment_parameter(self):
        config = load_config(overrides=["sweep.parameter=k_users", "sweep.values=1,2"])
        self.assertEqual([p.deployment.k_users for p in config.grid], [1, 2])

    def test_bad_override_syntax(self):
        with self.assertRaises(ConfigError) as cm:
            load_config(overrides=["mc.trials"])
        self.assertIn("mc.trials", cm.exception.diagnostics[0])

    def test_file_section_replaces_block(self):
        path = self.write_ini("[deployment]\nlambda_bs = 0.01\n")
        with self.assertRaises(ConfigError) as cm:
            load_config(path)
        self.assertIn("deployment.r_exc: This field is required.", cm.exception.diagnostics)

    def test_syntax_error_names_line(self):
        path = self.write_ini("r_exc = 5000\n")
        with self.assertRaises(ConfigError) as cm:
            load_config(path)
        self.assertIn("line 1", str(cm.exception))

    def test_unknown_section(self):
        path = self.write_ini("[radar]\nx = 1\n")
        with self.assertRaises(ConfigError) as cm:
            load_config(path)
        self.assertIn("[radar]", str(cm.exception))

    def test_written_config_reloads(self):
        config = load_config(overrides=["deployment.r_exc=7000", "sweep.values=7000"])
        path = write_config(config, self.tmp / "config.ini")
        again = load_config(path)
        self.assertEqual(again.deployment, config.deployment)
        self.assertEqual(again.sweep, config.sweep)


class CsvTests(SimpleTestCase):
    def test_format_cell(self):
        self.assertEqual(format_cell(None), "")
        self.assertEqual(format_cell(True), "true")
        self.assertEqual(format_cell(7), "7")
        self.assertEqual(format_cell(1.0 / 3.0), "0.333333333333")
        self.assertEqual(format_cell(float("inf")), "inf")
        self.assertEqual(format_cell("infeasible"), "infeasible")

    def test_write_csv_uses_lf(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_csv(Path(tmp) / "nested" / "out.csv", ["a", "b", "c"], [[2.0 / 3.0, False, None]])
            self.assertEqual(path.read_bytes(), b"a,b,c\n0.666666666667,false,\n")
