import unittest

import click
from click.testing import CliRunner

from extensions.errors import BadStructure, ConfigError, NoConvergence, ShootingDiverged
from middleware.error_handler import create_error_middleware


class MockConfig:
    EXIT_OK = 0
    EXIT_CONFIG_ERROR = 2
    EXIT_NUMERICAL_FAILURE = 3


class TestExitCodeMiddleware(unittest.TestCase):
    def setUp(self):
        self.runner = CliRunner(mix_stderr=False)
        self.errors = create_error_middleware(MockConfig())

    def command_raising(self, error):
        @click.command()
        @self.errors.map_errors
        def command():
            if error is not None:
                raise error
            click.echo("Success")

        return command

    def test_success(self):
        result = self.runner.invoke(self.command_raising(None))
        self.assertEqual(result.exit_code, 0)
        self.assertEqual(result.output.strip(), "Success")

    def test_config_error(self):
        result = self.runner.invoke(self.command_raising(ConfigError("bad value", field="T")))
        self.assertEqual(result.exit_code, 2)
        self.assertIn("Configuration error: T: bad value", result.stderr)

    def test_numerical_failure(self):
        result = self.runner.invoke(self.command_raising(NoConvergence("stuck")))
        self.assertEqual(result.exit_code, 3)
        self.assertIn("Numerical failure", result.stderr)

    def test_usage_error_passes_through(self):
        result = self.runner.invoke(self.command_raising(click.UsageError("missing option")))
        self.assertEqual(result.exit_code, 2)

    def test_value_error_is_input_error(self):
        result = self.runner.invoke(self.command_raising(ValueError("Horizons must be positive")))
        self.assertEqual(result.exit_code, 2)
        self.assertIn("Configuration error: Horizons must be positive", result.stderr)

    def test_structure_error_is_input_error(self):
        result = self.runner.invoke(self.command_raising(BadStructure("not a cascade")))
        self.assertEqual(result.exit_code, 2)

    def test_other_exceptions_are_not_mapped(self):
        result = self.runner.invoke(self.command_raising(RuntimeError("boom")))
        self.assertEqual(result.exit_code, 1)
        self.assertIsInstance(result.exception, RuntimeError)

    def test_exit_code_for(self):
        self.assertEqual(self.errors.exit_code_for(ConfigError("x")), 2)
        self.assertEqual(self.errors.exit_code_for(ShootingDiverged("x")), 3)
        self.assertEqual(self.errors.exit_code_for(click.UsageError("x")), 2)
        self.assertEqual(self.errors.exit_code_for(ValueError("x")), 2)
        self.assertEqual(self.errors.exit_code_for(RuntimeError("x")), 0)


if __name__ == "__main__":
    unittest.main()
