import json
import unittest

import numpy as np
import pytest

from extensions.errors import ConfigError, OutOfDomain
from systems.dual import Dual, exp, sin
from systems.expression import load_plugin_system, parse_expression, plugin_system


DOCUMENT = {
    "name": "toy",
    "states": ["x", "y"],
    "inputs": 1,
    "params": {"k": 2.0},
    "f": ["-x + y^2", "sin(x) - k*y"],
    "g": [["0"], ["1 + x^2"]],
    "h": "0.5*(x^2 + y^2) + x^4",
}


class TestDual(unittest.TestCase):
    def test_product_rule(self):
        x = Dual.variable(2.0, 0, 2)
        y = Dual.variable(3.0, 1, 2)
        value = x * y + x / y
        self.assertAlmostEqual(value.value, 6.0 + 2.0 / 3.0)
        np.testing.assert_allclose(value.grad, [3.0 + 1.0 / 3.0, 2.0 - 2.0 / 9.0])

    def test_functions(self):
        x = Dual.variable(0.5, 0, 1)
        np.testing.assert_allclose(sin(x).grad, [np.cos(0.5)])
        np.testing.assert_allclose(exp(2.0 * x).grad, [2.0 * np.exp(1.0)])
        np.testing.assert_allclose((x**3).grad, [0.75])

    def test_root_of_zero_has_no_derivative(self):
        x = Dual.variable(0.0, 0, 1)
        with self.assertRaises(OutOfDomain):
            x**0.5
        self.assertEqual((Dual.constant(0.0, 1) ** 0.5).value, 0.0)

    def test_negative_power_of_zero(self):
        with self.assertRaises(OutOfDomain):
            Dual.variable(0.0, 0, 1) ** -1.0

    def test_fractional_power_of_negative_base(self):
        with self.assertRaises(OutOfDomain):
            Dual.variable(-8.0, 0, 1) ** (1.0 / 3.0)
        cube = Dual.variable(-2.0, 0, 1) ** 3.0
        self.assertAlmostEqual(cube.value, -8.0)
        np.testing.assert_allclose(cube.grad, [12.0])


class TestPluginSystem(unittest.TestCase):
    def setUp(self):
        self.sys = plugin_system(DOCUMENT)

    def test_dimensions(self):
        self.assertEqual((self.sys.n, self.sys.m), (2, 1))
        self.assertEqual(self.sys.name, "toy")

    def test_values(self):
        x = np.array([0.3, -0.4])
        np.testing.assert_allclose(self.sys.f(x), [-0.3 + 0.16, np.sin(0.3) + 0.8])
        np.testing.assert_allclose(self.sys.g(x), [[0.0], [1.09]])
        self.assertAlmostEqual(self.sys.h(x), 0.125 + 0.3**4)

    def test_jacobians(self):
        x = np.array([0.3, -0.4])
        np.testing.assert_allclose(self.sys.Df(x), [[-1.0, -0.8], [np.cos(0.3), -2.0]])
        Dg = self.sys.Dg(x)
        self.assertEqual(Dg.shape, (1, 2, 2))
        np.testing.assert_allclose(Dg[0], [[0.0, 0.0], [0.6, 0.0]])
        np.testing.assert_allclose(self.sys.Dh(x), [0.3 + 4.0 * 0.3**3, -0.4])

    def test_hessian_at_origin(self):
        np.testing.assert_allclose(self.sys.D2h0, np.eye(2), atol=1e-8)

    def test_precedence(self):
        node = parse_expression("-x^2 + 2*3", "f[0]", {"x"})
        self.assertAlmostEqual(node.evaluate({"x": 3.0}), -3.0)

    def test_signed_exponent(self):
        node = parse_expression("x^-1 + 2^ -x^2", "f[0]", {"x"})
        self.assertAlmostEqual(node.evaluate({"x": 2.0}), 0.5 + 2.0**-4)

    def test_signed_exponent_jacobian(self):
        sys = plugin_system(dict(DOCUMENT, f=["x^-2", "y"]))
        np.testing.assert_allclose(sys.Df(np.array([0.5, 1.0])), [[-16.0, 0.0], [0.0, 1.0]])

    def test_fractional_power_of_negative_value(self):
        node = parse_expression("x^0.5", "f[0]", {"x"})
        with self.assertRaises(OutOfDomain):
            node.evaluate({"x": -4.0})

    def test_syntax_error(self):
        with self.assertRaises(ConfigError) as context:
            plugin_system(dict(DOCUMENT, f=["-x +", "y"]))
        self.assertEqual(context.exception.field, "f[0]")

    def test_unknown_name(self):
        with self.assertRaises(ConfigError):
            plugin_system(dict(DOCUMENT, f=["-x + z", "y"]))

    def test_unknown_function(self):
        with self.assertRaises(ConfigError):
            plugin_system(dict(DOCUMENT, f=["cosh(x)", "y"]))

    def test_wrong_component_count(self):
        with self.assertRaises(ConfigError):
            plugin_system(dict(DOCUMENT, f=["x"]))


def test_load_plugin_system(tmp_path):
    path = tmp_path / "toy.json"
    path.write_text(json.dumps(DOCUMENT))
    sys = load_plugin_system(path)
    assert sys.n == 2
    assert sys.f(np.zeros(2)) == pytest.approx([0.0, 0.0])


def test_missing_plugin(tmp_path):
    with pytest.raises(ConfigError):
        load_plugin_system(tmp_path / "missing.json")
