import json
import os
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Set, Union

import numpy as np
from pyparsing import (
    Forward,
    ParseException,
    ParserElement,
    Regex,
    Suppress,
    Word,
    alphanums,
    alphas,
    infixNotation,
    oneOf,
    opAssoc,
)

from extensions.errors import ConfigError
from extensions.logger import logger
from systems.control_system import ControlAffineSystem
from systems.dual import FUNCTIONS, Dual, power


ParserElement.enablePackrat()

HESSIAN_STEP = 1e-5


# Expression tree


class Node:
    def evaluate(self, env: Mapping[str, Any]):
        raise NotImplementedError

    def names(self) -> Set[str]:
        return set()


@dataclass(frozen=True)
class Number(Node):
    value: float

    def evaluate(self, env):
        return self.value


@dataclass(frozen=True)
class Variable(Node):
    name: str

    def evaluate(self, env):
        return env[self.name]

    def names(self):
        return {self.name}


@dataclass(frozen=True)
class Call(Node):
    function: str
    argument: Node

    def evaluate(self, env):
        return FUNCTIONS[self.function](_as_dual(self.argument.evaluate(env), env))

    def names(self):
        return self.argument.names()


@dataclass(frozen=True)
class Unary(Node):
    op: str
    operand: Node

    def evaluate(self, env):
        value = self.operand.evaluate(env)
        return -value if self.op == "-" else value

    def names(self):
        return self.operand.names()


@dataclass(frozen=True)
class Binary(Node):
    op: str
    left: Node
    right: Node

    def evaluate(self, env):
        a, b = self.left.evaluate(env), self.right.evaluate(env)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            return a / b
        return power(a, b)

    def names(self):
        return self.left.names() | self.right.names()


def _as_dual(value, env) -> Dual:
    if isinstance(value, Dual):
        return value
    size = env.get("__size__", 0)
    return Dual.constant(value, size)


# Grammar


def _fold_left(tokens):
    items = tokens[0]
    node = items[0]
    for op, operand in zip(items[1::2], items[2::2]):
        node = Binary(op, node, operand)
    return node


def _fold_power(tokens):
    items = tokens[0]
    node = items[-1]
    for op, operand in zip(reversed(items[1:-1:2]), reversed(items[0:-1:2])):
        # "^-" and "^+" carry the sign of the exponent
        sign = op[-1]
        if sign in "+-":
            node = Unary(sign, node)
        node = Binary("^", operand, node)
    return node


def _fold_unary(tokens):
    items = tokens[0]
    node = items[-1]
    for op in reversed(items[:-1]):
        node = Unary(op, node)
    return node


def _build_grammar() -> ParserElement:
    expr = Forward()
    number = Regex(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?").setParseAction(
        lambda t: Number(float(t[0]))
    )
    name = Word(alphas + "_", alphanums + "_")
    call = (name + Suppress("(") + expr + Suppress(")")).setParseAction(
        lambda t: Call(t[0], t[1])
    )
    variable = name.copy().setParseAction(lambda t: Variable(t[0]))
    operand = call | number | variable
    expr <<= infixNotation(
        operand,
        [
            (Regex(r"\^\s*[+-]?"), 2, opAssoc.RIGHT, _fold_power),
            (oneOf("+ -"), 1, opAssoc.RIGHT, _fold_unary),
            (oneOf("* /"), 2, opAssoc.LEFT, _fold_left),
            (oneOf("+ -"), 2, opAssoc.LEFT, _fold_left),
        ],
    )
    return expr


GRAMMAR = _build_grammar()


def _calls(node: Node) -> Set[str]:
    if isinstance(node, Call):
        return {node.function} | _calls(node.argument)
    if isinstance(node, Unary):
        return _calls(node.operand)
    if isinstance(node, Binary):
        return _calls(node.left) | _calls(node.right)
    return set()


def parse_expression(text: str, field: str, known: Set[str]) -> Node:
    """
    Parses one expression string into a tree.

    Raises:
        ConfigError: On syntax errors, unknown functions or unknown names.
    """
    try:
        node = GRAMMAR.parseString(str(text), parseAll=True)[0]
    except ParseException as error:
        raise ConfigError(
            f"cannot parse {text!r} at column {error.col}", field=field
        ) from None
    unknown_calls = _calls(node) - set(FUNCTIONS)
    if unknown_calls:
        raise ConfigError(
            f"unknown function(s): {', '.join(sorted(unknown_calls))}", field=field
        )
    unknown_names = node.names() - known
    if unknown_names:
        raise ConfigError(
            f"unknown name(s): {', '.join(sorted(unknown_names))}", field=field
        )
    return node


# Plugin systems


@dataclass(frozen=True)
class ExpressionModel:
    states: List[str]
    m: int
    params: Dict[str, float]
    f: List[Node]
    g: List[List[Node]]
    h: Node

    @property
    def n(self) -> int:
        return len(self.states)

    def _env(self, x: np.ndarray, differentiate: bool) -> Dict[str, Any]:
        env: Dict[str, Any] = dict(self.params)
        env["__size__"] = self.n
        for index, name in enumerate(self.states):
            env[name] = Dual.variable(x[index], index, self.n) if differentiate else float(x[index])
        return env

    def _eval(self, node: Node, x: np.ndarray, differentiate: bool):
        env = self._env(np.asarray(x, dtype=float), differentiate)
        value = node.evaluate(env)
        if differentiate:
            return _as_dual(value, env)
        return value.value if isinstance(value, Dual) else float(value)

    def f_value(self, x):
        return np.array([self._eval(node, x, False) for node in self.f])

    def f_jacobian(self, x):
        return np.array([self._eval(node, x, True).grad for node in self.f])

    def g_value(self, x):
        return np.array([[self._eval(node, x, False) for node in row] for row in self.g])

    def g_jacobian(self, x):
        jac = np.zeros((self.m, self.n, self.n))
        for i, row in enumerate(self.g):
            for j, node in enumerate(row):
                jac[j, i, :] = self._eval(node, x, True).grad
        return jac

    def h_value(self, x):
        return self._eval(self.h, x, False)

    def h_gradient(self, x):
        return self._eval(self.h, x, True).grad

    def h_hessian_at_origin(self) -> np.ndarray:
        hessian = np.zeros((self.n, self.n))
        for k in range(self.n):
            step = np.zeros(self.n)
            step[k] = HESSIAN_STEP
            hessian[:, k] = (
                self.h_gradient(step) - self.h_gradient(-step)
            ) / (2.0 * HESSIAN_STEP)
        return 0.5 * (hessian + hessian.T)


def _require(document: Mapping[str, Any], key: str, kind, prefix: str):
    if key not in document:
        raise ConfigError("missing required field", field=f"{prefix}{key}")
    value = document[key]
    if not isinstance(value, kind):
        raise ConfigError(
            f"expected {getattr(kind, '__name__', kind)}", field=f"{prefix}{key}"
        )
    return value


def expression_model(document: Mapping[str, Any], prefix: str = "") -> ExpressionModel:
    states = _require(document, "states", list, prefix)
    if not states or not all(isinstance(s, str) for s in states):
        raise ConfigError("states must be a non-empty list of names", field=f"{prefix}states")
    inputs = document.get("inputs", 1)
    m = len(inputs) if isinstance(inputs, list) else inputs
    if not isinstance(m, int) or m < 1:
        raise ConfigError("inputs must be a positive count or a list of names", field=f"{prefix}inputs")
    params = document.get("params", {})
    if not isinstance(params, dict) or not all(
        isinstance(v, (int, float)) for v in params.values()
    ):
        raise ConfigError("params must map names to numbers", field=f"{prefix}params")
    params = {str(k): float(v) for k, v in params.items()}
    overlap = set(states) & set(params)
    if overlap:
        raise ConfigError(
            f"names used as both state and parameter: {', '.join(sorted(overlap))}",
            field=f"{prefix}params",
        )

    known = set(states) | set(params)
    n = len(states)
    f_texts = _require(document, "f", list, prefix)
    if len(f_texts) != n:
        raise ConfigError(f"expected {n} components", field=f"{prefix}f")
    f = [parse_expression(text, f"{prefix}f[{i}]", known) for i, text in enumerate(f_texts)]

    g_rows = _require(document, "g", list, prefix)
    if len(g_rows) != n:
        raise ConfigError(f"expected {n} rows", field=f"{prefix}g")
    g = []
    for i, row in enumerate(g_rows):
        row = row if isinstance(row, list) else [row]
        if len(row) != m:
            raise ConfigError(f"expected {m} columns", field=f"{prefix}g[{i}]")
        g.append(
            [parse_expression(text, f"{prefix}g[{i}][{j}]", known) for j, text in enumerate(row)]
        )

    h = parse_expression(document.get("h", "0"), f"{prefix}h", known)
    return ExpressionModel(states=list(states), m=m, params=params, f=f, g=g, h=h)


def plugin_system(document: Mapping[str, Any], prefix: str = "") -> ControlAffineSystem:
    """
    Builds a control-affine system from expression strings.

    The document holds `states` (names), `inputs` (count or names), `params`
    (name to number), `f` (one expression per state), `g` (n rows of m
    expressions) and `h` (one expression). Jacobians and gradients come from
    dual numbers; the Hessian of h at the origin from central differences of
    the exact gradient.
    """
    model = expression_model(document, prefix)
    name = str(document.get("name", "plugin"))
    logger.info(f"Loaded plugin system {name} with n={model.n}, m={model.m}")
    return ControlAffineSystem(
        n=model.n,
        m=model.m,
        f=model.f_value,
        g=model.g_value,
        h=model.h_value,
        Df=model.f_jacobian,
        Dg=model.g_jacobian,
        Dh=model.h_gradient,
        D2h0=model.h_hessian_at_origin(),
        name=name,
        params=dict(model.params),
    )


def load_plugin_system(path: Union[str, os.PathLike]) -> ControlAffineSystem:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            document = json.load(handle)
    except FileNotFoundError:
        raise ConfigError(f"plugin file not found: {path}", field="system.plugin") from None
    except json.JSONDecodeError as error:
        raise ConfigError(error.msg, field="system.plugin", line=error.lineno) from None
    if not isinstance(document, dict):
        raise ConfigError("plugin document must be a JSON object", field="system.plugin")
    return plugin_system(document)
