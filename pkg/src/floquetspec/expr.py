"""Small arithmetic grammar for coefficient and kernel expressions.

Accepted: numbers (including complex literals such as ``2j``), the
variables named on compilation (``t`` and/or ``s``), the constants ``pi``
(or ``π``) and ``e``, the operators ``+ - * / **`` and the functions
``sin``, ``cos``, ``exp``, ``sqrt``, ``sinh``, ``cosh``.  Anything else is
rejected before evaluation; nothing is passed to ``eval``.
"""

from __future__ import annotations

import ast
import math

import numpy as np
import sympy as sp

__all__ = ["Expression", "ExpressionError", "compile_expression"]

_FUNCS_NP = {
    "sin": np.sin,
    "cos": np.cos,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "sinh": np.sinh,
    "cosh": np.cosh,
}
_FUNCS_SP = {
    "sin": sp.sin,
    "cos": sp.cos,
    "exp": sp.exp,
    "sqrt": sp.sqrt,
    "sinh": sp.sinh,
    "cosh": sp.cosh,
}
_CONSTS = {"pi": math.pi, "e": math.e}
_CONSTS_SP = {"pi": sp.pi, "e": sp.E}


class ExpressionError(ValueError):
    pass


class Expression:
    """A validated expression in a fixed set of variables."""

    def __init__(self, source: str, variables: tuple[str, ...]):
        self.source = source
        self.variables = variables
        text = source.replace("π", "pi").replace("−", "-")
        try:
            tree = ast.parse(text, mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse expression {source!r}: {exc.msg}") from None
        self._tree = tree.body
        self._names: set[str] = set()
        self._check(self._tree)

    @property
    def free_variables(self) -> set[str]:
        return self._names & set(self.variables)

    def _check(self, node) -> None:
        if isinstance(node, ast.BinOp):
            if not isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)):
                raise ExpressionError(f"operator not allowed in {self.source!r}")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, (ast.UAdd, ast.USub)):
                raise ExpressionError(f"operator not allowed in {self.source!r}")
            self._check(node.operand)
        elif isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float, complex)):
                raise ExpressionError(f"literal not allowed in {self.source!r}")
        elif isinstance(node, ast.Name):
            if node.id not in self.variables and node.id not in _CONSTS:
                raise ExpressionError(f"unknown name {node.id!r} in {self.source!r}")
            self._names.add(node.id)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS_NP:
                raise ExpressionError(f"function not allowed in {self.source!r}")
            if len(node.args) != 1 or node.keywords:
                raise ExpressionError(f"functions take one argument in {self.source!r}")
            self._check(node.args[0])
        else:
            raise ExpressionError(f"unsupported syntax in {self.source!r}")

    def _eval(self, node, env):
        if isinstance(node, ast.BinOp):
            a = self._eval(node.left, env)
            b = self._eval(node.right, env)
            op = node.op
            if isinstance(op, ast.Add):
                return a + b
            if isinstance(op, ast.Sub):
                return a - b
            if isinstance(op, ast.Mult):
                return a * b
            if isinstance(op, ast.Div):
                return a / b
            return a**b
        if isinstance(node, ast.UnaryOp):
            v = self._eval(node.operand, env)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Constant):
            return node.value
        if isinstance(node, ast.Name):
            return env[node.id]
        return env["__f__"][node.func.id](self._eval(node.args[0], env))

    def __call__(self, **values):
        env = dict(_CONSTS)
        for name in self.variables:
            env[name] = np.asarray(values[name], dtype=complex)
        env["__f__"] = _FUNCS_NP
        out = self._eval(self._tree, env)
        shape = np.broadcast_shapes(*(np.shape(env[v]) for v in self.variables)) if self.variables else ()
        return np.broadcast_to(np.asarray(out, dtype=complex), shape).copy()

    def to_sympy(self, symbols: dict[str, sp.Symbol]) -> sp.Expr:
        env = dict(_CONSTS_SP)
        env.update(symbols)
        env["__f__"] = _FUNCS_SP

        def conv(node):
            if isinstance(node, ast.Constant):
                v = node.value
                if isinstance(v, complex):
                    return sp.nsimplify(v.real) + sp.I * sp.nsimplify(v.imag)
                return sp.nsimplify(v)
            if isinstance(node, ast.BinOp):
                a, b = conv(node.left), conv(node.right)
                op = node.op
                if isinstance(op, ast.Add):
                    return a + b
                if isinstance(op, ast.Sub):
                    return a - b
                if isinstance(op, ast.Mult):
                    return a * b
                if isinstance(op, ast.Div):
                    return a / b
                return a**b
            if isinstance(node, ast.UnaryOp):
                v = conv(node.operand)
                return -v if isinstance(node.op, ast.USub) else v
            if isinstance(node, ast.Name):
                return env[node.id]
            return env["__f__"][node.func.id](conv(node.args[0]))

        return conv(self._tree)

    def __repr__(self) -> str:
        return f"Expression({self.source!r})"


def compile_expression(source, variables: tuple[str, ...] = ("t",)) -> Expression:
    if isinstance(source, (int, float, complex)) and not isinstance(source, bool):
        source = repr(source)
    if not isinstance(source, str):
        raise ExpressionError(f"expected an expression string, got {type(source).__name__}")
    return Expression(source, variables)

