import numpy as np
import pytest
import sympy as sp

from floquetspec.expr import ExpressionError, compile_expression


def test_evaluates_with_constants_and_functions():
    e = compile_expression("-1.2 + 0.4*cos(2*pi*t)")
    t = np.array([0.0, 0.5])
    assert np.allclose(e(t=t), [-0.8, -1.6])


def test_two_variables_and_sympy():
    e = compile_expression("2*exp(-s)", ("t", "s"))
    assert np.isclose(e(t=0.0, s=1.0), 2 * np.exp(-1))
    s = sp.Symbol("s")
    assert sp.simplify(e.to_sympy({"t": sp.Integer(0), "s": s}) - 2 * sp.exp(-s)) == 0


@pytest.mark.parametrize("bad", ["__import__('os')", "t.real", "q + 1", "lambda: 1", "1 +"])
def test_rejects_unsafe_or_unknown(bad):
    with pytest.raises(ExpressionError):
        compile_expression(bad)
