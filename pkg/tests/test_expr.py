import math

import numpy as np
import pytest

from fbharmonic.errors import FBHError
from fbharmonic.expr import Expression


def test_constants_and_functions():
    ex = Expression("exp(sqrt2*z)+exp(-sqrt2*z)", ("x", "y", "z"))
    z = np.array([0.0, 0.5])
    assert np.allclose(ex(x=0 * z, y=0 * z, z=z), 2 * np.cosh(math.sqrt(2) * z))
    assert Expression("pi + e - sqrt3", ())() == pytest.approx(math.pi + math.e - math.sqrt(3))


def test_powers_and_broadcast():
    ex = Expression("rho**2 / 2 - 3", ("rho", "z"))
    out = ex(rho=np.array([[1.0], [2.0]]), z=np.zeros((1, 3)))
    assert out.shape == (2, 3)
    assert np.all(out[1] == -1)


def test_constant_expression_broadcasts():
    assert np.all(Expression("1", ("s", "v"))(s=np.zeros((2, 2)), v=np.zeros((2, 2))) == 1)


def test_extended_precision_kept():
    x = np.linspace(0, 1, 5).astype(np.longdouble)
    assert Expression("sin(x)", ("x",))(x=x).dtype == np.longdouble


@pytest.mark.parametrize("text", ["__import__('os')", "x.real", "lambda: 1", "y", "x if x else 1",
                                  "sum(x)", "exp(x, x)", "x[0]", "'a'"])
def test_rejects_unsafe_or_unknown(text):
    with pytest.raises(FBHError):
        Expression(text, ("x",))


def test_syntax_error():
    with pytest.raises(FBHError, match="cannot parse"):
        Expression("x +* 2", ("x",))
