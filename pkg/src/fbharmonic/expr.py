"""A small, safe evaluator for elementary expressions in chart coordinates,
e.g. ``"exp(sqrt2*z)+exp(-sqrt2*z)"`` or ``"rho"``.

Only arithmetic, unary minus, powers, numeric literals, the coordinate
names, a fixed set of functions and a few constants are accepted.
"""

import ast

import numpy as np

from .errors import FBHError

FUNCTIONS = {
    "exp": np.exp, "log": np.log, "sin": np.sin, "cos": np.cos, "tan": np.tan,
    "sqrt": np.sqrt, "cosh": np.cosh, "sinh": np.sinh, "tanh": np.tanh,
}
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply,
           ast.Div: np.divide, ast.Pow: np.power}


def _constants(dtype):
    two, three = dtype(2), dtype(3)
    return {"pi": dtype(np.pi) if dtype is float else np.arccos(dtype(-1)),
            "e": np.exp(dtype(1)), "sqrt2": np.sqrt(two), "sqrt3": np.sqrt(three)}


class Expression:
    """Parsed expression; call with keyword coordinate arrays."""

    def __init__(self, text, names):
        self.text = text
        self.names = tuple(names)
        try:
            tree = ast.parse(text.strip(), mode="eval")
        except SyntaxError as exc:
            raise FBHError(f"cannot parse expression {text!r}") from exc
        self._check(tree.body)
        self.tree = tree.body

    def _check(self, node):
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            self._check(node.operand)
        elif isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            pass
        elif isinstance(node, ast.Name):
            if node.id not in self.names and node.id not in ("pi", "e", "sqrt2", "sqrt3"):
                raise FBHError(f"unknown name {node.id!r} in expression; "
                               f"allowed: {', '.join(self.names)}")
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in FUNCTIONS \
                    or len(node.args) != 1 or node.keywords:
                raise FBHError(f"unsupported call in expression {self.text!r}")
            self._check(node.args[0])
        else:
            raise FBHError(f"unsupported syntax in expression {self.text!r}")

    def __call__(self, **coords):
        arrays = [np.asarray(v) for v in coords.values()]
        dtype = np.result_type(*arrays, float).type if arrays else float
        env = dict(_constants(dtype))
        env.update(coords)
        shape = np.broadcast_shapes(*(a.shape for a in arrays)) if arrays else ()
        out = self._eval(self.tree, env, dtype)
        return np.broadcast_to(np.asarray(out, dtype=dtype), shape).copy()

    def _eval(self, node, env, dtype):
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, env, dtype),
                                          self._eval(node.right, env, dtype))
        if isinstance(node, ast.UnaryOp):
            v = self._eval(node.operand, env, dtype)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.Constant):
            return dtype(node.value)
        if isinstance(node, ast.Name):
            return env[node.id]
        return FUNCTIONS[node.func.id](self._eval(node.args[0], env, dtype))


def compile_expression(text, names):
    return Expression(text, names)
