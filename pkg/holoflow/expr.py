"""
Complex-analytic expression trees for f(z)

Nodes are immutable. Every tree can be printed back to text the parser accepts,
differentiated symbolically, compiled to a fast evaluator and, when it is rational
in its variable, converted to numerator/denominator coefficient arrays.
"""

import cmath
import hashlib
from dataclasses import dataclass
from functools import cached_property, singledispatch
from typing import Callable, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from .exceptions import EvalOverflowError, EvalPoleError, NotRationalError


POLE_THRESHOLD = 1e-300
OVERFLOW_CAP = 1e300

FUNCTIONS = ("exp", "log", "sin", "cos", "tan", "sec")


class Node:
    """Base class of expression nodes"""

    precedence = 5


@dataclass(frozen=True)
class Var(Node):
    name: str = "z"


@dataclass(frozen=True)
class Lit(Node):
    value: complex


@dataclass(frozen=True)
class Add(Node):
    left: Node
    right: Node
    precedence = 1
    symbol = "+"


@dataclass(frozen=True)
class Sub(Node):
    left: Node
    right: Node
    precedence = 1
    symbol = "-"


@dataclass(frozen=True)
class Mul(Node):
    left: Node
    right: Node
    precedence = 2
    symbol = "*"


@dataclass(frozen=True)
class Div(Node):
    left: Node
    right: Node
    precedence = 2
    symbol = "/"


@dataclass(frozen=True)
class Neg(Node):
    operand: Node
    precedence = 3


@dataclass(frozen=True)
class Pow(Node):
    """Integer power"""

    base: Node
    exponent: int
    precedence = 4


@dataclass(frozen=True)
class Func(Node):
    name: str
    arg: Node


@dataclass(frozen=True)
class Poly(Node):
    """Polynomial by coefficients, lowest degree first, applied to arg"""

    coeffs: Tuple[complex, ...]
    arg: Node


# ---------------------------------------------------------------------------
# Smart constructors: the normal form used for hashing and differentiation
# ---------------------------------------------------------------------------

ZERO = Lit(0j)
ONE = Lit(1 + 0j)


def _is_lit(node: Node, value: complex) -> bool:
    return isinstance(node, Lit) and node.value == value


def lit(value: complex) -> Lit:
    return Lit(complex(value))


def add(a: Node, b: Node) -> Node:
    if isinstance(a, Lit) and isinstance(b, Lit):
        return lit(a.value + b.value)
    if _is_lit(a, 0):
        return b
    if _is_lit(b, 0):
        return a
    return Add(a, b)


def sub(a: Node, b: Node) -> Node:
    if isinstance(a, Lit) and isinstance(b, Lit):
        return lit(a.value - b.value)
    if _is_lit(b, 0):
        return a
    if _is_lit(a, 0):
        return neg(b)
    return Sub(a, b)


def mul(a: Node, b: Node) -> Node:
    if isinstance(a, Lit) and isinstance(b, Lit):
        return lit(a.value * b.value)
    if _is_lit(a, 0) or _is_lit(b, 0):
        return ZERO
    if _is_lit(a, 1):
        return b
    if _is_lit(b, 1):
        return a
    if _is_lit(a, -1):
        return neg(b)
    if _is_lit(b, -1):
        return neg(a)
    return Mul(a, b)


def div(a: Node, b: Node) -> Node:
    if isinstance(a, Lit) and isinstance(b, Lit) and b.value != 0:
        return lit(a.value / b.value)
    if _is_lit(b, 1):
        return a
    if _is_lit(a, 0) and not _is_lit(b, 0):
        return ZERO
    return Div(a, b)


def neg(a: Node) -> Node:
    if isinstance(a, Lit):
        return lit(-a.value)
    if isinstance(a, Neg):
        return a.operand
    return Neg(a)


def power(a: Node, n: int) -> Node:
    if n == 0:
        return ONE
    if n == 1:
        return a
    if isinstance(a, Lit) and (a.value != 0 or n > 0):
        try:
            value = a.value ** n
        except (OverflowError, ZeroDivisionError):
            return Pow(a, n)
        if cmath.isfinite(value):
            return lit(value)
    if isinstance(a, Pow):
        return power(a.base, a.exponent * n)
    return Pow(a, n)


def func(name: str, a: Node) -> Node:
    if isinstance(a, Lit):
        try:
            value = _FUNCTION_IMPLS[name](a.value, a.value)
        except (EvalPoleError, EvalOverflowError):
            return Func(name, a)
        return lit(value)
    return Func(name, a)


def poly(coeffs, a: Node) -> Node:
    values = [complex(c) for c in coeffs]
    while len(values) > 1 and values[-1] == 0:
        values.pop()
    if not values:
        return ZERO
    if len(values) == 1:
        return lit(values[0])
    if isinstance(a, Lit):
        return lit(_polyval(values, a.value))
    return Poly(tuple(values), a)


@singledispatch
def normalize(node: Node) -> Node:
    """Rebuild a tree through the smart constructors"""
    raise TypeError(f"Unknown node {node!r}")


@normalize.register
def _(node: Var) -> Node:
    return node


@normalize.register
def _(node: Lit) -> Node:
    return lit(node.value)


@normalize.register
def _(node: Add) -> Node:
    return add(normalize(node.left), normalize(node.right))


@normalize.register
def _(node: Sub) -> Node:
    return sub(normalize(node.left), normalize(node.right))


@normalize.register
def _(node: Mul) -> Node:
    return mul(normalize(node.left), normalize(node.right))


@normalize.register
def _(node: Div) -> Node:
    return div(normalize(node.left), normalize(node.right))


@normalize.register
def _(node: Neg) -> Node:
    return neg(normalize(node.operand))


@normalize.register
def _(node: Pow) -> Node:
    return power(normalize(node.base), node.exponent)


@normalize.register
def _(node: Func) -> Node:
    return func(node.name, normalize(node.arg))


@normalize.register
def _(node: Poly) -> Node:
    return poly(node.coeffs, normalize(node.arg))


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------

def _finite(value: complex, z: complex) -> complex:
    try:
        magnitude = abs(value)
    except OverflowError:
        raise EvalOverflowError(z)
    if not magnitude <= OVERFLOW_CAP:
        raise EvalOverflowError(z)
    return value


def _reciprocal(value: complex, z: complex) -> complex:
    if abs(value) < POLE_THRESHOLD:
        raise EvalPoleError(z)
    return _finite(1.0 / value, z)


def _polyval(coeffs, w: complex) -> complex:
    """Coefficients lowest degree first; overflow surfaces as a non-finite value"""
    with np.errstate(over="ignore", invalid="ignore"):
        return complex(P.polyval(w, coeffs))


def _exp(w: complex, z: complex) -> complex:
    try:
        return _finite(cmath.exp(w), z)
    except OverflowError:
        raise EvalOverflowError(z)


def _log(w: complex, z: complex) -> complex:
    if abs(w) < POLE_THRESHOLD:
        raise EvalPoleError(z)
    return cmath.log(w)


def _sin(w: complex, z: complex) -> complex:
    try:
        return _finite(cmath.sin(w), z)
    except OverflowError:
        raise EvalOverflowError(z)


def _cos(w: complex, z: complex) -> complex:
    try:
        return _finite(cmath.cos(w), z)
    except OverflowError:
        raise EvalOverflowError(z)


def _tan(w: complex, z: complex) -> complex:
    return _finite(_sin(w, z) * _reciprocal(_cos(w, z), z), z)


def _sec(w: complex, z: complex) -> complex:
    return _reciprocal(_cos(w, z), z)


_FUNCTION_IMPLS = {
    "exp": _exp,
    "log": _log,
    "sin": _sin,
    "cos": _cos,
    "tan": _tan,
    "sec": _sec,
}

Evaluator = Callable[[complex], complex]


@singledispatch
def compile_node(node: Node) -> Evaluator:
    """Turn a tree into nested closures (much faster than re-dispatching per call)"""
    raise TypeError(f"Unknown node {node!r}")


@compile_node.register
def _(node: Var) -> Evaluator:
    return lambda z: z


@compile_node.register
def _(node: Lit) -> Evaluator:
    value = node.value
    return lambda z: value


@compile_node.register
def _(node: Add) -> Evaluator:
    left, right = compile_node(node.left), compile_node(node.right)
    return lambda z: _finite(left(z) + right(z), z)


@compile_node.register
def _(node: Sub) -> Evaluator:
    left, right = compile_node(node.left), compile_node(node.right)
    return lambda z: _finite(left(z) - right(z), z)


@compile_node.register
def _(node: Mul) -> Evaluator:
    left, right = compile_node(node.left), compile_node(node.right)
    return lambda z: _finite(left(z) * right(z), z)


@compile_node.register
def _(node: Div) -> Evaluator:
    left, right = compile_node(node.left), compile_node(node.right)

    def evaluate_div(z: complex) -> complex:
        den = right(z)
        if abs(den) < POLE_THRESHOLD:
            raise EvalPoleError(z)
        return _finite(left(z) / den, z)

    return evaluate_div


@compile_node.register
def _(node: Neg) -> Evaluator:
    operand = compile_node(node.operand)
    return lambda z: -operand(z)


@compile_node.register
def _(node: Pow) -> Evaluator:
    base = compile_node(node.base)
    n = node.exponent

    def evaluate_pow(z: complex) -> complex:
        b = base(z)
        try:
            if n >= 0:
                return _finite(b ** n, z)
            return _reciprocal(_finite(b ** (-n), z), z)
        except OverflowError:
            raise EvalOverflowError(z)
        except ZeroDivisionError:
            raise EvalPoleError(z)

    return evaluate_pow


@compile_node.register
def _(node: Func) -> Evaluator:
    arg = compile_node(node.arg)
    impl = _FUNCTION_IMPLS[node.name]
    return lambda z: impl(arg(z), z)


@compile_node.register
def _(node: Poly) -> Evaluator:
    arg = compile_node(node.arg)
    coeffs = np.asarray(node.coeffs, dtype=complex)
    return lambda z: _finite(_polyval(coeffs, arg(z)), z)


# ---------------------------------------------------------------------------
# Symbolic derivative
# ---------------------------------------------------------------------------

@singledispatch
def derive(node: Node) -> Node:
    """d/dz of a node, built with the smart constructors"""
    raise TypeError(f"Unknown node {node!r}")


@derive.register
def _(node: Var) -> Node:
    return ONE


@derive.register
def _(node: Lit) -> Node:
    return ZERO


@derive.register
def _(node: Add) -> Node:
    return add(derive(node.left), derive(node.right))


@derive.register
def _(node: Sub) -> Node:
    return sub(derive(node.left), derive(node.right))


@derive.register
def _(node: Mul) -> Node:
    return add(mul(derive(node.left), node.right), mul(node.left, derive(node.right)))


@derive.register
def _(node: Div) -> Node:
    u, v = node.left, node.right
    numerator = sub(mul(derive(u), v), mul(u, derive(v)))
    return div(numerator, power(v, 2))


@derive.register
def _(node: Neg) -> Node:
    return neg(derive(node.operand))


@derive.register
def _(node: Pow) -> Node:
    n = node.exponent
    return mul(mul(lit(n), power(node.base, n - 1)), derive(node.base))


@derive.register
def _(node: Func) -> Node:
    u = node.arg
    du = derive(u)
    name = node.name
    if name == "exp":
        outer = func("exp", u)
    elif name == "log":
        return div(du, u)
    elif name == "sin":
        outer = func("cos", u)
    elif name == "cos":
        outer = neg(func("sin", u))
    elif name == "tan":
        outer = power(func("sec", u), 2)
    elif name == "sec":
        outer = mul(func("sec", u), func("tan", u))
    else:
        raise TypeError(f"Unknown function {name}")
    return mul(outer, du)


@derive.register
def _(node: Poly) -> Node:
    derived = P.polyder(np.array(node.coeffs, dtype=complex))
    return mul(poly(derived, node.arg), derive(node.arg))


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

def _number(x: float) -> str:
    return repr(float(x))


def _coeff_text(c: complex) -> str:
    """Signed coefficient text as accepted inside poly[...]"""
    re, im = c.real, c.imag
    if im == 0:
        return _number(re)
    if re == 0:
        return f"{_number(im)}i"
    sign = "+" if im >= 0 else "-"
    return f"{_number(re)}{sign}{_number(abs(im))}i"


def _literal_text(c: complex) -> str:
    re, im = c.real, c.imag
    if im == 0 and re >= 0:
        return _number(re)
    if re == 0 and im > 0:
        return f"{_number(im)}i"
    return f"({_coeff_text(c)})"


@singledispatch
def render(node: Node) -> str:
    raise TypeError(f"Unknown node {node!r}")


@render.register
def _(node: Var) -> str:
    return node.name


@render.register
def _(node: Lit) -> str:
    return _literal_text(node.value)


def _wrap(child: Node, min_precedence: int) -> str:
    text = render(child)
    return f"({text})" if child.precedence < min_precedence else text


def _render_binary(node) -> str:
    p = node.precedence
    left = _wrap(node.left, p)
    # right operand of - and / needs parentheses at equal precedence
    right_min = p + 1 if isinstance(node, (Sub, Div)) else p
    right = _wrap(node.right, right_min)
    return f"{left} {node.symbol} {right}" if p == 1 else f"{left}{node.symbol}{right}"


for _cls in (Add, Sub, Mul, Div):
    render.register(_cls, _render_binary)


@render.register
def _(node: Neg) -> str:
    return f"-{_wrap(node.operand, 3)}"


@render.register
def _(node: Pow) -> str:
    return f"{_wrap(node.base, 5)}^{node.exponent}"


@render.register
def _(node: Func) -> str:
    return f"{node.name}({render(node.arg)})"


@render.register
def _(node: Poly) -> str:
    coeffs = ",".join(_coeff_text(c) for c in node.coeffs)
    if isinstance(node.arg, Var):
        return f"poly[{coeffs}]"
    return f"poly[{coeffs}]({render(node.arg)})"


# ---------------------------------------------------------------------------
# Substitution and rational conversion
# ---------------------------------------------------------------------------

@singledispatch
def substitute(node: Node, replacement: Node) -> Node:
    """Replace the variable by another tree"""
    raise TypeError(f"Unknown node {node!r}")


@substitute.register
def _(node: Var, replacement: Node) -> Node:
    return replacement


@substitute.register
def _(node: Lit, replacement: Node) -> Node:
    return node


@substitute.register
def _(node: Neg, replacement: Node) -> Node:
    return neg(substitute(node.operand, replacement))


@substitute.register
def _(node: Pow, replacement: Node) -> Node:
    return power(substitute(node.base, replacement), node.exponent)


@substitute.register
def _(node: Func, replacement: Node) -> Node:
    return func(node.name, substitute(node.arg, replacement))


@substitute.register
def _(node: Poly, replacement: Node) -> Node:
    return poly(node.coeffs, substitute(node.arg, replacement))


_BINARY_BUILDERS = {Add: add, Sub: sub, Mul: mul, Div: div}


def _substitute_binary(node, replacement: Node) -> Node:
    build = _BINARY_BUILDERS[type(node)]
    return build(substitute(node.left, replacement), substitute(node.right, replacement))


for _cls in (Add, Sub, Mul, Div):
    substitute.register(_cls, _substitute_binary)


Rational = Tuple[np.ndarray, np.ndarray]


def _trim(c: np.ndarray) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=complex))
    scale = np.max(np.abs(c)) if c.size else 0.0
    if scale == 0:
        return np.zeros(1, dtype=complex)
    return P.polytrim(c, tol=1e-14 * scale)


@singledispatch
def rational(node: Node) -> Rational:
    raise NotRationalError(f"{type(node).__name__} is not rational")


@rational.register
def _(node: Var) -> Rational:
    return np.array([0, 1], dtype=complex), np.array([1], dtype=complex)


@rational.register
def _(node: Lit) -> Rational:
    return np.array([node.value], dtype=complex), np.array([1], dtype=complex)


@rational.register
def _(node: Add) -> Rational:
    (n1, d1), (n2, d2) = rational(node.left), rational(node.right)
    return _trim(P.polyadd(P.polymul(n1, d2), P.polymul(n2, d1))), _trim(P.polymul(d1, d2))


@rational.register
def _(node: Sub) -> Rational:
    (n1, d1), (n2, d2) = rational(node.left), rational(node.right)
    return _trim(P.polysub(P.polymul(n1, d2), P.polymul(n2, d1))), _trim(P.polymul(d1, d2))


@rational.register
def _(node: Mul) -> Rational:
    (n1, d1), (n2, d2) = rational(node.left), rational(node.right)
    return _trim(P.polymul(n1, n2)), _trim(P.polymul(d1, d2))


@rational.register
def _(node: Div) -> Rational:
    (n1, d1), (n2, d2) = rational(node.left), rational(node.right)
    if not np.any(n2):
        raise NotRationalError("Division by the zero polynomial")
    return _trim(P.polymul(n1, d2)), _trim(P.polymul(d1, n2))


@rational.register
def _(node: Neg) -> Rational:
    n, d = rational(node.operand)
    return -n, d


@rational.register
def _(node: Pow) -> Rational:
    n, d = rational(node.base)
    k = abs(node.exponent)
    num, den = _trim(P.polypow(n, k)), _trim(P.polypow(d, k))
    return (num, den) if node.exponent >= 0 else (den, num)


@rational.register
def _(node: Poly) -> Rational:
    n, d = rational(node.arg)
    m = len(node.coeffs) - 1
    total = np.zeros(1, dtype=complex)
    for j, c in enumerate(node.coeffs):
        term = P.polymul(P.polypow(n, j), P.polypow(d, m - j)) * c
        total = P.polyadd(total, term)
    return _trim(total), _trim(P.polypow(d, m))


# ---------------------------------------------------------------------------
# Public wrapper
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExprAst:
    """Parsed expression with its variable name and normalized-form hash"""

    root: Node
    variable: str = "z"

    @cached_property
    def normalized(self) -> Node:
        return normalize(self.root)

    @cached_property
    def text(self) -> str:
        return render(self.normalized)

    @cached_property
    def hash(self) -> str:
        return hashlib.sha256(self.text.encode("utf-8")).hexdigest()

    @cached_property
    def _evaluator(self) -> Evaluator:
        return compile_node(self.normalized)

    def __call__(self, z: complex) -> complex:
        return self._evaluator(complex(z))

    def __str__(self) -> str:
        return self.text


def evaluate(ast: ExprAst, z: complex) -> complex:
    """
    Value of the expression at z

    Raises:
        EvalPoleError: a denominator fell below the pole threshold
        EvalOverflowError: a magnitude exceeded the overflow cap
    """
    return ast(z)


def differentiate(ast: ExprAst) -> ExprAst:
    """Symbolic d/dz"""
    return ExprAst(normalize(derive(ast.normalized)), ast.variable)


def print_expr(ast: ExprAst) -> str:
    """Canonical text that parses back to the same normalized hash"""
    return ast.text


def compose(ast: ExprAst, inner: ExprAst) -> ExprAst:
    """ast(inner(z)) in the variable of inner"""
    return ExprAst(normalize(substitute(ast.normalized, inner.normalized)), inner.variable)


def to_rational(ast: ExprAst) -> Rational:
    """
    Numerator and denominator coefficients (lowest degree first)

    Raises:
        NotRationalError: the expression contains a transcendental function
    """
    return rational(ast.normalized)
