"""Closed-form scalar functions of one variable.

A small expression language with parsing, printing, evaluation and exact
symbolic differentiation.  The node vocabulary is closed under
differentiation: constants, one variable, negation, sum, difference,
product, quotient, powers with constant real exponent, and the functions
sqrt, exp, log, sinh, cosh, tanh, sin, cos.

Expression trees are immutable after construction and safe to evaluate
concurrently.  No simplification is performed beyond constant folding of
literal-only subtrees.
"""

import math
import re

import numpy as np

__all__ = [
    "Expr", "Const", "Var", "Neg", "Add", "Sub", "Mul", "Div", "Pow", "Fn",
    "parse_expr", "evaluate", "differentiate", "to_string",
    "ExprError", "ExprSyntaxError", "EvalDomainError",
]


class ExprError(Exception):
    pass


class ExprSyntaxError(ExprError):
    """Parse failure; `offset` is the byte offset into the source text."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EvalDomainError(ExprError):
    """Evaluation outside the domain of a subexpression."""

    def __init__(self, message, node):
        super().__init__(f"{message} in {to_string(node)!r}")
        self.node = node


class Expr:
    __slots__ = ()

    def __repr__(self):
        return f"{type(self).__name__}({to_string(self)!r})"

    def __str__(self):
        return to_string(self)


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        object.__setattr__(self, "value", float(value))

    def __setattr__(self, *a):
        raise AttributeError("expression nodes are immutable")


class Var(Expr):
    __slots__ = ("name",)

    def __init__(self, name):
        object.__setattr__(self, "name", name)

    def __setattr__(self, *a):
        raise AttributeError("expression nodes are immutable")


class _Unary(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg):
        object.__setattr__(self, "arg", arg)

    def __setattr__(self, *a):
        raise AttributeError("expression nodes are immutable")


class _Binary(Expr):
    __slots__ = ("lhs", "rhs")

    def __init__(self, lhs, rhs):
        object.__setattr__(self, "lhs", lhs)
        object.__setattr__(self, "rhs", rhs)

    def __setattr__(self, *a):
        raise AttributeError("expression nodes are immutable")


class Neg(_Unary):
    __slots__ = ()


class Add(_Binary):
    __slots__ = ()


class Sub(_Binary):
    __slots__ = ()


class Mul(_Binary):
    __slots__ = ()


class Div(_Binary):
    __slots__ = ()


class Pow(Expr):
    """Power with a constant real exponent."""

    __slots__ = ("base", "exponent")

    def __init__(self, base, exponent):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exponent", float(exponent))

    def __setattr__(self, *a):
        raise AttributeError("expression nodes are immutable")


class Fn(_Unary):
    __slots__ = ("name",)

    def __init__(self, name, arg):
        if name not in _FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        object.__setattr__(self, "name", name)
        super().__init__(arg)


_FUNCTIONS = {
    "sqrt": np.sqrt,
    "exp": np.exp,
    "log": np.log,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "sin": np.sin,
    "cos": np.cos,
}

_CONSTANTS = {"pi": math.pi, "e": math.e}


# ---------------------------------------------------------------------------
# smart constructors (constant folding of literal-only subtrees, nothing more)

def _is_const(e):
    return isinstance(e, Const)


def _neg(u):
    return Const(-u.value) if _is_const(u) else Neg(u)


def _add(u, v):
    return Const(u.value + v.value) if _is_const(u) and _is_const(v) else Add(u, v)


def _sub(u, v):
    return Const(u.value - v.value) if _is_const(u) and _is_const(v) else Sub(u, v)


def _mul(u, v):
    return Const(u.value * v.value) if _is_const(u) and _is_const(v) else Mul(u, v)


def _div(u, v):
    if _is_const(u) and _is_const(v):
        if v.value == 0.0:
            raise EvalDomainError("division by zero", Div(u, v))
        return Const(u.value / v.value)
    return Div(u, v)


def _pow(u, c):
    if _is_const(u):
        return Const(_eval_pow(u.value, c, Pow(u, c)))
    return Pow(u, c)


def _fn(name, u):
    if _is_const(u):
        node = Fn(name, u)
        return Const(_eval_node(node, 0.0))
    return Fn(name, u)


# ---------------------------------------------------------------------------
# evaluation

def _eval_pow(base, exponent, node):
    integral = float(exponent).is_integer()
    if not integral and np.any(base < 0.0):
        raise EvalDomainError("negative base with non-integer exponent", node)
    if exponent < 0.0 and np.any(base == 0.0):
        raise EvalDomainError("zero base with negative exponent", node)
    return base ** exponent


def _eval_node(e, x):
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return x
    if isinstance(e, Neg):
        return -_eval_node(e.arg, x)
    if isinstance(e, Add):
        return _eval_node(e.lhs, x) + _eval_node(e.rhs, x)
    if isinstance(e, Sub):
        return _eval_node(e.lhs, x) - _eval_node(e.rhs, x)
    if isinstance(e, Mul):
        return _eval_node(e.lhs, x) * _eval_node(e.rhs, x)
    if isinstance(e, Div):
        den = _eval_node(e.rhs, x)
        if np.any(den == 0.0):
            raise EvalDomainError("division by zero", e)
        return _eval_node(e.lhs, x) / den
    if isinstance(e, Pow):
        return _eval_pow(_eval_node(e.base, x), e.exponent, e)
    if isinstance(e, Fn):
        arg = _eval_node(e.arg, x)
        if e.name == "log" and np.any(arg <= 0.0):
            raise EvalDomainError("log of non-positive value", e)
        if e.name == "sqrt" and np.any(arg < 0.0):
            raise EvalDomainError("sqrt of negative value", e)
        return _FUNCTIONS[e.name](arg)
    raise TypeError(f"not an expression node: {e!r}")


def evaluate(e, x):
    """Evaluate `e` at `x` (a float or a numpy array, elementwise).

    Raises EvalDomainError naming the offending node when `x` leaves the
    domain of a subexpression.
    """
    if isinstance(x, np.ndarray):
        return _eval_node(e, x.astype(float, copy=False))
    return float(_eval_node(e, float(x)))


# ---------------------------------------------------------------------------
# differentiation

def differentiate(e):
    """Exact symbolic derivative of `e` with respect to its variable.

    Total on the node vocabulary; applying it twice gives the second
    derivative.
    """
    if isinstance(e, Const):
        return Const(0.0)
    if isinstance(e, Var):
        return Const(1.0)
    if isinstance(e, Neg):
        return _neg(differentiate(e.arg))
    if isinstance(e, Add):
        return _add(differentiate(e.lhs), differentiate(e.rhs))
    if isinstance(e, Sub):
        return _sub(differentiate(e.lhs), differentiate(e.rhs))
    if isinstance(e, Mul):
        return _add(_mul(differentiate(e.lhs), e.rhs),
                    _mul(e.lhs, differentiate(e.rhs)))
    if isinstance(e, Div):
        num = _sub(_mul(differentiate(e.lhs), e.rhs),
                   _mul(e.lhs, differentiate(e.rhs)))
        return _div(num, _pow(e.rhs, 2.0))
    if isinstance(e, Pow):
        if e.exponent == 0.0:
            return Const(0.0)
        return _mul(_mul(Const(e.exponent), _pow(e.base, e.exponent - 1.0)),
                    differentiate(e.base))
    if isinstance(e, Fn):
        u, du = e.arg, differentiate(e.arg)
        if e.name == "sqrt":
            return _div(du, _mul(Const(2.0), _fn("sqrt", u)))
        if e.name == "exp":
            return _mul(_fn("exp", u), du)
        if e.name == "log":
            return _div(du, u)
        if e.name == "sinh":
            return _mul(_fn("cosh", u), du)
        if e.name == "cosh":
            return _mul(_fn("sinh", u), du)
        if e.name == "tanh":
            return _div(du, _pow(_fn("cosh", u), 2.0))
        if e.name == "sin":
            return _mul(_fn("cos", u), du)
        if e.name == "cos":
            return _neg(_mul(_fn("sin", u), du))
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# printing

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _fmt_number(v):
    return repr(v)


def _print(e):
    """Return (text, precedence)."""
    if isinstance(e, Const):
        if e.value < 0.0:
            return _fmt_number(e.value), _PREC_UNARY
        return _fmt_number(e.value), _PREC_ATOM
    if isinstance(e, Var):
        return e.name, _PREC_ATOM
    if isinstance(e, Neg):
        s, p = _print(e.arg)
        if p < _PREC_UNARY:
            s = f"({s})"
        return f"-{s}", _PREC_UNARY
    if isinstance(e, (Add, Sub)):
        op = "+" if isinstance(e, Add) else "-"
        ls, lp = _print(e.lhs)
        rs, rp = _print(e.rhs)
        if lp < _PREC_ADD:
            ls = f"({ls})"
        # right operand of '-' needs parens at equal precedence
        if rp < _PREC_ADD or (op == "-" and rp == _PREC_ADD):
            rs = f"({rs})"
        return f"{ls} {op} {rs}", _PREC_ADD
    if isinstance(e, (Mul, Div)):
        op = "*" if isinstance(e, Mul) else "/"
        ls, lp = _print(e.lhs)
        rs, rp = _print(e.rhs)
        if lp < _PREC_MUL:
            ls = f"({ls})"
        if rp < _PREC_MUL or (op == "/" and rp <= _PREC_MUL):
            rs = f"({rs})"
        return f"{ls}{op}{rs}", _PREC_MUL
    if isinstance(e, Pow):
        bs, bp = _print(e.base)
        if bp < _PREC_ATOM:
            bs = f"({bs})"
        es = _fmt_number(e.exponent)
        if e.exponent < 0.0:
            es = f"({es})"
        return f"{bs}^{es}", _PREC_POW
    if isinstance(e, Fn):
        s, _ = _print(e.arg)
        return f"{e.name}({s})", _PREC_ATOM
    raise TypeError(f"not an expression node: {e!r}")


def to_string(e):
    """Render `e` so that parse_expr(to_string(e)) evaluates identically."""
    return _print(e)[0]


# ---------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(r"""
      (?P<num>(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?)
    | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
    | (?P<op>[-+*/^()])
    | (?P<ws>\s+)
""", re.VERBOSE)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append((m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    """Recursive descent over: expr -> term (+|- term)*; term -> unary
    ((*|/) unary)*; unary -> '-' unary | power; power -> atom ('^' unary)?
    with '^' binding tighter than unary minus and right-associative."""

    def __init__(self, text, var_name):
        self.text = text
        self.var_name = var_name
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, text, off = self.peek()
        if kind != "op" or text != op:
            raise ExprSyntaxError(f"expected {op!r}", off)
        return self.advance()

    def parse(self):
        e = self.expr()
        kind, text, off = self.peek()
        if kind != "end":
            raise ExprSyntaxError(f"unexpected {text!r}", off)
        return e

    def expr(self):
        e = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "+-":
                self.advance()
                rhs = self.term()
                e = _add(e, rhs) if text == "+" else _sub(e, rhs)
            else:
                return e

    def term(self):
        e = self.unary()
        while True:
            kind, text, _ = self.peek()
            if kind == "op" and text in "*/":
                self.advance()
                rhs = self.unary()
                e = _mul(e, rhs) if text == "*" else _div(e, rhs)
            else:
                return e

    def unary(self):
        kind, text, _ = self.peek()
        if kind == "op" and text == "-":
            self.advance()
            return _neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        kind, text, off = self.peek()
        if kind == "op" and text == "^":
            self.advance()
            exponent = self.unary()
            if not isinstance(exponent, Const):
                raise ExprSyntaxError("exponent must be a constant", off)
            return _pow(base, exponent.value)
        return base

    def atom(self):
        kind, text, off = self.advance()
        if kind == "num":
            return Const(float(text))
        if kind == "ident":
            nkind, ntext, _ = self.peek()
            if nkind == "op" and ntext == "(":
                if text not in _FUNCTIONS:
                    raise ExprSyntaxError(f"unknown function {text!r}", off)
                self.advance()
                arg = self.expr()
                self.expect_op(")")
                return _fn(text, arg)
            if text == self.var_name:
                return Var(text)
            if text in _CONSTANTS:
                return Const(_CONSTANTS[text])
            if text in _FUNCTIONS:
                raise ExprSyntaxError(
                    f"function {text!r} takes exactly one parenthesized argument", off)
            raise ExprSyntaxError(f"unknown identifier {text!r}", off)
        if kind == "op" and text == "(":
            e = self.expr()
            self.expect_op(")")
            return e
        raise ExprSyntaxError("expected a value", off)


def parse_expr(text, var_name):
    """Parse `text` into an expression tree over the single variable
    `var_name`.  Grammar: infix + - * / ^ with the usual precedence
    (^ highest and right-associative, then unary minus, then * /, then
    + -), parentheses, `name(arg)` function application, decimal literals
    with optional exponent, and the constants `pi` and `e`.
    """
    return _Parser(text, var_name).parse()
