"""Single-variable expression language for metric factors and central potentials.

Expressions are functions of one positive variable ``r`` plus named constants
(parameters).  They appear in config files as strings like ``"2/(1+r^2)"`` or
``"sqrt(k+r^2)"`` and are parsed into immutable trees that support exact
symbolic differentiation, checked evaluation, printing, and compilation to
fast plain-Python callables.

Grammar (precedence from loosest to tightest):

    expr   := term   (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-' factor | power
    power  := atom ('^' factor)?
    atom   := NUMBER | IDENT | IDENT '(' expr ')' | '(' expr ')'

``+ - * /`` are left-associative; ``^`` is right-associative and binds
tighter than unary minus (so ``-r^2`` is ``-(r^2)``).  Exponents must not
contain ``r`` (parameters are fine, e.g. ``r^(1/nu)``), which keeps
differentiation closed over the grammar: d/dr u^c = c*u^(c-1)*u'.

Functions: sin, cos, tan, exp, ln, sqrt, abs.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

__all__ = [
    "Expr", "Const", "Var", "Param", "Neg", "BinOp", "Pow", "Call",
    "ExprError", "ExprSyntaxError", "UnknownIdentifierError",
    "NonConstantExponentError", "EvalDomainError",
    "parse", "differentiate", "evaluate", "format_expr", "compile_expr",
    "contains_var",
]

FUNCTIONS = ("sin", "cos", "tan", "exp", "ln", "sqrt", "abs")

VAR_NAME = "r"


class ExprError(ValueError):
    """Base class for every error raised by this module."""


class ExprSyntaxError(ExprError):
    """Malformed source text; ``offset`` is the 0-based character position."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownIdentifierError(ExprSyntaxError):
    def __init__(self, name: str, offset: int):
        super().__init__(f"unknown identifier '{name}'", offset)
        self.name = name


class NonConstantExponentError(ExprSyntaxError):
    def __init__(self, offset: int):
        super().__init__("exponent of '^' must not contain the variable r", offset)


class EvalDomainError(ExprError):
    """Evaluation left the real domain; carries the offending sub-expression."""

    def __init__(self, message: str, node: "Expr"):
        super().__init__(f"{message} in '{format_expr(node)}'")
        self.node = node


# --------------------------------------------------------------------------
# tree nodes
# --------------------------------------------------------------------------

class Expr:
    """Immutable expression tree node. Safe to share across threads."""

    __slots__ = ()

    def __str__(self) -> str:
        return format_expr(self)


@dataclass(frozen=True)
class Const(Expr):
    value: float

    __slots__ = ("value",)


@dataclass(frozen=True)
class Var(Expr):
    """The single free variable r."""

    __slots__ = ()


@dataclass(frozen=True)
class Param(Expr):
    name: str

    __slots__ = ("name",)


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr

    __slots__ = ("arg",)


@dataclass(frozen=True)
class BinOp(Expr):
    op: str  # one of + - * /
    left: Expr
    right: Expr

    __slots__ = ("op", "left", "right")


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: Expr  # r-free by construction

    __slots__ = ("base", "exponent")


@dataclass(frozen=True)
class Call(Expr):
    fn: str  # one of FUNCTIONS
    arg: Expr

    __slots__ = ("fn", "arg")


def contains_var(e: Expr) -> bool:
    if isinstance(e, Var):
        return True
    if isinstance(e, (Const, Param)):
        return False
    if isinstance(e, Neg):
        return contains_var(e.arg)
    if isinstance(e, BinOp):
        return contains_var(e.left) or contains_var(e.right)
    if isinstance(e, Pow):
        return contains_var(e.base) or contains_var(e.exponent)
    if isinstance(e, Call):
        return contains_var(e.arg)
    raise TypeError(f"not an Expr node: {e!r}")


# --------------------------------------------------------------------------
# lexer / parser
# --------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<sym>[-+*/^()]))"
)


def _tokenize(source: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            # skip leading whitespace before reporting
            stripped = pos
            while stripped < len(source) and source[stripped].isspace():
                stripped += 1
            if stripped >= len(source):
                break
            raise ExprSyntaxError(f"unexpected character {source[stripped]!r}", stripped)
        if m.lastgroup == "num":
            tokens.append(("num", m.group("num"), m.start("num")))
        elif m.lastgroup == "ident":
            tokens.append(("ident", m.group("ident"), m.start("ident")))
        else:
            tokens.append(("sym", m.group("sym"), m.start("sym")))
        pos = m.end()
    tokens.append(("eof", "", len(source)))
    return tokens


class _Parser:
    def __init__(self, source: str, params: Iterable[str]):
        self.source = source
        self.params = frozenset(params)
        if VAR_NAME in self.params:
            raise ExprError(f"'{VAR_NAME}' is the variable and cannot be a parameter")
        bad = self.params.intersection(FUNCTIONS)
        if bad:
            raise ExprError(f"parameter names shadow functions: {sorted(bad)}")
        self.tokens = _tokenize(source)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_sym(self, sym: str):
        kind, text, off = self.peek()
        if kind != "sym" or text != sym:
            raise ExprSyntaxError(f"expected '{sym}'", off)
        return self.advance()

    def parse(self) -> Expr:
        e = self.expr()
        kind, text, off = self.peek()
        if kind != "eof":
            raise ExprSyntaxError(f"unexpected {text!r}", off)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while True:
            kind, text, _ = self.peek()
            if kind == "sym" and text in "+-":
                self.advance()
                e = BinOp(text, e, self.term())
            else:
                return e

    def term(self) -> Expr:
        e = self.factor()
        while True:
            kind, text, _ = self.peek()
            if kind == "sym" and text in "*/":
                self.advance()
                e = BinOp(text, e, self.factor())
            else:
                return e

    def factor(self) -> Expr:
        kind, text, _ = self.peek()
        if kind == "sym" and text == "-":
            self.advance()
            return Neg(self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        kind, text, off = self.peek()
        if kind == "sym" and text == "^":
            self.advance()
            expo = self.factor()  # right-associative; allows -2 and nested ^
            if contains_var(expo):
                raise NonConstantExponentError(off)
            return Pow(base, expo)
        return base

    def atom(self) -> Expr:
        kind, text, off = self.advance()
        if kind == "num":
            return Const(float(text))
        if kind == "ident":
            if text in FUNCTIONS:
                self.expect_sym("(")
                arg = self.expr()
                self.expect_sym(")")
                return Call(text, arg)
            if text == VAR_NAME:
                return Var()
            if text in self.params:
                return Param(text)
            raise UnknownIdentifierError(text, off)
        if kind == "sym" and text == "(":
            e = self.expr()
            self.expect_sym(")")
            return e
        raise ExprSyntaxError("expected a number, name, or '('", off)


def parse(source: str, params: Iterable[str] = ()) -> Expr:
    """Parse *source* into an Expr over r and the declared parameter names.

    Raises ExprSyntaxError (with character offset), UnknownIdentifierError,
    or NonConstantExponentError.
    """
    return _Parser(source, params).parse()


# --------------------------------------------------------------------------
# evaluation
# --------------------------------------------------------------------------

def evaluate(e: Expr, r: float, bindings: Mapping[str, float] | None = None) -> float:
    """Checked IEEE-double evaluation at r > 0 with all parameters bound.

    Domain violations (ln of a non-positive value, sqrt of a negative value,
    division by zero, fractional power of a negative base) raise
    EvalDomainError naming the offending sub-expression.  r <= 0 is rejected
    outright: every formula in this package lives on a positive radial domain
    where abs(r) is the identity.
    """
    if not r > 0:
        raise EvalDomainError(f"r must be positive, got {r}", e)
    return _eval(e, float(r), bindings or {})


def _eval(e: Expr, r: float, bindings: Mapping[str, float]) -> float:
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        return r
    if isinstance(e, Param):
        try:
            return float(bindings[e.name])
        except KeyError:
            raise EvalDomainError(f"unbound parameter '{e.name}'", e) from None
    if isinstance(e, Neg):
        return -_eval(e.arg, r, bindings)
    if isinstance(e, BinOp):
        a = _eval(e.left, r, bindings)
        b = _eval(e.right, r, bindings)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b == 0.0:
            raise EvalDomainError("division by zero", e)
        return a / b
    if isinstance(e, Pow):
        base = _eval(e.base, r, bindings)
        expo = _eval(e.exponent, r, bindings)
        if base == 0.0 and expo < 0:
            raise EvalDomainError("zero raised to a negative power", e)
        if base < 0.0 and expo != round(expo):
            raise EvalDomainError("fractional power of a negative base", e)
        try:
            return math.pow(base, expo)
        except (ValueError, OverflowError) as exc:
            raise EvalDomainError(str(exc), e) from None
    if isinstance(e, Call):
        x = _eval(e.arg, r, bindings)
        if e.fn == "ln":
            if x <= 0.0:
                raise EvalDomainError(f"ln of non-positive value {x}", e)
            return math.log(x)
        if e.fn == "sqrt":
            if x < 0.0:
                raise EvalDomainError(f"sqrt of negative value {x}", e)
            return math.sqrt(x)
        return _FN_TABLE[e.fn](x)
    raise TypeError(f"not an Expr node: {e!r}")


_FN_TABLE = {
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "exp": math.exp,
    "abs": abs,
}


# --------------------------------------------------------------------------
# differentiation
# --------------------------------------------------------------------------

def _is_const(e: Expr, v: float) -> bool:
    return isinstance(e, Const) and e.value == v


def _add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _is_const(a, 0.0):
        return b
    if _is_const(b, 0.0):
        return a
    return BinOp("+", a, b)


def _sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if _is_const(b, 0.0):
        return a
    if _is_const(a, 0.0):
        return Neg(b)
    return BinOp("-", a, b)


def _mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _is_const(a, 0.0) or _is_const(b, 0.0):
        return Const(0.0)
    if _is_const(a, 1.0):
        return b
    if _is_const(b, 1.0):
        return a
    return BinOp("*", a, b)


def _div(a: Expr, b: Expr) -> Expr:
    if _is_const(a, 0.0):
        return Const(0.0)
    if _is_const(b, 1.0):
        return a
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0.0:
        return Const(a.value / b.value)
    return BinOp("/", a, b)


def _neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def differentiate(e: Expr) -> Expr:
    """Exact symbolic d/dr.

    The result stays inside the grammar (differentiation is closed).  Only
    constant folding and trivial 0/1 eliminations are applied; the contract
    is correctness, not minimality.
    """
    if isinstance(e, (Const, Param)):
        return Const(0.0)
    if isinstance(e, Var):
        return Const(1.0)
    if isinstance(e, Neg):
        return _neg(differentiate(e.arg))
    if isinstance(e, BinOp):
        da, db = differentiate(e.left), differentiate(e.right)
        if e.op == "+":
            return _add(da, db)
        if e.op == "-":
            return _sub(da, db)
        if e.op == "*":
            return _add(_mul(da, e.right), _mul(e.left, db))
        # quotient rule
        num = _sub(_mul(da, e.right), _mul(e.left, db))
        return _div(num, Pow(e.right, Const(2.0)))
    if isinstance(e, Pow):
        # exponent is r-free: d/dr u^c = c * u^(c-1) * u'
        du = differentiate(e.base)
        cm1 = _sub(e.exponent, Const(1.0))
        return _mul(_mul(e.exponent, Pow(e.base, cm1)), du)
    if isinstance(e, Call):
        u, du = e.arg, differentiate(e.arg)
        if e.fn == "sin":
            return _mul(Call("cos", u), du)
        if e.fn == "cos":
            return _neg(_mul(Call("sin", u), du))
        if e.fn == "tan":
            return _div(du, Pow(Call("cos", u), Const(2.0)))
        if e.fn == "exp":
            return _mul(Call("exp", u), du)
        if e.fn == "ln":
            return _div(du, u)
        if e.fn == "sqrt":
            return _div(du, _mul(Const(2.0), Call("sqrt", u)))
        if e.fn == "abs":
            # d|u|/dr = sign(u) u'; valid away from u = 0
            return _mul(_div(u, Call("abs", u)), du)
    raise TypeError(f"not an Expr node: {e!r}")


# --------------------------------------------------------------------------
# printing
# --------------------------------------------------------------------------

# precedence levels for parenthesization
_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _PREC_ADD if e.op in "+-" else _PREC_MUL
    if isinstance(e, Neg):
        return _PREC_UNARY
    if isinstance(e, Pow):
        return _PREC_POW
    if isinstance(e, Const) and e.value < 0:
        return _PREC_UNARY  # prints with a leading minus
    return _PREC_ATOM


def format_expr(e: Expr) -> str:
    """Render to source text that re-parses to an equivalent expression."""
    if isinstance(e, Const):
        v = e.value
        if v == int(v) and abs(v) < 1e16:
            return str(int(v))
        return repr(v)
    if isinstance(e, Var):
        return VAR_NAME
    if isinstance(e, Param):
        return e.name
    if isinstance(e, Neg):
        inner = format_expr(e.arg)
        if _prec(e.arg) < _PREC_UNARY:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, BinOp):
        lp, rp = _prec(e.left), _prec(e.right)
        mine = _prec(e)
        left = format_expr(e.left)
        right = format_expr(e.right)
        if lp < mine:
            left = f"({left})"
        # left-associative: the right operand needs parens at equal precedence
        # for - and /, and always when looser
        if rp < mine or (rp == mine and e.op in "-/") or (e.op in "*/" and isinstance(e.right, Neg)):
            right = f"({right})"
        elif e.op in "+-" and isinstance(e.right, Neg):
            right = f"({right})"
        return f"{left} {e.op} {right}"
    if isinstance(e, Pow):
        base = format_expr(e.base)
        if _prec(e.base) < _PREC_ATOM:
            base = f"({base})"
        expo = format_expr(e.exponent)
        if _prec(e.exponent) < _PREC_ATOM:
            expo = f"({expo})"
        return f"{base}^{expo}"
    if isinstance(e, Call):
        return f"{e.fn}({format_expr(e.arg)})"
    raise TypeError(f"not an Expr node: {e!r}")


# --------------------------------------------------------------------------
# compilation
# --------------------------------------------------------------------------

def compile_expr(e: Expr, bindings: Mapping[str, float] | None = None) -> Callable[[float], float]:
    """Compile to a plain-Python callable r -> value with parameters baked in.

    This is the hot path for integrators and quadrature: no tree walking, no
    domain checks beyond what the math functions themselves raise (ValueError
    on e.g. log of a non-positive number).  Use evaluate() when you want
    checked errors.
    """
    bindings = bindings or {}
    src = "lambda r: " + _to_python(e, bindings)
    env = {"math": math, "abs": abs, "__builtins__": {}}
    return eval(compile(src, "<expr>", "eval"), env)


def _to_python(e: Expr, bindings: Mapping[str, float]) -> str:
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return "r"
    if isinstance(e, Param):
        if e.name not in bindings:
            raise ExprError(f"unbound parameter '{e.name}' at compile time")
        return repr(float(bindings[e.name]))
    if isinstance(e, Neg):
        return f"(-{_to_python(e.arg, bindings)})"
    if isinstance(e, BinOp):
        return f"({_to_python(e.left, bindings)} {e.op} {_to_python(e.right, bindings)})"
    if isinstance(e, Pow):
        base = _to_python(e.base, bindings)
        if isinstance(e.exponent, Const) and float(e.exponent.value).is_integer() \
                and abs(e.exponent.value) <= 64:
            return f"({base} ** {int(e.exponent.value)})"
        expo = _to_python(e.exponent, bindings)
        return f"math.pow({base}, {expo})"
    if isinstance(e, Call):
        arg = _to_python(e.arg, bindings)
        fn = {"ln": "math.log", "abs": "abs"}.get(e.fn, f"math.{e.fn}")
        return f"{fn}({arg})"
    raise TypeError(f"not an Expr node: {e!r}")
