"""Parser and evaluators for the scalar expression language.

Grammar (whitespace-insensitive)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := ('+' | '-') unary | power
    power   := atom ('^' exponent)?
    exponent:= ('+' | '-')? NUMBER | '(' exponent ')'      # integer-valued
    atom    := NUMBER | VAR | FUNC '(' expr ')' | '(' expr ')'

Variables are ``x1 x2 x3``; functions are ``sin cos exp sqrt``.  Unary minus
binds looser than ``^`` so ``-x1^2`` is ``-(x1^2)``.  Chained powers are
rejected rather than guessing an associativity.
"""

import math
import re
from dataclasses import dataclass

from zerosurf.errors import DomainError, ExpressionSyntaxError, UnknownIdentifier
from zerosurf.field.jet import Jet

VARIABLES = {"x1": 0, "x2": 1, "x3": 2}
FUNCTIONS = ("sin", "cos", "exp", "sqrt")

_TOKEN_RE = re.compile(
    r"\s*(?:"
    r"(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()])"
    r")"
)


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Neg:
    arg: object


@dataclass(frozen=True)
class BinOp:
    op: str
    left: object
    right: object


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int


@dataclass(frozen=True)
class Call:
    func: str
    arg: object


def tokenize(text):
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ExpressionSyntaxError(f"bad token {text[pos:].lstrip()[:1]!r}", pos)
        kind = m.lastgroup
        tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text):
        self.tokens = tokenize(text)
        self.i = 0
        self.end = len(text)

    def peek(self):
        if self.i < len(self.tokens):
            return self.tokens[self.i]
        return (None, None, self.end)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, value):
        kind, text, pos = self.take()
        if text != value:
            found = "end of input" if kind is None else repr(text)
            raise ExpressionSyntaxError(f"expected {value!r}, found {found}", pos)

    def parse(self):
        if not self.tokens:
            raise ExpressionSyntaxError("empty expression", 0)
        node = self.expr()
        kind, text, pos = self.peek()
        if kind is not None:
            raise ExpressionSyntaxError(f"unexpected {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek()[1] in ("*", "/"):
            op = self.take()[1]
            node = BinOp(op, node, self.unary())
        return node

    def unary(self):
        tok = self.peek()[1]
        if tok == "-":
            self.take()
            return Neg(self.unary())
        if tok == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            pos = self.peek()[2]
            base = Pow(base, self.exponent(pos))
            if self.peek()[1] == "^":
                raise ExpressionSyntaxError("chained '^' is ambiguous; add parentheses", self.peek()[2])
        return base

    def exponent(self, pos):
        kind, text, _ = self.peek()
        if text == "(":
            self.take()
            n = self.exponent(pos)
            self.expect(")")
            return n
        sign = 1
        if text in ("+", "-"):
            self.take()
            sign = -1 if text == "-" else 1
            kind, text, _ = self.peek()
        if kind != "num":
            raise ExpressionSyntaxError("exponent must be an integer constant", pos)
        self.take()
        value = float(text)
        if not value.is_integer():
            raise ExpressionSyntaxError(f"non-integer exponent {text}", pos)
        return sign * int(value)

    def atom(self):
        kind, text, pos = self.take()
        if kind == "num":
            return Num(float(text))
        if kind == "name":
            if text in VARIABLES:
                return Var(VARIABLES[text])
            if text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(text, arg)
            raise UnknownIdentifier(text)
        if text == "(":
            node = self.expr()
            self.expect(")")
            return node
        found = "end of input" if kind is None else repr(text)
        raise ExpressionSyntaxError(f"unexpected {found}", pos)


def parse(text):
    """Parse ``text`` into an AST of frozen node dataclasses."""
    return _Parser(text).parse()


def _float_call(name, a):
    if name == "sin":
        return math.sin(a)
    if name == "cos":
        return math.cos(a)
    if name == "exp":
        try:
            return math.exp(a)
        except OverflowError as exc:
            raise DomainError("exp overflow") from exc
    if a < 0.0:
        raise DomainError(f"sqrt of negative value {a!r}")
    return math.sqrt(a)


def evaluate_value(node, x):
    """Value-only evaluation at a point ``x`` (sequence of three floats)."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return float(x[node.index])
    if isinstance(node, Neg):
        return -evaluate_value(node.arg, x)
    if isinstance(node, BinOp):
        a = evaluate_value(node.left, x)
        b = evaluate_value(node.right, x)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if b == 0.0:
            raise DomainError("division by zero")
        return a / b
    if isinstance(node, Pow):
        a = evaluate_value(node.base, x)
        if node.exponent < 0 and a == 0.0:
            raise DomainError("zero raised to a negative power")
        return a**node.exponent
    if isinstance(node, Call):
        return _float_call(node.func, evaluate_value(node.arg, x))
    raise TypeError(f"not an expression node: {node!r}")


def evaluate_jet(node, x):
    """Value, gradient and Hessian in one forward pass."""
    if isinstance(node, Num):
        return Jet.constant(node.value)
    if isinstance(node, Var):
        return Jet.variable(x[node.index], node.index)
    if isinstance(node, Neg):
        return -evaluate_jet(node.arg, x)
    if isinstance(node, BinOp):
        a = evaluate_jet(node.left, x)
        b = evaluate_jet(node.right, x)
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        return a / b
    if isinstance(node, Pow):
        return evaluate_jet(node.base, x).ipow(node.exponent)
    if isinstance(node, Call):
        return getattr(evaluate_jet(node.arg, x), node.func)()
    raise TypeError(f"not an expression node: {node!r}")


def to_text(node):
    """Fully parenthesized source text that parses back to ``node``."""
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return f"x{node.index + 1}"
    if isinstance(node, Neg):
        return f"(-{to_text(node.arg)})"
    if isinstance(node, BinOp):
        return f"({to_text(node.left)} {node.op} {to_text(node.right)})"
    if isinstance(node, Pow):
        return f"({to_text(node.base)})^({node.exponent})"
    if isinstance(node, Call):
        return f"{node.func}({to_text(node.arg)})"
    raise TypeError(f"not an expression node: {node!r}")
