"""Arithmetic expressions in x for forcing terms given as text."""

import re
from dataclasses import dataclass
from typing import Any, Iterable, Iterator, Optional, Sequence, Union

import numpy as np

from ..models.beam import ForcingTerm, Singularity
from ..utils.errors import DomainError, ExpressionSyntaxError

FUNCTIONS = {
    "sin": np.sin,
    "cos": np.cos,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "exp": np.exp,
    "sqrt": np.sqrt,
    "abs": np.abs,
}

_TOKEN = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()−]))"
)


@dataclass(frozen=True)
class Number:
    value: float

    def evaluate(self, x: np.ndarray) -> Any:
        return np.full_like(x, self.value)

    def pretty(self) -> str:
        return repr(self.value) if self.value >= 0 else f"(-{self.value * -1.0!r})"

    def children(self) -> tuple["Expr", ...]:
        return ()


@dataclass(frozen=True)
class Variable:
    name: str = "x"

    def evaluate(self, x: np.ndarray) -> Any:
        return x

    def pretty(self) -> str:
        return self.name

    def children(self) -> tuple["Expr", ...]:
        return ()


@dataclass(frozen=True)
class Negate:
    operand: "Expr"

    def evaluate(self, x: np.ndarray) -> Any:
        return -self.operand.evaluate(x)

    def pretty(self) -> str:
        return f"(-{self.operand.pretty()})"

    def children(self) -> tuple["Expr", ...]:
        return (self.operand,)


@dataclass(frozen=True)
class BinaryOp:
    op: str
    left: "Expr"
    right: "Expr"

    @property
    def flagged(self) -> bool:
        """Division may be singular where the denominator vanishes."""
        return self.op == "/"

    def evaluate(self, x: np.ndarray) -> Any:
        a, b = self.left.evaluate(x), self.right.evaluate(x)
        if self.op == "+":
            return a + b
        if self.op == "-":
            return a - b
        if self.op == "*":
            return a * b
        if self.op == "/":
            return a / b
        return np.power(a, b)

    def pretty(self) -> str:
        return f"({self.left.pretty()} {self.op} {self.right.pretty()})"

    def children(self) -> tuple["Expr", ...]:
        return (self.left, self.right)


@dataclass(frozen=True)
class Call:
    name: str
    arg: "Expr"

    @property
    def flagged(self) -> bool:
        """sqrt has an infinite derivative at zero."""
        return self.name == "sqrt"

    def evaluate(self, x: np.ndarray) -> Any:
        return FUNCTIONS[self.name](self.arg.evaluate(x))

    def pretty(self) -> str:
        return f"{self.name}({self.arg.pretty()})"

    def children(self) -> tuple["Expr", ...]:
        return (self.arg,)


Expr = Union[Number, Variable, Negate, BinaryOp, Call]


def walk(node: Expr) -> Iterator[Expr]:
    """Pre-order traversal."""
    yield node
    for child in node.children():
        yield from walk(child)


def flagged_nodes(node: Expr) -> list[Expr]:
    """Division and sqrt nodes, candidates for singularities."""
    return [n for n in walk(node) if getattr(n, "flagged", False)]


def has_variable(node: Expr) -> bool:
    return any(isinstance(n, Variable) for n in walk(node))


def evaluate(node: Expr, x: Any) -> Any:
    """Evaluate on a scalar or array; float for scalar input."""
    xs = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.asarray(node.evaluate(xs), dtype=float)
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    position: int


def tokenize(src: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(src):
        if src[pos:].strip() == "":
            break
        match = _TOKEN.match(src, pos)
        if match is None:
            offset = len(src[pos:]) - len(src[pos:].lstrip())
            raise ExpressionSyntaxError(f"unexpected character {src[pos + offset]!r}", pos + offset, src)
        kind = match.lastgroup or "op"
        text = match.group(kind)
        start = match.start(kind)
        tokens.append(_Token(kind, "-" if text == "−" else text, start))
        pos = match.end()
    tokens.append(_Token("end", "", len(src)))
    return tokens


class _Parser:
    """
    Recursive descent over

        expr   := term (('+' | '-') term)*
        term   := factor (('*' | '/') factor)*
        factor := unary ('^' factor)?
        unary  := '-' unary | atom
        atom   := number | 'x' | call '(' expr ')' | '(' expr ')'
    """

    def __init__(self, src: str):
        self.src = src
        self.tokens = tokenize(src)
        self.index = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def error(self, message: str, token: Optional[_Token] = None) -> ExpressionSyntaxError:
        token = self.current if token is None else token
        return ExpressionSyntaxError(message, token.position, self.src)

    def advance(self) -> _Token:
        token = self.current
        self.index += 1
        return token

    def accept(self, *ops: str) -> Optional[_Token]:
        if self.current.kind == "op" and self.current.text in ops:
            return self.advance()
        return None

    def expect(self, op: str) -> _Token:
        token = self.accept(op)
        if token is None:
            found = self.current.text or "end of input"
            raise self.error(f"expected {op!r}, found {found!r}")
        return token

    def parse(self) -> Expr:
        node = self.expr()
        if self.current.kind != "end":
            raise self.error(f"unexpected {self.current.text!r} (implicit multiplication is not allowed)")
        return node

    def expr(self) -> Expr:
        node = self.term()
        while (op := self.accept("+", "-")) is not None:
            node = BinaryOp(op.text, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while (op := self.accept("*", "/")) is not None:
            node = BinaryOp(op.text, node, self.factor())
        return node

    def factor(self) -> Expr:
        base = self.unary()
        if self.accept("^") is not None:
            return BinaryOp("^", base, self.factor())
        return base

    def unary(self) -> Expr:
        if self.accept("-") is not None:
            return Negate(self.unary())
        return self.atom()

    def atom(self) -> Expr:
        token = self.current
        if token.kind == "number":
            self.advance()
            return Number(float(token.text))
        if token.kind == "name":
            self.advance()
            if token.text == "x":
                return Variable()
            if token.text not in FUNCTIONS:
                raise self.error(f"unknown name {token.text!r}", token)
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Call(token.text, arg)
        if self.accept("(") is not None:
            node = self.expr()
            self.expect(")")
            return node
        found = token.text or "end of input"
        raise self.error(f"unexpected {found!r}")


def parse(src: str) -> Expr:
    """
    Parse an expression in x.

    Raises:
        ExpressionSyntaxError: With the offending position
    """
    if not src or not src.strip():
        raise ExpressionSyntaxError("empty expression", 0, src)
    return _Parser(src).parse()


def constant_value(src: str) -> float:
    """Value of an expression without x, e.g. "2/3"."""
    node = parse(src)
    if has_variable(node):
        raise ExpressionSyntaxError("constant expected, found a reference to x", 0, src)
    return float(evaluate(node, 0.0))


def to_forcing(
    ast: Expr, singular_hints: Iterable[Sequence[float]] = (), label: Optional[str] = None
) -> ForcingTerm:
    """
    ForcingTerm evaluating the expression, with user-declared singularities.

    Args:
        ast: Parsed expression
        singular_hints: (location, exponent) pairs, location in [0, 1], exponent in (-1, 0)
        label: Text shown in reports (defaults to the pretty form)

    Raises:
        DomainError: If a hint is outside the admissible range
    """
    singularities = []
    for location, exponent in singular_hints:
        if not 0.0 <= location <= 1.0:
            raise DomainError(f"singularity location {location!r} outside [0, 1]")
        if not -1.0 < exponent < 0.0:
            raise DomainError(f"singularity exponent {exponent!r} must lie in (-1, 0) to be integrable")
        singularities.append(Singularity(location=location, exponent=exponent))
    return ForcingTerm(
        eval=lambda x: evaluate(ast, x),
        singularities=tuple(singularities),
        label=ast.pretty() if label is None else label,
    )
