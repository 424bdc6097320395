"""
Recursive-descent parser for field expressions

Grammar:
    expr   := term (('+'|'-') term)*
    term   := unary (('*'|'/') unary)*
    unary  := ('-'|'+') unary | factor
    factor := base ('^' ['-'] integer)?
    base   := VAR | number | 'i' | 'pi' | func '(' expr ')' | '(' expr ')'
            | 'poly[' coeff (',' coeff)* ']' ['(' expr ')']
    coeff  := ['-'] cnum (('+'|'-') cnum)*
    cnum   := decimal ['i'] | 'i'
    func   in exp, log, sin, cos, tan, sec
"""

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

from .exceptions import ExprSyntaxError, UnknownIdentifierError
from .expr import (
    FUNCTIONS, Add, Div, ExprAst, Func, Lit, Mul, Neg, Node, Pow, Poly, Sub, Var,
)


CONSTANTS = {"pi": math.pi}


@dataclass(frozen=True)
class Token:
    kind: str  # number, ident, op, end
    text: str
    offset: int
    imaginary: bool = False


def _byte_offset(source: str, index: int) -> int:
    return len(source[:index].encode("utf-8"))


def tokenize(source: str) -> List[Token]:
    """Split source into tokens carrying byte offsets"""
    tokens: List[Token] = []
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch.isspace():
            i += 1
            continue
        start = i
        if ch.isdigit() or (ch == "." and i + 1 < n and source[i + 1].isdigit()):
            while i < n and source[i].isdigit():
                i += 1
            if i < n and source[i] == ".":
                i += 1
                while i < n and source[i].isdigit():
                    i += 1
            if i < n and source[i] in "eE":
                j = i + 1
                if j < n and source[j] in "+-":
                    j += 1
                if j < n and source[j].isdigit():
                    i = j
                    while i < n and source[i].isdigit():
                        i += 1
            imaginary = False
            if i < n and source[i] == "i" and not (i + 1 < n and source[i + 1].isalnum()):
                imaginary = True
                i += 1
            text = source[start:i].rstrip("i") if imaginary else source[start:i]
            tokens.append(Token("number", text, _byte_offset(source, start), imaginary))
            continue
        if ch.isalpha() or ch == "_":
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
            tokens.append(Token("ident", source[start:i], _byte_offset(source, start)))
            continue
        if ch in "+-*/^()[],":
            tokens.append(Token("op", ch, _byte_offset(source, start)))
            i += 1
            continue
        raise ExprSyntaxError(f"Unexpected character {ch!r}", _byte_offset(source, start))
    tokens.append(Token("end", "", _byte_offset(source, n)))
    return tokens


class Parser:
    """Parser over a token list for one variable name"""

    def __init__(self, source: str, variable: str = "z"):
        self.source = source
        self.variable = variable
        self.tokens = tokenize(source)
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def _advance(self) -> Token:
        token = self.tokens[self.pos]
        if token.kind != "end":
            self.pos += 1
        return token

    def _at(self, text: str) -> bool:
        token = self.current
        return token.kind == "op" and token.text == text

    def _expect(self, text: str) -> Token:
        if not self._at(text):
            self._fail([text])
        return self._advance()

    def _fail(self, expected: Sequence[str], message: Optional[str] = None) -> None:
        token = self.current
        if message is None:
            found = "end of input" if token.kind == "end" else repr(token.text)
            message = f"Unexpected {found}"
        raise ExprSyntaxError(message, token.offset, expected)

    def parse(self) -> ExprAst:
        node = self.expr()
        if self.current.kind != "end":
            self._fail(["+", "-", "*", "/", "^", "end of input"])
        return ExprAst(node, self.variable)

    def expr(self) -> Node:
        node = self.term()
        while self._at("+") or self._at("-"):
            op = self._advance().text
            right = self.term()
            node = Add(node, right) if op == "+" else Sub(node, right)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self._at("*") or self._at("/"):
            op = self._advance().text
            right = self.unary()
            node = Mul(node, right) if op == "*" else Div(node, right)
        return node

    def unary(self) -> Node:
        if self._at("-"):
            self._advance()
            return Neg(self.unary())
        if self._at("+"):
            self._advance()
            return self.unary()
        return self.factor()

    def factor(self) -> Node:
        node = self.base()
        if self._at("^"):
            self._advance()
            sign = 1
            if self._at("-"):
                self._advance()
                sign = -1
            token = self.current
            if token.kind != "number" or token.imaginary or not token.text.isdigit():
                self._fail(["integer"])
            self._advance()
            node = Pow(node, sign * int(token.text))
        return node

    def base(self) -> Node:
        token = self.current
        if token.kind == "number":
            self._advance()
            value = float(token.text)
            return Lit(complex(0, value) if token.imaginary else complex(value))
        if token.kind == "ident":
            return self._identifier()
        if self._at("("):
            self._advance()
            node = self.expr()
            self._expect(")")
            return node
        self._fail([self.variable, "number", "function", "("])
        raise AssertionError("unreachable")

    def _identifier(self) -> Node:
        token = self._advance()
        name = token.text
        if name == self.variable:
            return Var(name)
        if name == "i":
            return Lit(1j)
        if name in CONSTANTS:
            return Lit(complex(CONSTANTS[name]))
        if name in FUNCTIONS:
            self._expect("(")
            arg = self.expr()
            self._expect(")")
            return Func(name, arg)
        if name == "poly":
            return self._poly()
        raise UnknownIdentifierError(name, token.offset)

    def _poly(self) -> Node:
        self._expect("[")
        coeffs = [self._coefficient()]
        while self._at(","):
            self._advance()
            coeffs.append(self._coefficient())
        self._expect("]")
        arg: Node = Var(self.variable)
        if self._at("("):
            self._advance()
            arg = self.expr()
            self._expect(")")
        return Poly(tuple(coeffs), arg)

    def _coefficient(self) -> complex:
        sign = 1.0
        if self._at("-"):
            self._advance()
            sign = -1.0
        value = sign * self._complex_number()
        while self._at("+") or self._at("-"):
            sign = 1.0 if self._advance().text == "+" else -1.0
            value += sign * self._complex_number()
        return value

    def _complex_number(self) -> complex:
        token = self.current
        if token.kind == "number":
            self._advance()
            value = float(token.text)
            return complex(0, value) if token.imaginary else complex(value)
        if token.kind == "ident" and token.text == "i":
            self._advance()
            return 1j
        self._fail(["number", "i"])
        raise AssertionError("unreachable")


def parse(source: str, variable: str = "z") -> ExprAst:
    """
    Parse expression text

    Args:
        source: expression in the field grammar
        variable: name of the independent variable ('z', or 'w' for R(w))

    Returns:
        ExprAst whose printed form re-parses to the same normalized hash

    Raises:
        ExprSyntaxError: with byte offset and expected-token set
        UnknownIdentifierError: for names that are not functions or constants
    """
    return Parser(source, variable).parse()
