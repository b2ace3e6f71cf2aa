"""Amplitude expressions such as ``1/sqrt(2)`` or ``3/5 + 4/5*i``.

Grammar (whitespace insignificant)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := number | 'i' | 'sqrt' '(' expr ')' | '(' expr ')' | '-' factor

Numbers are integers or decimals with an optional exponent (``1e-05``) so
that 17-significant-digit floats written by the serializer read back exactly.
"""
import decimal
import math
import re
from dataclasses import dataclass
from typing import Union

from .errors import AmpEvaluationError, AmpSyntaxError

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<sqrt>sqrt\b)
  | (?P<i>i\b)
  | (?P<op>[-+*/()])
""", re.VERBOSE)


@dataclass(frozen=True)
class Num:
    text: str


@dataclass(frozen=True)
class Imag:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "AmpExpr"


@dataclass(frozen=True)
class Sqrt:
    operand: "AmpExpr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "AmpExpr"
    right: "AmpExpr"


AmpExpr = Union[Num, Imag, Neg, Sqrt, BinOp]


def _byte_offset(text, pos):
    return len(text[:pos].encode("utf-8"))


def _tokenize(text):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise AmpSyntaxError(f"unexpected character {text[pos]!r}", _byte_offset(text, pos), text)
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group(), pos))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def take(self):
        tok = self.tokens[self.k]
        self.k += 1
        return tok

    def expect(self, value):
        kind, val, pos = self.take()
        if val != value or kind == "end":
            found = "end of input" if kind == "end" else repr(val)
            raise AmpSyntaxError(f"expected {value!r}, found {found}", _byte_offset(self.text, pos),
                                 self.text)

    def expr(self):
        node = self.term()
        while self.peek()[1] in ("+", "-") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek()[1] in ("*", "/") and self.peek()[0] == "op":
            op = self.take()[1]
            node = BinOp(op, node, self.factor())
        return node

    def factor(self):
        kind, val, pos = self.take()
        if kind == "num":
            return Num(val)
        if kind == "i":
            return Imag()
        if kind == "sqrt":
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            return Sqrt(inner)
        if kind == "op" and val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        if kind == "op" and val == "-":
            return Neg(self.factor())
        found = "end of input" if kind == "end" else repr(val)
        raise AmpSyntaxError(f"unexpected {found}", _byte_offset(self.text, pos), self.text)


def parse_amp(text: str) -> AmpExpr:
    """Parse ``text`` into an expression tree; raises :class:`AmpSyntaxError`."""
    if not isinstance(text, str):
        raise TypeError(f"amplitude expression must be a string, not {type(text).__name__}")
    p = _Parser(text)
    if p.peek()[0] == "end":
        raise AmpSyntaxError("empty expression", 0, text)
    node = p.expr()
    kind, val, pos = p.peek()
    if kind != "end":
        raise AmpSyntaxError(f"unexpected {val!r}", _byte_offset(text, pos), text)
    return node


_CTX = decimal.Context(prec=50, Emax=999999, Emin=-999999,
                       traps=[decimal.InvalidOperation, decimal.Overflow])
_ZERO = decimal.Decimal(0)


def _eval(e):
    """``(re, im)`` as 50-digit decimals."""
    if isinstance(e, Num):
        return _CTX.create_decimal(e.text), _ZERO
    if isinstance(e, Imag):
        return _ZERO, decimal.Decimal(1)
    if isinstance(e, Neg):
        a, b = _eval(e.operand)
        return -a, -b
    if isinstance(e, Sqrt):
        a, b = _eval(e.operand)
        if b != 0 or a < 0:
            raise AmpEvaluationError(
                f"sqrt of {_to_complex(a, b)} is outside the nonnegative reals")
        return _CTX.sqrt(a), _ZERO
    if isinstance(e, BinOp):
        a, b = _eval(e.left)
        c, d = _eval(e.right)
        if e.op == "+":
            return _CTX.add(a, c), _CTX.add(b, d)
        if e.op == "-":
            return _CTX.subtract(a, c), _CTX.subtract(b, d)
        if e.op == "*":
            return (_CTX.subtract(_CTX.multiply(a, c), _CTX.multiply(b, d)),
                    _CTX.add(_CTX.multiply(a, d), _CTX.multiply(b, c)))
        den = _CTX.add(_CTX.multiply(c, c), _CTX.multiply(d, d))
        if den == 0:
            raise AmpEvaluationError("division by zero")
        if d == 0:
            return _CTX.divide(a, c), _CTX.divide(b, c)
        return (_CTX.divide(_CTX.add(_CTX.multiply(a, c), _CTX.multiply(b, d)), den),
                _CTX.divide(_CTX.subtract(_CTX.multiply(b, c), _CTX.multiply(a, d)), den))
    raise TypeError(f"not an amplitude expression: {e!r}")


def _to_complex(a, b) -> complex:
    z = complex(float(a), float(b))
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise AmpEvaluationError(f"value {a} + {b}*i overflows double precision")
    return z


def eval_amp(e: AmpExpr) -> complex:
    """Evaluate with 50 significant digits and round once to double precision,
    so constants such as ``1/sqrt(2)`` come out correctly rounded."""
    return _to_complex(*_eval(e))


def amp(text: str) -> complex:
    """Parse and evaluate in one call."""
    return eval_amp(parse_amp(text))


def to_text(e: AmpExpr) -> str:
    """Fully parenthesised rendering; reparses to an identical tree."""
    if isinstance(e, Num):
        return e.text
    if isinstance(e, Imag):
        return "i"
    if isinstance(e, Neg):
        return f"-({to_text(e.operand)})"
    if isinstance(e, Sqrt):
        return f"sqrt({to_text(e.operand)})"
    return f"({to_text(e.left)} {e.op} {to_text(e.right)})"


def format_amp(z: complex) -> str:
    """Shortest round-tripping decimal text that :func:`amp` reads back bit-for-bit."""
    z = complex(z)
    re_txt = repr(float(z.real))
    if z.imag == 0.0:
        return _literal(re_txt)
    im_txt = repr(float(z.imag))
    if z.real == 0.0:
        return f"{_literal(im_txt)}*i"
    return f"{_literal(re_txt)} + {_literal(im_txt)}*i"


def _literal(txt):
    if txt in ("inf", "-inf", "nan"):
        raise AmpEvaluationError(f"non-finite amplitude {txt}")
    # repr gives the shortest round-tripping form; the grammar has no unary plus
    return txt


__all__ = ["AmpExpr", "parse_amp", "eval_amp", "amp", "to_text", "format_amp"]
