"""Text format for operators.

Grammar (whitespace-insensitive, ``#`` starts a comment)::

    source   := operator | compose
    compose  := "compose" "{" source "," source "}" [name]
    operator := header body [name]   (name may also precede the header)
    header   := "dim" INT "order" INT "from" INT "to" INT
    body     := "[" row (";" row)* "]"
    row      := entry ("," entry)*
    entry    := ["-"] term (("+" | "-") term)*
    term     := [RATIONAL ["*"]] factor*  |  RATIONAL
    factor   := "d" INT ["^" INT]
    name     := "name" STRING

``compose { A , B }`` is the operator A o B (B applied first).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import DegreeError, DimensionMismatchError, DSLSyntaxError, ZeroOperatorError
from .operator import Operator, compose
from .poly import Poly, format_poly

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|\#[^\n]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<deriv>d(?P<didx>[0-9]+))
  | (?P<word>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<int>[0-9]+)
  | (?P<punct>[\[\];,{}+\-*/^])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DSLSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup if m.lastgroup != "didx" else "deriv"
        if m.group("deriv") is not None:
            kind = "deriv"
        chunk = m.group(0)
        if kind != "ws":
            tokens.append(Token(kind, chunk, line, col))
        nl = chunk.count("\n")
        if nl:
            line += nl
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Token | None = None):
        tok = tok or self.tok
        found = tok.text or "end of input"
        return DSLSyntaxError(f"{msg}, found {found!r}", tok.line, tok.column)

    def accept(self, text: str) -> Token | None:
        if self.tok.text == text and self.tok.kind in ("punct", "word"):
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            raise self.error(f"expected {text!r}")
        return t

    def expect_int(self, what: str) -> int:
        if self.tok.kind != "int":
            raise self.error(f"expected {what}")
        v = int(self.tok.text)
        self.i += 1
        return v

    def maybe_name(self) -> str | None:
        if self.accept("name"):
            if self.tok.kind != "string":
                raise self.error("expected a quoted name")
            raw = self.tok.text[1:-1]
            self.i += 1
            return re.sub(r"\\(.)", r"\1", raw)
        return None

    def parse_source(self) -> Operator:
        name = self.maybe_name()
        if self.accept("compose"):
            self.expect("{")
            outer = self.parse_source()
            sep = self.expect(",")
            inner = self.parse_source()
            self.expect("}")
            name = self.maybe_name() or name
            try:
                return compose(outer, inner, name)
            except DimensionMismatchError as exc:
                raise DSLSyntaxError(str(exc), sep.line, sep.column) from exc
        op = self.parse_operator(name)
        return op

    def parse_operator(self, name: str | None) -> Operator:
        start = self.tok
        self.expect("dim")
        n = self.expect_int("space dimension")
        self.expect("order")
        k = self.expect_int("order")
        self.expect("from")
        dim_v = self.expect_int("source dimension")
        self.expect("to")
        dim_w = self.expect_int("target dimension")
        for value, what in ((n, "dim"), (k, "order"), (dim_v, "from"), (dim_w, "to")):
            if value < 1:
                raise DSLSyntaxError(f"'{what}' must be positive", start.line, start.column)
        self.expect("[")
        rows = [self.parse_row(n, k, 1)]
        while self.accept(";"):
            rows.append(self.parse_row(n, k, len(rows) + 1))
        close = self.expect("]")
        name = self.maybe_name() or name
        if len(rows) != dim_w:
            raise DSLSyntaxError(f"expected {dim_w} rows, got {len(rows)}", close.line, close.column)
        for r, row in enumerate(rows):
            if len(row) != dim_v:
                raise DSLSyntaxError(f"row {r + 1} has {len(row)} entries, expected {dim_v}", close.line, close.column)
        coeffs: dict = {}
        for r, row in enumerate(rows):
            for c, poly in enumerate(row):
                for beta, val in poly.terms.items():
                    mat = coeffs.setdefault(beta, [[Fraction(0)] * dim_v for _ in range(dim_w)])
                    mat[r][c] = val
        if not coeffs:
            raise ZeroOperatorError("all symbol entries are zero")
        return Operator(n, k, dim_v, dim_w, coeffs, name)

    def parse_row(self, n: int, k: int, row: int) -> list[Poly]:
        entries = [self.parse_entry(n, k, row, 1)]
        while self.accept(","):
            entries.append(self.parse_entry(n, k, row, len(entries) + 1))
        return entries

    def parse_entry(self, n: int, k: int, row: int, col: int) -> Poly:
        first = self.tok
        sign = -1 if self.accept("-") else 1
        total = Poly(n)
        while True:
            tok = self.tok
            coeff, expo = self.parse_term(n)
            if coeff and sum(expo) != k:
                raise DegreeError(
                    f"entry ({row},{col}) has a term of degree {sum(expo)}, expected {k}",
                    (row, col),
                    tok.line,
                    tok.column,
                )
            total = total + Poly(n, {expo: sign * coeff})
            if self.accept("+"):
                sign = 1
            elif self.accept("-"):
                sign = -1
            else:
                break
        if self.tok.text not in (",", ";", "]"):
            raise self.error(f"malformed entry ({row},{col}) starting at line {first.line}")
        return total

    def parse_term(self, n: int) -> tuple[Fraction, tuple[int, ...]]:
        coeff = Fraction(1)
        have_coeff = False
        if self.tok.kind == "int":
            num = int(self.tok.text)
            self.i += 1
            den = 1
            if self.accept("/"):
                tok = self.tok
                den = self.expect_int("denominator")
                if den == 0:
                    raise DSLSyntaxError("zero denominator", tok.line, tok.column)
            coeff = Fraction(num, den)
            have_coeff = True
            self.accept("*")
        expo = [0] * n
        have_factor = False
        while self.tok.kind == "deriv":
            tok = self.tok
            idx = int(tok.text[1:])
            if not 1 <= idx <= n:
                raise DSLSyntaxError(f"derivative index {idx} outside 1..{n}", tok.line, tok.column)
            self.i += 1
            power = 1
            if self.accept("^"):
                power = self.expect_int("exponent")
            expo[idx - 1] += power
            have_factor = True
        if not (have_coeff or have_factor):
            raise self.error("expected a coefficient or a derivative")
        return coeff, tuple(expo)


def parse_operator(text: str) -> Operator:
    p = _Parser(text)
    op = p.parse_source()
    if p.tok.kind != "eof":
        raise p.error("unexpected trailing input")
    return op


def format_operator(op: Operator) -> str:
    """Canonical text form; ``parse_operator`` inverts it."""
    names = [f"d{i + 1}" for i in range(op.n)]
    rows = [", ".join(format_poly(p, names) for p in row) for row in op.symbol.entries]
    out = f"dim {op.n} order {op.k} from {op.dim_v} to {op.dim_w}\n[ " + " ;\n  ".join(rows) + " ]"
    if op.name is not None:
        escaped = op.name.replace("\\", "\\\\").replace('"', '\\"')
        out += f'\nname "{escaped}"'
    return out + "\n"
