"""Lexer, expression parser and expression printer shared by the IrGL
frontend and the operator-code mini-language."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from irgl import ast
from irgl.diagnostics import ParseError, SourceSpan, error

INT64_MAX = 2**63 - 1

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<linecomment>//[^\n]*)
  | (?P<blockcomment>/\*.*?\*/)
  | (?P<float>\d+\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>\+\+|--|\+=|-=|\*=|/=|%=|==|!=|<=|>=|&&|\|\||[-+*/%<>=!(){}\[\],;.:@&])
    """,
    re.VERBOSE | re.DOTALL,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident, int, float, string, op, eof
    text: str
    line: int
    col: int

    def span(self, file: str) -> SourceSpan:
        return SourceSpan(file, self.line, self.col, len(self.text))


def tokenize(text: str, filename: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            if text.startswith("/*", pos):
                msg = "unterminated block comment"
            elif text[pos] == '"':
                msg = "unterminated string literal"
            else:
                msg = f"unexpected character {text[pos]!r}"
            raise ParseError([error("syntax", msg, SourceSpan(filename, line, col, 1))])
        kind = m.lastgroup
        tok = m.group()
        col = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "blockcomment":
            nls = tok.count("\n")
            if nls:
                line += nls
                line_start = pos + tok.rfind("\n") + 1
        elif kind not in ("ws", "linecomment"):
            if kind == "int" and int(tok) > INT64_MAX:
                raise ParseError([error("syntax", f"integer literal {tok} does not fit in 64 bits",
                                        SourceSpan(filename, line, col, len(tok)))])
            tokens.append(Token(kind, tok, line, col))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token], filename: str):
        self.tokens = tokens
        self.pos = 0
        self.filename = filename

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def peek(self, offset: int = 1) -> Token:
        i = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[i]

    def next(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("op", "ident")

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            return self.next()
        return None

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail(f"expected {text!r}")
        return self.next()

    def expect_ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident":
            self.fail(f"expected {what}")
        return self.next()

    def span(self, tok: Optional[Token] = None) -> SourceSpan:
        return (tok or self.tok).span(self.filename)

    def fail(self, message: str, tok: Optional[Token] = None, rule: str = "syntax"):
        t = tok or self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError([error(rule, f"{message}, found {found}", t.span(self.filename))])


# ---------------------------------------------------------------------------
# Expression parsing
# ---------------------------------------------------------------------------

_BINARY_LEVELS: list[tuple[str, ...]] = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]

PRECEDENCE: dict[str, int] = {op: i + 1 for i, level in enumerate(_BINARY_LEVELS) for op in level}
UNARY_PREC = len(_BINARY_LEVELS) + 1
POSTFIX_PREC = UNARY_PREC + 1

# Words that can never be used as plain identifiers in expressions.
RESERVED = frozenset({
    "Kernel", "ForAll", "In", "Atomic", "Else", "Exclusive", "SyncRunningThreads",
    "Retry", "Respawn", "ReduceAndReturn", "Invoke", "Iterate", "Until", "Initial",
    "Pipe", "Once", "Names", "Global", "Module", "And", "Or",
    "For", "for", "While", "while", "If", "if", "else",
})


def parse_expr(ts: TokenStream, min_level: int = 0) -> ast.Expr:
    return _parse_binary(ts, min_level)


def _parse_binary(ts: TokenStream, level: int) -> ast.Expr:
    if level >= len(_BINARY_LEVELS):
        return _parse_unary(ts)
    left = _parse_binary(ts, level + 1)
    ops = _BINARY_LEVELS[level]
    while ts.tok.kind == "op" and ts.tok.text in ops:
        op_tok = ts.next()
        right = _parse_binary(ts, level + 1)
        left = ast.Binary(op_tok.text, left, right, span=_span_of(left) or ts.span(op_tok))
    return left


def _span_of(e: ast.Node) -> Optional[SourceSpan]:
    return getattr(e, "span", None)


def _parse_unary(ts: TokenStream) -> ast.Expr:
    t = ts.tok
    if t.kind == "op" and t.text in ("-", "!"):
        ts.next()
        nxt = ts.tok
        if t.text == "-" and nxt.kind in ("int", "float"):
            ts.next()
            if nxt.kind == "int":
                lit: ast.Expr = ast.IntLit(-int(nxt.text), span=ts.span(t))
            else:
                lit = ast.FloatLit(-float(nxt.text), span=ts.span(t))
            return _parse_postfix_ops(ts, lit)
        operand = _parse_unary(ts)
        return ast.Unary(t.text, operand, span=ts.span(t))
    return _parse_postfix_ops(ts, _parse_primary(ts))


def parse_args(ts: TokenStream) -> tuple[ast.Expr, ...]:
    ts.expect("(")
    args: list[ast.Expr] = []
    if not ts.at(")"):
        args.append(parse_expr(ts))
        while ts.accept(","):
            args.append(parse_expr(ts))
    ts.expect(")")
    return tuple(args)


def _parse_postfix_ops(ts: TokenStream, e: ast.Expr) -> ast.Expr:
    while True:
        if ts.at("["):
            t = ts.next()
            idx = parse_expr(ts)
            ts.expect("]")
            e = ast.Index(e, idx, span=_span_of(e) or ts.span(t))
        elif ts.at("."):
            ts.next()
            name = ts.expect_ident("field or method name")
            if ts.at("("):
                args = parse_args(ts)
                e = ast.MethodCall(e, name.text, args, span=_span_of(e) or ts.span(name))
            else:
                e = ast.Field(e, name.text, span=_span_of(e) or ts.span(name))
        else:
            return e


def _parse_primary(ts: TokenStream) -> ast.Expr:
    t = ts.tok
    if t.kind == "int":
        ts.next()
        return ast.IntLit(int(t.text), span=ts.span(t))
    if t.kind == "float":
        ts.next()
        return ast.FloatLit(float(t.text), span=ts.span(t))
    if t.kind == "string":
        ts.next()
        return ast.StrLit(_unescape(t.text[1:-1]), span=ts.span(t))
    if t.kind == "ident":
        if t.text in ("true", "false"):
            ts.next()
            return ast.BoolLit(t.text == "true", span=ts.span(t))
        if t.text in RESERVED:
            ts.fail("expected expression")
        ts.next()
        if ts.at("("):
            return ast.Call(t.text, parse_args(ts), span=ts.span(t))
        return ast.Name(t.text, span=ts.span(t))
    if ts.at("("):
        ts.next()
        e = parse_expr(ts)
        ts.expect(")")
        return e
    ts.fail("expected expression")
    raise AssertionError("unreachable")


_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\", "r": "\r", "0": "\0"}
_ESCAPES_REV = {v: k for k, v in _ESCAPES.items()}


def _unescape(s: str) -> str:
    out, i = [], 0
    while i < len(s):
        c = s[i]
        if c == "\\" and i + 1 < len(s):
            out.append(_ESCAPES.get(s[i + 1], s[i + 1]))
            i += 2
        else:
            out.append(c)
            i += 1
    return "".join(out)


def quote_string(s: str) -> str:
    return '"' + "".join("\\" + _ESCAPES_REV[c] if c in _ESCAPES_REV else c for c in s) + '"'


# ---------------------------------------------------------------------------
# Expression printing
# ---------------------------------------------------------------------------

_POSTFIX_NODES = (ast.Name, ast.Index, ast.Field, ast.Call, ast.MethodCall, ast.BoolLit, ast.StrLit)


def _prec(e: ast.Expr) -> int:
    if isinstance(e, ast.Binary):
        return PRECEDENCE[e.op]
    if isinstance(e, ast.Unary):
        return UNARY_PREC
    if isinstance(e, (ast.IntLit, ast.FloatLit)) and e.value < 0:
        return UNARY_PREC
    return POSTFIX_PREC


def format_float(v: float) -> str:
    r = repr(float(v))
    if r in ("inf", "-inf", "nan"):
        raise ValueError(f"float literal {r} has no source form")
    return r


def format_expr(e: ast.Expr, name_map=None) -> str:
    """Print ``e`` with the minimum parentheses that preserve its tree."""
    if isinstance(e, ast.IntLit):
        return str(e.value)
    if isinstance(e, ast.FloatLit):
        return format_float(e.value)
    if isinstance(e, ast.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, ast.StrLit):
        return quote_string(e.value)
    if isinstance(e, ast.Name):
        return e.id
    if isinstance(e, ast.Unary):
        inner = format_expr(e.operand)
        if not isinstance(e.operand, _POSTFIX_NODES):
            inner = f"({inner})"
        return f"{e.op}{inner}"
    if isinstance(e, ast.Binary):
        p = PRECEDENCE[e.op]
        left = format_expr(e.left)
        if _prec(e.left) < p:
            left = f"({left})"
        right = format_expr(e.right)
        if _prec(e.right) <= p:
            right = f"({right})"
        return f"{left} {e.op} {right}"
    if isinstance(e, ast.Index):
        return f"{_postfix_base(e.base)}[{format_expr(e.index)}]"
    if isinstance(e, ast.Field):
        return f"{_postfix_base(e.base)}.{e.name}"
    if isinstance(e, ast.Call):
        return f"{e.func}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, ast.MethodCall):
        return f"{_postfix_base(e.obj)}.{e.method}({', '.join(format_expr(a) for a in e.args)})"
    raise TypeError(f"not an expression: {e!r}")


def _postfix_base(e: ast.Expr) -> str:
    s = format_expr(e)
    if _prec(e) < POSTFIX_PREC or isinstance(e, (ast.IntLit, ast.FloatLit)):
        return f"({s})"
    return s
