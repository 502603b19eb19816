"""The operator-code mini-language carried inside ``CBlock`` nodes.

A CBlock holds one or more simple statements separated by ``;``:

    x = e          a[i] += e        n.level = e
    x++            int x = e        f(a, b)

Control transfer (``return``, ``goto``, ``break``, ``continue``) is
rejected so every block stays single-entry, single-exit.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

from irgl import ast
from irgl.diagnostics import ParseError, error
from irgl.syntax import TokenStream, format_expr, parse_expr, tokenize

C_TYPES = ("int", "long", "unsigned", "float", "double", "bool", "int64_t", "uint64_t", "int32_t")
CONTROL_TRANSFER = ("return", "goto", "break", "continue")
ASSIGN_OPS = ("=", "+=", "-=", "*=", "/=", "%=")


@dataclass(frozen=True)
class Assign:
    target: ast.Expr
    op: str
    value: ast.Expr


@dataclass(frozen=True)
class IncDec:
    target: ast.Expr
    op: str  # "++" or "--"


@dataclass(frozen=True)
class LocalDecl:
    ctype: str
    name: str
    init: Optional[ast.Expr] = None


@dataclass(frozen=True)
class ExprStmt:
    expr: ast.Expr


OpStmt = Union[Assign, IncDec, LocalDecl, ExprStmt]


def is_lvalue(e: ast.Expr) -> bool:
    if isinstance(e, ast.Name):
        return True
    if isinstance(e, ast.Index):
        return is_lvalue(e.base) or isinstance(e.base, (ast.Field, ast.MethodCall, ast.Call))
    if isinstance(e, ast.Field):
        return True
    return False


def starts_simple_statement(ts: TokenStream) -> bool:
    t = ts.tok
    return t.kind == "ident" and t.text in C_TYPES and ts.peek().kind == "ident"


def parse_simple_statement(ts: TokenStream) -> OpStmt:
    """Parse one operator statement (without its terminating ``;``)."""
    t = ts.tok
    if t.kind == "ident" and t.text in CONTROL_TRANSFER:
        ts.fail(f"'{t.text}' would break single-entry/single-exit operator code",
                rule="cblock-control-transfer")
    if starts_simple_statement(ts):
        ctype = ts.next().text
        name = ts.expect_ident().text
        init = None
        if ts.accept("="):
            init = parse_expr(ts)
        return LocalDecl(ctype, name, init)
    start = ts.tok
    target = parse_expr(ts)
    op_tok = ts.tok
    if op_tok.kind == "op" and op_tok.text in ASSIGN_OPS:
        if not is_lvalue(target):
            ts.fail("left-hand side of assignment is not assignable", tok=start)
        ts.next()
        return Assign(target, op_tok.text, parse_expr(ts))
    if op_tok.kind == "op" and op_tok.text in ("++", "--"):
        if not is_lvalue(target):
            ts.fail("operand of increment is not assignable", tok=start)
        ts.next()
        return IncDec(target, op_tok.text)
    if not isinstance(target, (ast.Call, ast.MethodCall)):
        ts.fail("expected assignment, increment or call statement", tok=start)
    return ExprStmt(target)


@lru_cache(maxsize=4096)
def parse_operator(code: str) -> tuple[OpStmt, ...]:
    """Parse CBlock code text. Raises :class:`ParseError` on anything the
    mini-language does not support."""
    ts = TokenStream(tokenize(code, "<cblock>"), "<cblock>")
    stmts: list[OpStmt] = []
    while ts.tok.kind != "eof":
        if ts.accept(";"):
            continue
        stmts.append(parse_simple_statement(ts))
        if ts.tok.kind != "eof":
            ts.expect(";")
    if not stmts:
        raise ParseError([error("cblock-empty", "operator code block is empty")])
    return tuple(stmts)


def format_op(s: OpStmt) -> str:
    if isinstance(s, Assign):
        return f"{format_expr(s.target)} {s.op} {format_expr(s.value)}"
    if isinstance(s, IncDec):
        return f"{format_expr(s.target)}{s.op}"
    if isinstance(s, LocalDecl):
        if s.init is None:
            return f"{s.ctype} {s.name}"
        return f"{s.ctype} {s.name} = {format_expr(s.init)}"
    if isinstance(s, ExprStmt):
        return format_expr(s.expr)
    raise TypeError(s)


def format_ops(stmts) -> str:
    return "; ".join(format_op(s) for s in stmts)


def names_read(e: ast.Expr) -> set[str]:
    out: set[str] = set()
    for n in ast.walk(e):
        if isinstance(n, ast.Name):
            out.add(n.id)
    return out


def _target_write(target: ast.Expr) -> tuple[str, set[str]]:
    """Name written by an assignment target, and the names read to locate it."""
    if isinstance(target, ast.Name):
        return target.id, set()
    if isinstance(target, ast.Index):
        reads = names_read(target.index)
        base = target.base
        while isinstance(base, ast.Index):
            reads |= names_read(base.index)
            base = base.base
        if isinstance(base, ast.Name):
            return base.id, reads
        if isinstance(base, ast.Field):
            return base.name, reads | names_read(base.base)
        return "", reads | names_read(base)
    if isinstance(target, ast.Field):
        return target.name, names_read(target.base)
    return "", names_read(target)


def rw_sets(stmts) -> tuple[frozenset[str], frozenset[str]]:
    """Read and write sets of operator statements (by root name)."""
    reads: set[str] = set()
    writes: set[str] = set()
    for s in stmts:
        if isinstance(s, Assign):
            w, r = _target_write(s.target)
            reads |= r | names_read(s.value)
            if s.op != "=":
                reads |= names_read(s.target)
            if w:
                writes.add(w)
        elif isinstance(s, IncDec):
            w, r = _target_write(s.target)
            reads |= r | names_read(s.target)
            if w:
                writes.add(w)
        elif isinstance(s, LocalDecl):
            if s.init is not None:
                reads |= names_read(s.init)
            writes.add(s.name)
        elif isinstance(s, ExprStmt):
            reads |= names_read(s.expr)
    return frozenset(reads), frozenset(writes)


def cblock(code_or_stmts) -> ast.CBlock:
    """Build a CBlock with canonical code text and computed read/write sets."""
    stmts = parse_operator(code_or_stmts) if isinstance(code_or_stmts, str) else tuple(code_or_stmts)
    reads, writes = rw_sets(stmts)
    return ast.CBlock(format_ops(stmts), reads, writes)
