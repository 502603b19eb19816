"""Concrete IrGL syntax: parser and pretty-printer.

Statements written outside any kernel are gathered, in order, into an
implicit host kernel named ``main``.
The full grammar is in docs/grammar.md.
"""

from __future__ import annotations

import os
import re
from typing import Optional

from irgl import ast
from irgl.diagnostics import ParseError, error
from irgl.opcode import cblock, format_ops, parse_simple_statement
from irgl.serial import check_unique_kernels
from irgl.syntax import (
    Token,
    TokenStream,
    format_expr,
    parse_args,
    parse_expr,
    quote_string,
    tokenize,
)

IMPLICIT_MAIN = "main"
WL_NAMES = ("wl", "WL")


def parse_source(text: str, filename: str = "<input>") -> ast.Module:
    """Parse IrGL source text. Raises :class:`ParseError` carrying the
    diagnostics on failure."""
    return _Parser(text, filename).module()


def parse_file(path: str) -> ast.Module:
    with open(path, encoding="utf-8") as f:
        return parse_source(f.read(), path)


def _default_module_name(filename: str) -> str:
    stem = os.path.splitext(os.path.basename(filename))[0]
    stem = re.sub(r"[^A-Za-z0-9_]", "_", stem)
    if not stem or not (stem[0].isalpha() or stem[0] == "_"):
        return "module"
    return stem


class _Parser:
    def __init__(self, text: str, filename: str):
        self.filename = filename
        self.ts = TokenStream(tokenize(text, filename), filename)

    # -- module level ------------------------------------------------------

    def module(self) -> ast.Module:
        ts = self.ts
        first = ts.tok
        name = _default_module_name(self.filename)
        if ts.accept("Module"):
            name = ts.expect_ident("module name").text
            ts.accept(";")
        decls: list[ast.GlobalDecl] = []
        kernels: list[ast.Kernel] = []
        names: list[str] = []
        top_stmts: list[ast.Stmt] = []
        top_span = None
        while ts.tok.kind != "eof":
            if ts.accept(";"):
                continue
            if ts.at("Names"):
                ts.next()
                ts.expect("{")
                if not ts.at("}"):
                    names.append(ts.expect_ident().text)
                    while ts.accept(","):
                        names.append(ts.expect_ident().text)
                ts.expect("}")
            elif ts.at("Global"):
                decls.append(self.global_decl())
            elif ts.at("Kernel") or (ts.at("@") and self._annotated_kernel_ahead()):
                kernels.append(self.kernel())
            else:
                if top_span is None:
                    top_span = ts.span()
                top_stmts.extend(self.statement())
        if top_stmts:
            kernels.append(ast.Kernel(IMPLICIT_MAIN, ast.KernelKind.HOST, (), tuple(top_stmts), span=top_span))
        module = ast.Module(name, tuple(decls), tuple(kernels), tuple(names), span=ts.span(first))
        check_unique_kernels(module)
        return module

    def _annotated_kernel_ahead(self) -> bool:
        i = self.ts.pos
        toks = self.ts.tokens
        depth = 0
        while i < len(toks) and toks[i].kind != "eof":
            t = toks[i]
            if t.text == "(" and t.kind == "op":
                depth += 1
            elif t.text == ")" and t.kind == "op":
                depth -= 1
            elif depth == 0 and t.kind == "ident" and toks[i - 1].text != "@":
                return t.text == "Kernel"
            i += 1
        return False

    def global_decl(self) -> ast.GlobalDecl:
        ts = self.ts
        start = ts.expect("Global")
        name = ts.expect_ident("global name").text
        tag = "any"
        if ts.accept(":"):
            tag = self._tag()
        init = None
        if ts.accept("="):
            init = parse_expr(ts)
        ts.accept(";")
        return ast.GlobalDecl(name, tag, init, span=ts.span(start))

    def _tag(self) -> str:
        t = self.ts.expect_ident("type tag")
        if t.text not in ast.PARAM_TAGS:
            self.ts.fail(f"unknown type tag (expected one of {', '.join(ast.PARAM_TAGS)})", tok=t)
        return t.text

    def annotations(self) -> list[tuple[Token, str, Optional[list[Token]]]]:
        ts = self.ts
        out = []
        while ts.at("@"):
            at = ts.next()
            key = ts.expect_ident("annotation name")
            args: Optional[list[Token]] = None
            if ts.accept("("):
                args = []
                if not ts.at(")"):
                    args.append(self._annot_arg())
                    while ts.accept(","):
                        args.append(self._annot_arg())
                ts.expect(")")
            out.append((at, key.text, args))
        return out

    def _annot_arg(self) -> Token:
        t = self.ts.tok
        if t.kind not in ("ident", "int", "string"):
            self.ts.fail("expected annotation argument")
        return self.ts.next()

    def kernel(self) -> ast.Kernel:
        ts = self.ts
        annots = self.annotations()
        start = ts.expect("Kernel")
        name = ts.expect_ident("kernel name").text
        ts.expect("(")
        params: list[ast.Param] = []
        if not ts.at(")"):
            params.append(self._param())
            while ts.accept(","):
                params.append(self._param())
        ts.expect(")")
        kind = ast.KernelKind.PLAIN
        launch_bounds = None
        extra: list[tuple[str, str]] = []
        for at, key, args in annots:
            if key in ("host", "device"):
                if args:
                    ts.fail(f"@{key} takes no arguments", tok=at)
                if kind is not ast.KernelKind.PLAIN:
                    ts.fail("kernel kind given twice", tok=at)
                kind = ast.KernelKind(key)
            elif key == "launch_bounds":
                if not args or len(args) > 2 or any(a.kind != "int" for a in args):
                    ts.fail("@launch_bounds expects (maxthreadsperblock[, minblocks])", tok=at)
                vals = [int(a.text) for a in args]
                launch_bounds = ast.LaunchBounds(vals[0], vals[1] if len(vals) > 1 else None, span=ts.span(at))
            else:
                if args is not None and len(args) > 1:
                    ts.fail("kernel annotations take at most one argument", tok=at)
                extra.append((key, _annot_value(args[0]) if args else ""))
        body = self.block()
        return ast.Kernel(name, kind, tuple(params), body, launch_bounds, tuple(extra), span=ts.span(start))

    def _param(self) -> ast.Param:
        t = self.ts.expect_ident("parameter name")
        tag = "any"
        if self.ts.accept(":"):
            tag = self._tag()
        return ast.Param(t.text, tag, span=self.ts.span(t))

    # -- statements --------------------------------------------------------

    def block(self) -> tuple[ast.Stmt, ...]:
        ts = self.ts
        ts.expect("{")
        stmts: list[ast.Stmt] = []
        while not ts.at("}"):
            if ts.tok.kind == "eof":
                ts.fail("expected '}'")
            stmts.extend(self.statement())
        ts.next()
        return tuple(stmts)

    def _end(self) -> None:
        self.ts.accept(";")

    def statement(self) -> list[ast.Stmt]:
        """Parse one statement; returns [] for an empty statement."""
        ts = self.ts
        t = ts.tok
        if ts.accept(";"):
            return []
        if t.kind != "ident" and not ts.at("@"):
            if ts.at("{"):
                ts.fail("nested blocks are not supported")
            ts.fail("expected statement")
        sp = ts.span(t)
        if ts.at("@"):
            annots = self.annotations()
            if not ts.at("ForAll"):
                ts.fail("statement annotations are only supported on ForAll")
            mapping = ast.Mapping.CONSECUTIVE
            for at, key, args in annots:
                if key != "mapping" or not args or len(args) != 1:
                    ts.fail("expected @mapping(consecutive|blocked)", tok=at)
                try:
                    mapping = ast.Mapping(args[0].text)
                except ValueError:
                    ts.fail("unknown ForAll mapping", tok=args[0])
            return [self._forall(mapping)]
        word = t.text
        if word == "ForAll":
            return [self._forall(ast.Mapping.CONSECUTIVE)]
        if word in ("for", "For"):
            ts.next()
            ts.expect("(")
            var = ts.expect_ident("loop variable").text
            ts.expect("In")
            it = parse_expr(ts)
            ts.expect(")")
            return [ast.For(var, it, self.block(), span=sp)]
        if word in ("while", "While"):
            ts.next()
            ts.expect("(")
            cond = parse_expr(ts)
            ts.expect(")")
            return [ast.While(cond, self.block(), span=sp)]
        if word in ("if", "If"):
            return [self._if()]
        if word in ("else", "Else"):
            ts.fail("'else' without a matching 'if'")
        if word == "Atomic":
            ts.next()
            ts.expect("(")
            lock = parse_expr(ts)
            ts.expect(")")
            locked = self.block()
            failed = self.block() if ts.accept("Else") else None
            self._end()
            return [ast.Atomic(lock, locked, failed, span=sp)]
        if word == "Exclusive":
            return [self._exclusive()]
        if word == "SyncRunningThreads":
            ts.next()
            if ts.accept("("):
                ts.expect(")")
            self._end()
            return [ast.SyncRunningThreads(span=sp)]
        if word in ("Retry", "Respawn"):
            ts.next()
            item = parse_expr(ts)
            self._end()
            cls = ast.Retry if word == "Retry" else ast.Respawn
            return [cls(item, span=sp)]
        if word == "ReduceAndReturn":
            ts.next()
            ts.expect("(")
            value = parse_expr(ts)
            ts.expect(")")
            self._end()
            return [ast.ReduceAndReturn(value, span=sp)]
        if word == "Invoke":
            inv = self._invoke(None, None)
            self._end()
            return [inv]
        if word in ("Any", "All") and ts.peek().text == "(" and ts.peek(2).text == "Invoke":
            return [self._reduced_invoke(None)]
        if word == "Iterate":
            return [self._iterate()]
        if word == "Pipe":
            return [self._pipe()]
        if word in WL_NAMES and ts.peek().text == ".":
            return [self._wl_push()]
        if ts.peek().text == "=":
            after = ts.peek(2)
            if after.text in WL_NAMES and ts.peek(3).text == ".":
                return [self._wl_pop()]
            if after.text in ("Any", "All") and ts.peek(3).text == "(" and ts.peek(4).text == "Invoke":
                ts.next()
                ts.next()
                return [self._reduced_invoke(t.text, sp)]
        return [self._cblock()]

    def _forall(self, mapping: ast.Mapping) -> ast.ForAll:
        ts = self.ts
        start = ts.expect("ForAll")
        ts.expect("(")
        var = ts.expect_ident("loop variable").text
        ts.expect("In")
        it = parse_expr(ts)
        ts.expect(")")
        body = self.block()
        return ast.ForAll(var, it, body, mapping, span=ts.span(start))

    def _if(self) -> ast.If:
        ts = self.ts
        start = ts.next()
        ts.expect("(")
        cond = parse_expr(ts)
        ts.expect(")")
        then = self.block()
        orelse: tuple[ast.Stmt, ...] = ()
        if ts.at("else") or ts.at("Else"):
            ts.next()
            if ts.at("if") or ts.at("If"):
                orelse = (self._if(),)
            else:
                orelse = self.block()
        self._end()
        return ast.If(cond, then, orelse, span=ts.span(start))

    def _exclusive(self) -> ast.Exclusive:
        ts = self.ts
        start = ts.expect("Exclusive")
        ts.expect("(")
        obj = parse_expr(ts)
        ts.expect(",")
        count = parse_expr(ts)
        ts.expect(",")
        locks: ast.LockSource
        if ts.accept("In"):
            e = parse_expr(ts)
            locks = ast.LockIterator(e, span=getattr(e, "span", None))
        else:
            e = parse_expr(ts)
            locks = ast.LockArray(e, span=getattr(e, "span", None))
        ts.expect(")")
        locked = self.block()
        failed = self.block() if ts.accept("Else") else None
        self._end()
        return ast.Exclusive(obj, count, locks, locked, failed, span=ts.span(start))

    def _invoke(self, reduction: Optional[ast.Reduction], result: Optional[str], sp=None) -> ast.Invoke:
        ts = self.ts
        start = ts.expect("Invoke")
        name = ts.expect_ident("kernel name").text
        args = parse_args(ts)
        return ast.Invoke(name, args, reduction, result, span=sp or ts.span(start))

    def _reduced_invoke(self, result: Optional[str], sp=None) -> ast.Invoke:
        ts = self.ts
        red_tok = ts.next()
        ts.expect("(")
        inv = self._invoke(ast.Reduction(red_tok.text), result, sp or ts.span(red_tok))
        ts.expect(")")
        self._end()
        return inv

    def _iterate(self) -> ast.Iterate:
        ts = self.ts
        start = ts.expect("Iterate")
        cond_kind = None
        if ts.at("While") or ts.at("Until"):
            mode_tok = ts.next()
            if not (ts.at("Any") or ts.at("All")):
                ts.fail("expected 'Any' or 'All'")
            red_tok = ts.next()
            cond_kind = ast.CondKind(ast.LoopMode(mode_tok.text), ast.Reduction(red_tok.text), span=ts.span(mode_tok))
        name = ts.expect_ident("kernel name").text
        args = parse_args(ts)
        initial = self._wlinit() if ts.at("Initial") else None
        extra = None
        if ts.at("And") or ts.at("Or"):
            comb = ts.next()
            ts.expect("(")
            e = parse_expr(ts)
            ts.expect(")")
            extra = ast.ExtraCond(e, ast.Combiner(comb.text), span=ts.span(comb))
        between: tuple[ast.Stmt, ...] = ()
        if ts.at("{"):
            between = self.block()
        self._end()
        return ast.Iterate(name, args, cond_kind, initial, extra, between, span=ts.span(start))

    def _wlinit(self) -> ast.WorklistInit:
        ts = self.ts
        start = ts.expect("Initial")
        size = None
        if ts.accept("("):
            size = parse_expr(ts)
            ts.expect(")")
        src: ast.Scalars | ast.FromArray
        if ts.at("["):
            t = ts.next()
            items: list[ast.Expr] = []
            if not ts.at("]"):
                items.append(parse_expr(ts))
                while ts.accept(","):
                    items.append(parse_expr(ts))
            ts.expect("]")
            src = ast.Scalars(tuple(items), span=ts.span(t))
        elif ts.at("FromArray"):
            t = ts.next()
            ts.expect("(")
            arr = parse_expr(ts)
            ts.expect(",")
            length = parse_expr(ts)
            ts.expect(")")
            src = ast.FromArray(arr, length, span=ts.span(t))
        else:
            ts.fail("expected '[' or 'FromArray' after Initial")
            raise AssertionError
        return ast.WorklistInit(src, size, span=ts.span(start))

    def _pipe(self) -> ast.Pipe:
        ts = self.ts
        start = ts.expect("Pipe")
        once = ts.accept("Once") is not None
        wlinit = self._wlinit() if ts.at("Initial") else None
        body = self.block()
        self._end()
        return ast.Pipe(once, body, wlinit, span=ts.span(start))

    def _wl_push(self) -> ast.WlPush:
        ts = self.ts
        start = ts.next()
        ts.expect(".")
        m = ts.expect_ident("worklist method")
        if m.text != "push":
            ts.fail(f"worklist supports only push and pop, not '{m.text}'", tok=m, rule="wl-method")
        args = parse_args(ts)
        if len(args) != 1:
            ts.fail("wl.push takes exactly one argument", tok=m, rule="wl-method")
        self._end()
        return ast.WlPush(args[0], span=ts.span(start))

    def _wl_pop(self) -> ast.WlPop:
        ts = self.ts
        var = ts.next()
        ts.expect("=")
        ts.next()
        ts.expect(".")
        m = ts.expect_ident("worklist method")
        if m.text != "pop":
            ts.fail(f"worklist supports only push and pop, not '{m.text}'", tok=m, rule="wl-method")
        args = parse_args(ts)
        if len(args) != 1:
            ts.fail("wl.pop takes exactly one argument", tok=m, rule="wl-method")
        self._end()
        return ast.WlPop(var.text, args[0], span=ts.span(var))

    def _cblock(self) -> ast.CBlock:
        ts = self.ts
        start = ts.tok
        op = parse_simple_statement(ts)
        self._end()
        code = format_ops([op])
        for name in WL_NAMES:
            if re.search(rf"\b{name}\s*\.", code):
                raise ParseError([error("wl-method", "worklist methods may only appear as "
                                        "'v = wl.pop(i)' or 'wl.push(x)' statements", ts.span(start))])
        block = cblock([op])
        return ast.CBlock(block.code, block.reads, block.writes, span=ts.span(start))


def _annot_value(t: Token) -> str:
    if t.kind == "string":
        return t.text[1:-1]
    return t.text


# ---------------------------------------------------------------------------
# Pretty printer
# ---------------------------------------------------------------------------

_BARE_ANNOT = re.compile(r"^(?:[A-Za-z_][A-Za-z0-9_]*|\d+)$")


def _annot(key: str, value: str) -> str:
    if value == "":
        return f"@{key}"
    if _BARE_ANNOT.match(value):
        return f"@{key}({value})"
    return f"@{key}({quote_string(value)})"


def pretty_print(module: ast.Module) -> str:
    out: list[str] = [f"Module {module.name};"]
    if module.imported_names:
        out.append("")
        out.append("Names { " + ", ".join(module.imported_names) + " }")
    if module.decls:
        out.append("")
        for d in module.decls:
            line = f"Global {d.name}"
            if d.tag != "any":
                line += f": {d.tag}"
            if d.init is not None:
                line += f" = {format_expr(d.init)}"
            out.append(line + ";")
    for k in module.kernels:
        out.append("")
        out.extend(_kernel_lines(k))
    return "\n".join(out) + "\n"


def _kernel_lines(k: ast.Kernel) -> list[str]:
    annots = []
    if k.kind is not ast.KernelKind.PLAIN:
        annots.append(f"@{k.kind.value}")
    if k.launch_bounds is not None:
        lb = k.launch_bounds
        args = str(lb.max_threads) if lb.min_blocks is None else f"{lb.max_threads}, {lb.min_blocks}"
        annots.append(f"@launch_bounds({args})")
    annots.extend(_annot(key, value) for key, value in k.annotations)
    params = ", ".join(p.name if p.tag == "any" else f"{p.name}: {p.tag}" for p in k.params)
    head = " ".join(annots + [f"Kernel {k.name}({params})"])
    return _block_lines(head, k.body, 0)


def _block_lines(head: str, body, depth: int, tail: str = "") -> list[str]:
    pad = "  " * depth
    if not body:
        return [f"{pad}{head} {{ }}{tail}"]
    lines = [f"{pad}{head} {{"]
    for s in body:
        lines.extend(_stmt_lines(s, depth + 1))
    lines.append(f"{pad}}}{tail}")
    return lines


def _wlinit_text(w: ast.WorklistInit) -> str:
    s = "Initial"
    if w.size is not None:
        s += f"({format_expr(w.size)})"
    if isinstance(w.source, ast.Scalars):
        s += " [" + ", ".join(format_expr(e) for e in w.source.items) + "]"
    else:
        s += f" FromArray({format_expr(w.source.array)}, {format_expr(w.source.length)})"
    return s


def _args(args) -> str:
    return "(" + ", ".join(format_expr(a) for a in args) + ")"


def _with_else(head: str, first, second, depth: int, else_kw: str) -> list[str]:
    lines = _block_lines(head, first, depth)
    if second is None:
        return lines
    pad = "  " * depth
    rest = _block_lines(else_kw, second, depth)
    lines[-1] = lines[-1] + " " + rest[0][len(pad):]
    lines.extend(rest[1:])
    return lines


def _stmt_lines(s: ast.Stmt, depth: int) -> list[str]:
    pad = "  " * depth
    if isinstance(s, ast.CBlock):
        return [f"{pad}{s.code};"]
    if isinstance(s, ast.ForAll):
        head = f"ForAll ({s.var} In {format_expr(s.iterator)})"
        if s.mapping is not ast.Mapping.CONSECUTIVE:
            head = f"@mapping({s.mapping.value}) {head}"
        return _block_lines(head, s.body, depth)
    if isinstance(s, ast.For):
        return _block_lines(f"for ({s.var} In {format_expr(s.iterator)})", s.body, depth)
    if isinstance(s, ast.While):
        return _block_lines(f"while ({format_expr(s.cond)})", s.body, depth)
    if isinstance(s, ast.If):
        return _with_else(f"if ({format_expr(s.cond)})", s.then, s.orelse or None, depth, "else")
    if isinstance(s, ast.Atomic):
        return _with_else(f"Atomic ({format_expr(s.lock)})", s.locked, s.failed, depth, "Else")
    if isinstance(s, ast.Exclusive):
        if isinstance(s.locks, ast.LockIterator):
            src = f"In {format_expr(s.locks.iterator)}"
        else:
            src = format_expr(s.locks.array)
        head = f"Exclusive ({format_expr(s.object)}, {format_expr(s.count)}, {src})"
        return _with_else(head, s.locked, s.failed, depth, "Else")
    if isinstance(s, ast.SyncRunningThreads):
        return [f"{pad}SyncRunningThreads();"]
    if isinstance(s, ast.Retry):
        return [f"{pad}Retry {format_expr(s.item)};"]
    if isinstance(s, ast.Respawn):
        return [f"{pad}Respawn {format_expr(s.item)};"]
    if isinstance(s, ast.ReduceAndReturn):
        return [f"{pad}ReduceAndReturn({format_expr(s.value)});"]
    if isinstance(s, ast.Invoke):
        call = f"Invoke {s.kernel}{_args(s.args)}"
        if s.reduction is not None:
            call = f"{s.reduction.value}({call})"
            if s.result is not None:
                call = f"{s.result} = {call}"
        return [f"{pad}{call};"]
    if isinstance(s, ast.Iterate):
        head = "Iterate"
        if s.cond_kind is not None:
            head += f" {s.cond_kind.mode.value} {s.cond_kind.reduction.value}"
        head += f" {s.kernel}{_args(s.args)}"
        if s.initial is not None:
            head += " " + _wlinit_text(s.initial)
        if s.extra_cond is not None:
            head += f" {s.extra_cond.combiner.value} ({format_expr(s.extra_cond.expr)})"
        if not s.between_rounds:
            return [f"{pad}{head};"]
        return _block_lines(head, s.between_rounds, depth)
    if isinstance(s, ast.Pipe):
        head = "Pipe"
        if s.once:
            head += " Once"
        if s.wlinit is not None:
            head += " " + _wlinit_text(s.wlinit)
        return _block_lines(head, s.body, depth)
    if isinstance(s, ast.WlPop):
        return [f"{pad}{s.var} = wl.pop({format_expr(s.index)});"]
    if isinstance(s, ast.WlPush):
        return [f"{pad}wl.push({format_expr(s.value)});"]
    raise TypeError(f"unknown statement {s!r}")
