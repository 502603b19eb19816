"""Canonical text serialization of IrGL modules.

The format is a parenthesized tree, one node per line::

    (Module :name "m" :imported_names []
      :decls []
      :kernels [
        (Kernel :name "f" :kind KernelKind.plain :annotations []
          :params []
          :body []
          :launch_bounds nil)])

Scalar fields are written inline on the node's own line in declaration
order; node-valued and node-sequence fields follow, one per line. Spans
are never written. See docs/grammar.md for the full description.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import fields, is_dataclass
from typing import Any

from irgl import ast
from irgl.diagnostics import ParseError, SourceSpan, error

_NODE_TYPES: dict[str, type] = {
    cls.__name__: cls
    for cls in vars(ast).values()
    if isinstance(cls, type) and issubclass(cls, ast.Node) and is_dataclass(cls)
}
_ENUM_TYPES: dict[str, type] = {
    cls.__name__: cls
    for cls in vars(ast).values()
    if isinstance(cls, type) and issubclass(cls, enum.Enum)
}

INDENT = "  "


def _is_node_valued(value: Any) -> bool:
    if isinstance(value, ast.Node):
        return True
    if isinstance(value, tuple):
        return any(isinstance(v, ast.Node) for v in value)
    return False


def _scalar(value: Any) -> str:
    if value is None:
        return "nil"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, enum.Enum):
        return f"{type(value).__name__}.{value.value}"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        r = repr(value)
        if r in ("inf", "-inf", "nan"):
            raise ValueError("non-finite float in AST")
        return r
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, frozenset):
        return "{" + " ".join(_scalar(v) for v in sorted(value)) + "}"
    if isinstance(value, tuple):
        return "[" + " ".join(_scalar(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {value!r}")


def _node_fields(node: ast.Node):
    return [f for f in fields(node) if f.name != "span"]  # type: ignore[arg-type]


def _emit(node: ast.Node, depth: int, out: list[str], prefix: str, suffix: str) -> None:
    pad = INDENT * depth
    inline, nested = [], []
    for f in _node_fields(node):
        value = getattr(node, f.name)
        (nested if _is_node_valued(value) else inline).append((f.name, value))
    head = f"{pad}{prefix}({type(node).__name__}"
    for name, value in inline:
        head += f" :{name} {_scalar(value)}"
    if not nested:
        out.append(head + ")" + suffix)
        return
    out.append(head)
    for i, (name, value) in enumerate(nested):
        last = i == len(nested) - 1
        end = (")" + suffix) if last else ""
        if isinstance(value, ast.Node):
            _emit(value, depth + 1, out, f":{name} ", end)
        else:
            out.append(f"{pad}{INDENT}:{name} [")
            for j, item in enumerate(value):
                item_end = ("]" + end) if j == len(value) - 1 else ""
                _emit(item, depth + 2, out, "", item_end)


def serialize(module: ast.Module) -> str:
    out: list[str] = []
    _emit(module, 0, out, "", "")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Reader
# ---------------------------------------------------------------------------

_SER_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+) | (?P<nl>\n)
  | (?P<punct>[()\[\]{}])
  | (?P<key>:[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\]|\\.)*")
  | (?P<number>-?\d+(?:\.\d*)?(?:[eE][+-]?\d+)?)
  | (?P<symbol>[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)?)
    """,
    re.VERBOSE,
)


class _Reader:
    def __init__(self, text: str, filename: str):
        self.filename = filename
        self.tokens: list[tuple[str, str, int, int]] = []
        pos, line, line_start = 0, 1, 0
        while pos < len(text):
            m = _SER_TOKEN.match(text, pos)
            if m is None:
                self._fail_at(line, pos - line_start + 1, f"unexpected character {text[pos]!r}")
            kind = m.lastgroup
            if kind == "nl":
                line += 1
                line_start = m.end()
            elif kind != "ws":
                self.tokens.append((kind, m.group(), line, pos - line_start + 1))
            pos = m.end()
        self.tokens.append(("eof", "", line, pos - line_start + 1))
        self.i = 0

    def _fail_at(self, line: int, col: int, msg: str):
        raise ParseError([error("serial-syntax", msg, SourceSpan(self.filename, line, col, 1))])

    def fail(self, msg: str):
        kind, text, line, col = self.tokens[self.i]
        found = "end of input" if kind == "eof" else repr(text)
        self._fail_at(line, col, f"{msg}, found {found}")

    @property
    def tok(self):
        return self.tokens[self.i]

    def take(self, text: str):
        if self.tok[1] != text or self.tok[0] in ("string",):
            self.fail(f"expected {text!r}")
        self.i += 1

    def value(self) -> Any:
        kind, text, _, _ = self.tok
        if text == "(" and kind == "punct":
            return self.node()
        if text == "[" and kind == "punct":
            self.i += 1
            items = []
            while self.tok[1] != "]" or self.tok[0] != "punct":
                if self.tok[0] == "eof":
                    self.fail("unterminated sequence")
                items.append(self.value())
            self.i += 1
            return tuple(items)
        if text == "{" and kind == "punct":
            self.i += 1
            items = []
            while self.tok[1] != "}" or self.tok[0] != "punct":
                if self.tok[0] != "string":
                    self.fail("expected string in set")
                items.append(self.value())
            self.i += 1
            return frozenset(items)
        self.i += 1
        if kind == "string":
            return json.loads(text)
        if kind == "number":
            if any(c in text for c in ".eE"):
                return float(text)
            return int(text)
        if kind == "symbol":
            if text == "nil":
                return None
            if text in ("true", "false"):
                return text == "true"
            if "." in text:
                cls_name, member = text.split(".", 1)
                enum_cls = _ENUM_TYPES.get(cls_name)
                if enum_cls is not None:
                    try:
                        return enum_cls(member)
                    except ValueError:
                        pass
            self.i -= 1
            self.fail("unknown symbol")
        self.i -= 1
        self.fail("expected value")

    def node(self) -> ast.Node:
        self.take("(")
        kind, text, line, col = self.tok
        cls = _NODE_TYPES.get(text) if kind == "symbol" else None
        if cls is None:
            self.fail("expected node type")
        self.i += 1
        kwargs: dict[str, Any] = {}
        valid = {f.name for f in fields(cls) if f.name != "span"}
        while not (self.tok[0] == "punct" and self.tok[1] == ")"):
            k_kind, k_text, _, _ = self.tok
            if k_kind != "key":
                self.fail("expected ':field' or ')'")
            name = k_text[1:]
            if name not in valid:
                self.fail(f"unknown field for {cls.__name__}")
            if name in kwargs:
                self.fail("duplicate field")
            self.i += 1
            kwargs[name] = self.value()
        self.i += 1
        try:
            return cls(**kwargs)
        except TypeError as exc:
            self._fail_at(line, col, f"malformed {cls.__name__}: {exc}")
            raise


def check_unique_kernels(module: ast.Module) -> None:
    seen: set[str] = set()
    for k in module.kernels:
        if k.name in seen:
            raise ParseError([error("duplicate-kernel", f"kernel '{k.name}' is defined more than once", k.span)])
        seen.add(k.name)


def parse_serialized(text: str, filename: str = "<serialized>") -> ast.Module:
    r = _Reader(text, filename)
    node = r.value()
    if not isinstance(node, ast.Module):
        r.fail("expected a Module at top level")
    if r.tok[0] != "eof":
        r.fail("trailing input after Module")
    check_unique_kernels(node)
    return node
