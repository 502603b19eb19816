"""IrGL abstract syntax tree.

Every node is a frozen dataclass. Source spans ride along on the ``span``
field but are excluded from equality, hashing and serialization, so two
trees parsed from differently formatted text compare equal.

Operator code (``CBlock.code``) is kept as text in the operator
mini-language; see :mod:`irgl.opcode` for its statements.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields
from typing import Iterator, Optional, Union

from irgl.diagnostics import SourceSpan


def _span() -> Optional[SourceSpan]:
    return field(default=None, compare=False, repr=False, kw_only=True)


class Node:
    """Base class for all AST nodes."""

    __slots__ = ()

    def children(self) -> Iterator["Node"]:
        for f in fields(self):  # type: ignore[arg-type]
            if f.name == "span":
                continue
            value = getattr(self, f.name)
            if isinstance(value, Node):
                yield value
            elif isinstance(value, tuple):
                for item in value:
                    if isinstance(item, Node):
                        yield item


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------


class Expr(Node):
    __slots__ = ()


@dataclass(frozen=True)
class IntLit(Expr):
    value: int
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class FloatLit(Expr):
    value: float
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class BoolLit(Expr):
    value: bool
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class StrLit(Expr):
    value: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Name(Expr):
    id: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Unary(Expr):
    op: str  # "-", "!"
    operand: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Binary(Expr):
    op: str
    left: Expr
    right: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Index(Expr):
    base: Expr
    index: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Field(Expr):
    base: Expr
    name: str
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Call(Expr):
    func: str
    args: tuple[Expr, ...] = ()
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class MethodCall(Expr):
    obj: Expr
    method: str
    args: tuple[Expr, ...] = ()
    span: Optional[SourceSpan] = _span()


BINARY_OPS = ("||", "&&", "==", "!=", "<", "<=", ">", ">=", "+", "-", "*", "/", "%")
UNARY_OPS = ("-", "!")


# ---------------------------------------------------------------------------
# Enumerations
# ---------------------------------------------------------------------------


class KernelKind(enum.Enum):
    PLAIN = "plain"
    HOST = "host"
    DEVICE = "device"


class Mapping(enum.Enum):
    CONSECUTIVE = "consecutive"
    BLOCKED = "blocked"


class Reduction(enum.Enum):
    ANY = "Any"
    ALL = "All"


class LoopMode(enum.Enum):
    WHILE = "While"
    UNTIL = "Until"


class Combiner(enum.Enum):
    AND = "And"
    OR = "Or"


# ---------------------------------------------------------------------------
# Statement helpers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LockArray(Node):
    """Exclusive lock source: the first ``count`` entries of an array."""

    array: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class LockIterator(Node):
    """Exclusive lock source: an iterator yielding lock indices."""

    iterator: Expr
    span: Optional[SourceSpan] = _span()


LockSource = Union[LockArray, LockIterator]


@dataclass(frozen=True)
class Scalars(Node):
    items: tuple[Expr, ...]
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class FromArray(Node):
    array: Expr
    length: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class WorklistInit(Node):
    """Initial contents of a freshly established pipe context.

    ``size`` is the worklist capacity; ``None`` means the runtime default.
    """

    source: Union[Scalars, FromArray]
    size: Optional[Expr] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class CondKind(Node):
    mode: LoopMode
    reduction: Reduction
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ExtraCond(Node):
    expr: Expr
    combiner: Combiner
    span: Optional[SourceSpan] = _span()


# ---------------------------------------------------------------------------
# Statements
# ---------------------------------------------------------------------------


class Stmt(Node):
    __slots__ = ()


@dataclass(frozen=True)
class CBlock(Stmt):
    """Single-entry, single-exit operator code.

    ``reads``/``writes`` are ``None`` when the block was built without
    read/write annotations.
    """

    code: str
    reads: Optional[frozenset[str]] = None
    writes: Optional[frozenset[str]] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ForAll(Stmt):
    var: str
    iterator: Expr
    body: tuple[Stmt, ...] = ()
    mapping: Mapping = Mapping.CONSECUTIVE
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class For(Stmt):
    var: str
    iterator: Expr
    body: tuple[Stmt, ...] = ()
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class While(Stmt):
    cond: Expr
    body: tuple[Stmt, ...] = ()
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: tuple[Stmt, ...] = ()
    orelse: tuple[Stmt, ...] = ()
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Atomic(Stmt):
    lock: Expr
    locked: tuple[Stmt, ...] = ()
    failed: Optional[tuple[Stmt, ...]] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Exclusive(Stmt):
    object: Expr
    count: Expr
    locks: LockSource
    locked: tuple[Stmt, ...] = ()
    failed: Optional[tuple[Stmt, ...]] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class SyncRunningThreads(Stmt):
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Retry(Stmt):
    item: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Respawn(Stmt):
    item: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class ReduceAndReturn(Stmt):
    value: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Invoke(Stmt):
    """Kernel invocation; ``result`` names the host variable that receives
    the reduced return value when ``reduction`` is set."""

    kernel: str
    args: tuple[Expr, ...] = ()
    reduction: Optional[Reduction] = None
    result: Optional[str] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Iterate(Stmt):
    kernel: str
    args: tuple[Expr, ...] = ()
    cond_kind: Optional[CondKind] = None
    initial: Optional[WorklistInit] = None
    extra_cond: Optional[ExtraCond] = None
    between_rounds: tuple[Stmt, ...] = ()
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Pipe(Stmt):
    once: bool = False
    body: tuple[Stmt, ...] = ()
    wlinit: Optional[WorklistInit] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class WlPop(Stmt):
    """``var = wl.pop(index)``"""

    var: str
    index: Expr
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class WlPush(Stmt):
    """``wl.push(value)``"""

    value: Expr
    span: Optional[SourceSpan] = _span()


STMT_TYPES: tuple[type, ...] = (
    CBlock, ForAll, For, While, If, Atomic, Exclusive, SyncRunningThreads,
    Retry, Respawn, ReduceAndReturn, Invoke, Iterate, Pipe, WlPop, WlPush,
)

KERNEL_CONSTRUCTS: tuple[type, ...] = (Atomic, Exclusive, Retry, Respawn, ReduceAndReturn)
ORCHESTRATION_CONSTRUCTS: tuple[type, ...] = (Invoke, Iterate, Pipe)


# ---------------------------------------------------------------------------
# Top level
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Param(Node):
    name: str
    tag: str = "any"
    span: Optional[SourceSpan] = _span()


PARAM_TAGS = ("any", "int", "float", "bool", "array", "farray", "graph")


@dataclass(frozen=True)
class LaunchBounds(Node):
    max_threads: int
    min_blocks: Optional[int] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Kernel(Node):
    name: str
    kind: KernelKind = KernelKind.PLAIN
    params: tuple[Param, ...] = ()
    body: tuple[Stmt, ...] = ()
    launch_bounds: Optional[LaunchBounds] = None
    annotations: tuple[tuple[str, str], ...] = ()
    span: Optional[SourceSpan] = _span()

    @property
    def is_host(self) -> bool:
        return self.kind is KernelKind.HOST

    def annotation(self, key: str) -> Optional[str]:
        for k, v in self.annotations:
            if k == key:
                return v
        return None


@dataclass(frozen=True)
class GlobalDecl(Node):
    name: str
    tag: str = "any"
    init: Optional[Expr] = None
    span: Optional[SourceSpan] = _span()


@dataclass(frozen=True)
class Module(Node):
    name: str
    decls: tuple[GlobalDecl, ...] = ()
    kernels: tuple[Kernel, ...] = ()
    imported_names: tuple[str, ...] = ()
    span: Optional[SourceSpan] = _span()

    def kernel(self, name: str) -> Kernel:
        for k in self.kernels:
            if k.name == name:
                return k
        raise KeyError(name)

    def kernel_names(self) -> list[str]:
        return [k.name for k in self.kernels]


def walk(node: Node) -> Iterator[Node]:
    """Pre-order traversal of ``node`` and all its descendants."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(list(n.children())))


def stmt_bodies(stmt: Stmt) -> tuple[tuple[Stmt, ...], ...]:
    """The nested statement sequences of a statement, in source order."""
    if isinstance(stmt, (ForAll, For, While)):
        return (stmt.body,)
    if isinstance(stmt, If):
        return (stmt.then, stmt.orelse)
    if isinstance(stmt, (Atomic, Exclusive)):
        return (stmt.locked,) if stmt.failed is None else (stmt.locked, stmt.failed)
    if isinstance(stmt, Iterate):
        return (stmt.between_rounds,)
    if isinstance(stmt, Pipe):
        return (stmt.body,)
    return ()


def walk_stmts(stmts: tuple[Stmt, ...]) -> Iterator[Stmt]:
    for s in stmts:
        yield s
        for body in stmt_bodies(s):
            yield from walk_stmts(body)
