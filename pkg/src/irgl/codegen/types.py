"""Name classification and C++ type inference for emitted code.

IrGL programs are untyped apart from optional parameter tags, so the
emitter infers a C++ type for every global, parameter and kernel local
from how the name is used: indexed names are arrays, names with graph
methods are graphs, lock names are ``int`` and so on. Anything without
evidence is a ``long long`` scalar.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

from irgl import ast
from irgl.opcode import Assign, ExprStmt, IncDec, LocalDecl, parse_operator

GRAPH_METHODS = ("edges", "nodes", "neighbors", "degree", "dst", "src", "weight")
GRAPH_FIELDS = ("nnodes", "nedges")
EDGE_FIELDS = ("dst", "src", "weight", "wt")
RESERVED_FIELDS = GRAPH_FIELDS + EDGE_FIELDS + ("id",)
WORKLIST_NAMES = ("wl", "WL")

# C++ type spellings
I64 = "long long"
F64 = "double"
BOOL = "bool"
INT = "int"
GRAPH = "irgl_rt::Graph"
LOCAL_ARRAY = "irgl_rt::LocalArray"
INDEX = "irgl_rt::index_t"


def array_of(elem: str) -> str:
    return f"irgl_rt::Array<{elem}>"


def is_array(ctype: str) -> bool:
    return ctype.startswith("irgl_rt::Array<") or ctype == LOCAL_ARRAY


TAG_TYPES = {
    "int": I64, "float": F64, "bool": BOOL, "array": array_of(I64),
    "farray": array_of(F64), "graph": GRAPH,
}

# Words a user identifier may not shadow in the generated C++.
CXX_RESERVED = frozenset("""
alignas alignof and asm auto bitand bitor bool break case catch char class compl const
constexpr const_cast continue decltype default delete do double dynamic_cast else enum
explicit export extern false float for friend goto if inline int long main mutable namespace new
noexcept not nullptr operator or private protected public register reinterpret_cast return
short signed sizeof static static_assert static_cast struct switch template this throw true
try typedef typeid typename union unsigned using virtual void volatile wchar_t while xor
printf dim3 threadIdx blockIdx blockDim gridDim warpSize
""".split())


def mangle(name: str) -> str:
    """User identifiers pass through unless they collide with C++ or with
    the ``irgl_`` prefix reserved for compiler-introduced names."""
    if name in CXX_RESERVED or name.lower().startswith("irgl_"):
        return f"u_{name}"
    return name


# ---------------------------------------------------------------------------
# Expression walking over statements, including operator code
# ---------------------------------------------------------------------------


def op_stmts(block: ast.CBlock):
    return parse_operator(block.code)


def stmt_exprs(s: ast.Stmt) -> Iterator[ast.Expr]:
    """Top-level expressions owned directly by ``s`` (not its bodies)."""
    if isinstance(s, ast.CBlock):
        for op in op_stmts(s):
            if isinstance(op, Assign):
                yield op.target
                yield op.value
            elif isinstance(op, IncDec):
                yield op.target
            elif isinstance(op, LocalDecl):
                if op.init is not None:
                    yield op.init
            elif isinstance(op, ExprStmt):
                yield op.expr
    elif isinstance(s, (ast.ForAll, ast.For)):
        yield s.iterator
    elif isinstance(s, (ast.While, ast.If)):
        yield s.cond
    elif isinstance(s, ast.Atomic):
        yield s.lock
    elif isinstance(s, ast.Exclusive):
        yield s.object
        yield s.count
        yield s.locks.array if isinstance(s.locks, ast.LockArray) else s.locks.iterator
    elif isinstance(s, (ast.Retry, ast.Respawn)):
        yield s.item
    elif isinstance(s, ast.ReduceAndReturn):
        yield s.value
    elif isinstance(s, (ast.Invoke, ast.Iterate)):
        yield from s.args
        if isinstance(s, ast.Iterate) and s.extra_cond is not None:
            yield s.extra_cond.expr
    elif isinstance(s, ast.WlPop):
        yield s.index
    elif isinstance(s, ast.WlPush):
        yield s.value
    init = getattr(s, "initial", None) if isinstance(s, ast.Iterate) else getattr(s, "wlinit", None)
    if init is not None:
        if init.size is not None:
            yield init.size
        if isinstance(init.source, ast.Scalars):
            yield from init.source.items
        else:
            yield init.source.array
            yield init.source.length


def all_exprs(body) -> Iterator[ast.Expr]:
    for s in ast.walk_stmts(body):
        for e in stmt_exprs(s):
            for n in ast.walk(e):
                if isinstance(n, ast.Expr):
                    yield n


def names_in(e: ast.Expr) -> set[str]:
    return {n.id for n in ast.walk(e) if isinstance(n, ast.Name)}


def assigned_names(body) -> dict[str, list]:
    """Name -> list of assigned values (None when unknown) in source order."""
    out: dict[str, list] = {}
    for s in ast.walk_stmts(body):
        if isinstance(s, ast.CBlock):
            for op in op_stmts(s):
                if isinstance(op, Assign) and isinstance(op.target, ast.Name):
                    out.setdefault(op.target.id, []).append(op.value if op.op == "=" else None)
                elif isinstance(op, IncDec) and isinstance(op.target, ast.Name):
                    out.setdefault(op.target.id, []).append(None)
        elif isinstance(s, ast.WlPop):
            out.setdefault(s.var, []).append(None)
        elif isinstance(s, ast.Invoke) and s.result:
            out.setdefault(s.result, []).append(ast.BoolLit(True))
    return out


def local_decls(body) -> dict[str, str]:
    out = {}
    for s in ast.walk_stmts(body):
        if isinstance(s, ast.CBlock):
            for op in op_stmts(s):
                if isinstance(op, LocalDecl):
                    out[op.name] = op.ctype
    return out


def loop_vars(body) -> set[str]:
    return {s.var for s in ast.walk_stmts(body) if isinstance(s, (ast.ForAll, ast.For))}


def property_names(module: ast.Module) -> set[str]:
    out = set()
    for k in module.kernels:
        for e in all_exprs(k.body):
            if isinstance(e, ast.Field) and e.name not in RESERVED_FIELDS:
                out.add(e.name)
    return out


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


@dataclass
class KernelScope:
    params: list[str]
    locals: dict[str, str] = field(default_factory=dict)  # name -> ctype (predeclared)
    decls: dict[str, str] = field(default_factory=dict)  # inline LocalDecls
    loop_vars: set[str] = field(default_factory=set)
    param_types: dict[str, str] = field(default_factory=dict)


@dataclass
class TypeInfo:
    globals: dict[str, str]  # name -> ctype, module order of first appearance
    scopes: dict[str, KernelScope]
    external: list[str]  # globals read by host code before any assignment
    default_graph: Optional[str]

    def ctype(self, kernel: Optional[str], name: str) -> Optional[str]:
        if kernel is not None:
            sc = self.scopes[kernel]
            if name in sc.param_types:
                return sc.param_types[name]
            if name in sc.locals:
                return sc.locals[name]
            if name in sc.decls:
                return sc.decls[name]
            if name in sc.loop_vars:
                return INDEX
        return self.globals.get(name)


class _Evidence:
    """Accumulates usage facts per (scope, name) key."""

    def __init__(self):
        self.facts: dict[tuple, set[str]] = {}

    def add(self, key, fact: str) -> None:
        self.facts.setdefault(key, set()).add(fact)

    def resolve(self, key) -> str:
        f = self.facts.get(key, set())
        if "graph" in f:
            return GRAPH
        if "local_array" in f and "array" not in f and "lock_array" not in f:
            return LOCAL_ARRAY
        if "lock_array" in f:
            return array_of(INT)
        if "array" in f or "local_array" in f:
            return array_of(F64 if "float" in f else I64)
        if "lock" in f:
            return INT
        if "float" in f:
            return F64
        if "bool" in f and "int" not in f:
            return BOOL
        return I64


_ARRAY_BUILTINS = ("array", "iota")
_LOCAL_ARRAY_BUILTINS = ("append", "slice")
_BOOL_OPS = ("==", "!=", "<", "<=", ">", ">=", "&&", "||")


def _value_facts(v: Optional[ast.Expr], in_kernel: bool) -> set[str]:
    if v is None:
        return {"int"}
    if isinstance(v, ast.FloatLit):
        return {"float"}
    if isinstance(v, ast.BoolLit):
        return {"bool"}
    if isinstance(v, ast.Binary) and v.op in _BOOL_OPS or isinstance(v, ast.Unary) and v.op == "!":
        return {"bool"}
    if isinstance(v, ast.Call):
        if v.func in _ARRAY_BUILTINS:
            floaty = len(v.args) > 1 and isinstance(v.args[1], ast.FloatLit)
            return {"array", "float"} if floaty else {"array"}
        if v.func in _LOCAL_ARRAY_BUILTINS or v.func == "neighbors":
            return {"local_array"}
        if v.func == "float":
            return {"float"}
    if isinstance(v, ast.MethodCall) and v.method == "neighbors":
        return {"local_array"}
    return {"int"}


def infer(module: ast.Module) -> TypeInfo:
    kernels = {k.name: k for k in module.kernels}
    props = property_names(module)

    # Which names are module globals.
    order: list[str] = [d.name for d in module.decls]
    decl_names = {d.name for d in module.decls}
    external: list[str] = []
    for k in module.kernels:
        if not k.is_host:
            continue
        skip = {p.name for p in k.params} | loop_vars(k.body) | {"INF"}
        seen_assign: set[str] = set()
        for s in ast.walk_stmts(k.body):
            reads, writes = stmt_reads_writes(s)
            for n in sorted(reads - skip):
                if n not in seen_assign and n not in decl_names and n not in external:
                    external.append(n)
                if n not in order:
                    order.append(n)
            for n in sorted(writes - skip):
                seen_assign.add(n)
                if n not in order:
                    order.append(n)
    for p in sorted(props):
        if p not in order:
            order.append(p)
    # Free reads in plain and device kernels are globals too.
    for k in module.kernels:
        if k.is_host:
            continue
        params = {p.name for p in k.params}
        bound = params | loop_vars(k.body) | set(local_decls(k.body))
        assigned = set(assigned_names(k.body))
        for e in all_exprs(k.body):
            if isinstance(e, ast.Name) and e.id not in bound and e.id not in assigned \
                    and e.id != "INF" and e.id not in WORKLIST_NAMES and e.id not in order:
                order.append(e.id)
    global_set = set(order)

    scopes: dict[str, KernelScope] = {}
    for k in module.kernels:
        params = [p.name for p in k.params]
        lv = loop_vars(k.body)
        decls = local_decls(k.body)
        locs = [n for n in assigned_names(k.body)
                if n not in params and n not in lv and n not in decls and
                (k.is_host or n not in global_set) and not (k.is_host and n in global_set)]
        scopes[k.name] = KernelScope(params, {n: I64 for n in locs}, dict(decls), lv)

    ev = _Evidence()

    def key(kname: Optional[str], name: str):
        if kname is not None:
            sc = scopes[kname]
            if name in sc.params or name in sc.locals:
                return (kname, name)
        return ("", name)

    for k in module.kernels:
        kn = k.name
        for p in k.params:
            if p.tag != "any":
                ev.add((kn, p.name), "tag:" + p.tag)
        for e in all_exprs(k.body):
            if isinstance(e, ast.Index) and isinstance(e.base, ast.Name):
                ev.add(key(kn, e.base.id), "array")
            elif isinstance(e, ast.MethodCall) and e.method in GRAPH_METHODS and isinstance(e.obj, ast.Name):
                ev.add(key(kn, e.obj.id), "graph")
            elif isinstance(e, ast.Field) and isinstance(e.base, ast.Name) and e.name in GRAPH_FIELDS:
                ev.add(key(kn, e.base.id), "graph")
            elif isinstance(e, ast.Field) and e.name not in RESERVED_FIELDS:
                ev.add(("", e.name), "array")
        for s in ast.walk_stmts(k.body):
            if isinstance(s, ast.Atomic):
                if isinstance(s.lock, ast.Name):
                    ev.add(key(kn, s.lock.id), "lock")
                elif isinstance(s.lock, ast.Index) and isinstance(s.lock.base, ast.Name):
                    ev.add(key(kn, s.lock.base.id), "lock_array")
            elif isinstance(s, ast.Exclusive):
                if isinstance(s.locks, ast.LockArray) and isinstance(s.locks.array, ast.Name):
                    ev.add(key(kn, s.locks.array.id), "local_array")
            elif isinstance(s, ast.CBlock):
                for op in op_stmts(s):
                    if isinstance(op, Assign) and isinstance(op.target, ast.Name) and op.op == "=":
                        for f in _value_facts(op.value, not k.is_host):
                            ev.add(key(kn, op.target.id), f)
            init = s.initial if isinstance(s, ast.Iterate) else getattr(s, "wlinit", None)
            if init is not None and isinstance(init.source, ast.FromArray) \
                    and isinstance(init.source.array, ast.Name):
                ev.add(key(kn, init.source.array.id), "array")

    # Propagate between call-site arguments and parameters both ways.
    for _ in range(3):
        for k in module.kernels:
            for s in ast.walk_stmts(k.body):
                if isinstance(s, (ast.Invoke, ast.Iterate)) and s.kernel in kernels:
                    _unify_args(ev, key, k.name, s.kernel, kernels[s.kernel], s.args)
            for e in all_exprs(k.body):
                if isinstance(e, ast.Call) and e.func in kernels:
                    _unify_args(ev, key, k.name, e.func, kernels[e.func], e.args)

    gtypes = {n: ev.resolve(("", n)) for n in order}
    for d in module.decls:
        if d.tag != "any":
            gtypes[d.name] = TAG_TYPES[d.tag]
    host_written: set[str] = set()
    for k in module.kernels:
        if k.is_host:
            host_written |= set(assigned_names(k.body))
    for n in order:
        if n not in host_written and n not in decl_names and n not in external:
            external.append(n)
    for k in module.kernels:
        sc = scopes[k.name]
        for p in k.params:
            tag_facts = [f for f in ev.facts.get((k.name, p.name), ()) if f.startswith("tag:")]
            sc.param_types[p.name] = TAG_TYPES[tag_facts[0][4:]] if tag_facts else ev.resolve((k.name, p.name))
        for n in sc.locals:
            sc.locals[n] = ev.resolve((k.name, n))
    default_graph = next((n for n, t in gtypes.items() if t == GRAPH), None)
    return TypeInfo(gtypes, scopes, external, default_graph)


def _unify_args(ev: _Evidence, key, caller: str, callee: str, kernel: ast.Kernel, args) -> None:
    for p, a in zip(kernel.params, args):
        if isinstance(a, ast.Name):
            ka = key(caller, a.id)
            kp = (callee, p.name)
            merged = ev.facts.get(ka, set()) | {f for f in ev.facts.get(kp, set()) if not f.startswith("tag:")}
            for f in merged:
                ev.add(ka, f)
                ev.add(kp, f)
            for f in ev.facts.get(kp, set()):
                if f.startswith("tag:") and f[4:] == "graph":
                    ev.add(ka, "graph")


def stmt_reads_writes(s: ast.Stmt) -> tuple[set[str], set[str]]:
    """Plain names read and assigned by ``s`` itself (not its bodies)."""
    if isinstance(s, ast.CBlock):
        reads: set[str] = set()
        writes: set[str] = set()
        for op in op_stmts(s):
            if isinstance(op, (Assign, IncDec)) and isinstance(op.target, ast.Name):
                if isinstance(op, IncDec) or op.op != "=":
                    reads.add(op.target.id)
                if isinstance(op, Assign):
                    reads |= names_in(op.value) - writes
                writes.add(op.target.id)
            elif isinstance(op, Assign):
                reads |= names_in(op.target) | names_in(op.value)
            elif isinstance(op, IncDec):
                reads |= names_in(op.target)
            elif isinstance(op, LocalDecl):
                if op.init is not None:
                    reads |= names_in(op.init)
            else:
                reads |= names_in(op.expr)
        return reads, writes
    reads = set()
    for e in stmt_exprs(s):
        reads |= names_in(e)
    writes = {s.result} if isinstance(s, ast.Invoke) and s.result else set()
    return reads, writes
