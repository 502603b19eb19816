"""Compile AST into Python closures.

Expressions become ``fn(frame) -> value``. Statements become either plain
functions (``SIMPLE``) or generator functions (``GEN``) that yield one
scheduler event per executed statement and return a control signal:
``None`` to fall through, ``END_ITER`` to finish the current ForAll
iteration or ``END_KERNEL`` to finish the thread.
"""

from __future__ import annotations

import math
import re
from typing import Any, Callable, Optional

from irgl import ast
from irgl.diagnostics import DiagnosticError, error
from irgl.interp.values import INF, EdgeRef, Graph, NodeRef, SimError, format_value, type_name
from irgl.opcode import Assign, ExprStmt, IncDec, LocalDecl, parse_operator

# scheduler events
STEP, LOCKWAIT, BARRIER = 0, 1, 2
# control signals
END_ITER, END_KERNEL = "end-iter", "end-kernel"

SIMPLE, GEN = 0, 1

WL_NAMES = ("wl", "WL")
GRAPH_METHODS = ("edges", "nodes", "neighbors", "degree", "dst", "src", "weight")
GRAPH_FIELDS = ("nnodes", "nedges")
EDGE_FIELDS = ("dst", "src", "weight", "wt")


class UnboundName(SimError):
    pass


class SimTypeError(SimError):
    pass


class Frame:
    """Execution state of one virtual thread (or of the host)."""

    __slots__ = ("locals", "m", "th", "host")

    def __init__(self, machine, locals_: dict, th=None, host: bool = False):
        self.locals = locals_
        self.m = machine
        self.th = th
        self.host = host


# ---------------------------------------------------------------------------
# Arithmetic with C semantics
# ---------------------------------------------------------------------------


def _num(v: Any, op: str):
    if isinstance(v, (int, float)):
        return v
    raise SimTypeError(f"operator '{op}' applied to {type_name(v)}")


def c_div(a, b):
    a, b = _num(a, "/"), _num(b, "/")
    if b == 0:
        raise SimError("division by zero")
    if isinstance(a, float) or isinstance(b, float):
        return a / b
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def c_mod(a, b):
    a, b = _num(a, "%"), _num(b, "%")
    if b == 0:
        raise SimError("division by zero")
    if isinstance(a, float) or isinstance(b, float):
        return math.fmod(a, b)
    return a - b * c_div(a, b)


def _arith(op: str) -> Callable[[Any, Any], Any]:
    if op == "+":
        return lambda a, b: _num(a, op) + _num(b, op)
    if op == "-":
        return lambda a, b: _num(a, op) - _num(b, op)
    if op == "*":
        return lambda a, b: _num(a, op) * _num(b, op)
    if op == "/":
        return c_div
    if op == "%":
        return c_mod
    raise AssertionError(op)


_COMPARE = {
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def _check_index(container, i):
    if not isinstance(container, list):
        raise SimTypeError(f"cannot index a value of type {type_name(container)}")
    if not isinstance(i, int) or isinstance(i, bool):
        raise SimTypeError(f"array index must be an int, got {type_name(i)}")
    if not 0 <= i < len(container):
        raise SimError(f"index {i} out of bounds for array of length {len(container)}")


# ---------------------------------------------------------------------------
# Builtins
# ---------------------------------------------------------------------------


def _int_arg(v, what: str) -> int:
    if not isinstance(v, int) or isinstance(v, bool):
        raise SimTypeError(f"{what} must be an int, got {type_name(v)}")
    return v


def _b_array(m, n, init=0):
    n = _int_arg(n, "array size")
    if n < 0:
        raise SimError(f"negative array size {n}")
    return [init] * n


def _b_iota(m, n):
    return list(range(_int_arg(n, "iota size")))


def _b_range(m, a, b=None):
    if b is None:
        return range(_int_arg(a, "range bound"))
    return range(_int_arg(a, "range start"), _int_arg(b, "range end"))


def _b_len(m, x):
    if isinstance(x, (list, range)):
        return len(x)
    raise SimTypeError(f"len() of {type_name(x)}")


def _b_slice(m, a, lo, hi):
    if not isinstance(a, list):
        raise SimTypeError(f"slice() of {type_name(a)}")
    lo, hi = _int_arg(lo, "slice start"), _int_arg(hi, "slice end")
    if not 0 <= lo <= hi <= len(a):
        raise SimError(f"slice [{lo}, {hi}) out of bounds for array of length {len(a)}")
    return a[lo:hi]


def _b_append(m, a, x):
    if not isinstance(a, list):
        raise SimTypeError(f"append() to {type_name(a)}")
    return a + [x]


def _graph_of(m, e) -> Graph:
    g = getattr(e, "graph", None)
    return g if g is not None else m.default_graph()


_PRINTF_SPEC = re.compile(r"%([-+ #0]*\d*(?:\.\d+)?)(?:hh|h|ll|l|z|j|t)?([diuxXfeEgGcs%])")


def format_printf(fmt: str, args) -> str:
    args = list(args)

    def conv(m):
        flags, kind = m.group(1), m.group(2)
        if kind == "%":
            return "%"
        if not args:
            raise SimError("printf: too few arguments")
        v = args.pop(0)
        if kind == "u":
            kind = "d"
        if kind == "s":
            v = v if isinstance(v, str) else format_value(v)
        elif kind in "di" and isinstance(v, (int, float)):
            v = int(v)
        return ("%" + flags + kind) % v

    return _PRINTF_SPEC.sub(conv, fmt)


def _b_printf(m, fmt, *args):
    if not isinstance(fmt, str):
        raise SimTypeError("printf format must be a string")
    m.printf(format_printf(fmt, args))


BUILTINS: dict[str, Callable] = {
    "array": _b_array,
    "iota": _b_iota,
    "range": _b_range,
    "len": _b_len,
    "min": lambda m, *a: min(a),
    "max": lambda m, *a: max(a),
    "abs": lambda m, x: abs(_num(x, "abs")),
    "slice": _b_slice,
    "append": _b_append,
    "printf": _b_printf,
    "int": lambda m, x: int(_num(x, "int")),
    "float": lambda m, x: float(_num(x, "float")),
    "edges": lambda m, n: _graph_of(m, n).edges(n),
    "neighbors": lambda m, n: _graph_of(m, n).neighbors(n),
    "degree": lambda m, n: _graph_of(m, n).degree(n),
    "dst": lambda m, e: _graph_of(m, e).dst(e),
    "src": lambda m, e: _graph_of(m, e).src(e),
    "weight": lambda m, e: _graph_of(m, e).weight(e),
}


def _graph_method(g: Graph, name: str, args):
    if name == "nodes":
        if args:
            raise SimTypeError("graph.nodes() takes no arguments")
        return g.nodes()
    if len(args) != 1:
        raise SimTypeError(f"graph.{name}() takes one argument")
    a = _int_arg(args[0], f"graph.{name}() argument")
    return getattr(g, name)(a)


# ---------------------------------------------------------------------------
# Expression compilation
# ---------------------------------------------------------------------------


def _unsupported(msg: str, node) -> DiagnosticError:
    return DiagnosticError([error("interp-unsupported", msg, getattr(node, "span", None))])


class Compiler:
    """Compiles the kernels of one module. Closures find the machine
    through the frame, so one compiled module serves many machines."""

    def __init__(self, module: ast.Module, infos):
        self.module = module
        self.infos = infos
        self.kernels = {k.name: k for k in module.kernels}
        self.device = {k.name for k in module.kernels if k.kind is ast.KernelKind.DEVICE}
        self.bodies: dict[str, Callable] = {}

    # -- expressions -------------------------------------------------------

    def expr(self, e: ast.Expr) -> Callable[[Frame], Any]:
        if isinstance(e, (ast.IntLit, ast.FloatLit, ast.BoolLit, ast.StrLit)):
            v = e.value
            return lambda fr: v
        if isinstance(e, ast.Name):
            return self._name(e.id)
        if isinstance(e, ast.Unary):
            f = self.expr(e.operand)
            if e.op == "!":
                return lambda fr: not f(fr)
            return lambda fr: -_num(f(fr), "-")
        if isinstance(e, ast.Binary):
            return self._binary(e)
        if isinstance(e, ast.Index):
            base, idx = self.expr(e.base), self.expr(e.index)

            def index(fr):
                c, i = base(fr), idx(fr)
                _check_index(c, i)
                return c[i]
            return index
        if isinstance(e, ast.Field):
            return self._field(e)
        if isinstance(e, ast.Call):
            return self._call(e)
        if isinstance(e, ast.MethodCall):
            return self._method(e)
        raise _unsupported(f"unsupported expression {type(e).__name__}", e)

    def _name(self, name: str):
        if name in WL_NAMES:
            return lambda fr: fr.m.wl_range()

        def load(fr):
            try:
                return fr.locals[name]
            except KeyError:
                pass
            try:
                return fr.m.globals[name]
            except KeyError:
                pass
            if name == "INF":
                return INF
            raise UnboundName(f"unbound name '{name}'")
        return load

    def _binary(self, e: ast.Binary):
        lf, rf = self.expr(e.left), self.expr(e.right)
        op = e.op
        if op == "&&":
            return lambda fr: bool(lf(fr)) and bool(rf(fr))
        if op == "||":
            return lambda fr: bool(lf(fr)) or bool(rf(fr))
        if op in _COMPARE:
            cmp = _COMPARE[op]
            return lambda fr: cmp(lf(fr), rf(fr))
        fn = _arith(op)
        return lambda fr: fn(lf(fr), rf(fr))

    def _field(self, e: ast.Field):
        base = self.expr(e.base)
        name = e.name

        def field(fr):
            b = base(fr)
            if name == "id" and isinstance(b, int):
                return int(b)
            if isinstance(b, EdgeRef) and name in EDGE_FIELDS:
                g = b.graph
                if name == "dst":
                    return NodeRef(g.col[b], g)
                if name == "src":
                    return NodeRef(g.edge_src[b], g)
                return g.weights[b]
            if isinstance(b, NodeRef):
                arr = fr.m.node_property(name, b.graph)
                return arr[b]
            if isinstance(b, Graph) and name in GRAPH_FIELDS:
                return getattr(b, name)
            raise SimTypeError(f"{type_name(b)} has no field '{name}'")
        return field

    def _call(self, e: ast.Call):
        args = [self.expr(a) for a in e.args]
        if e.func in self.device:
            run = self.kernel_body(e.func)
            params = [p.name for p in self.kernels[e.func].params]
            if len(params) != len(args):
                raise _unsupported(f"device kernel '{e.func}' takes {len(params)} argument(s)", e)

            def call_device(fr):
                sub = Frame(fr.m, {p: a(fr) for p, a in zip(params, args)}, fr.th, False)
                for _ in run(sub):
                    pass
                return None
            return call_device
        fn = BUILTINS.get(e.func)
        if fn is None:
            raise _unsupported(f"unknown function '{e.func}'", e)
        return lambda fr: fn(fr.m, *[a(fr) for a in args])

    def _method(self, e: ast.MethodCall):
        if e.method not in GRAPH_METHODS:
            raise _unsupported(f"unknown method '{e.method}'", e)
        obj = self.expr(e.obj)
        args = [self.expr(a) for a in e.args]
        name = e.method

        def method(fr):
            o = obj(fr)
            if not isinstance(o, Graph):
                raise SimTypeError(f"method '{name}' called on {type_name(o)}")
            return _graph_method(o, name, [a(fr) for a in args])
        return method

    # -- stores ------------------------------------------------------------

    def store(self, target: ast.Expr) -> Callable[[Frame, Any], None]:
        if isinstance(target, ast.Name):
            name = target.id

            def store_name(fr, v):
                loc = fr.locals
                if name in loc:
                    loc[name] = v
                elif fr.host or name in fr.m.globals:
                    fr.m.globals[name] = v
                else:
                    loc[name] = v
            return store_name
        if isinstance(target, ast.Index):
            base, idx = self.expr(target.base), self.expr(target.index)

            def store_index(fr, v):
                c, i = base(fr), idx(fr)
                _check_index(c, i)
                c[i] = v
            return store_index
        if isinstance(target, ast.Field):
            base = self.expr(target.base)
            name = target.name

            def store_field(fr, v):
                b = base(fr)
                if not isinstance(b, NodeRef):
                    raise SimTypeError(f"cannot assign field '{name}' of {type_name(b)}")
                fr.m.node_property(name, b.graph)[b] = v
            return store_field
        raise _unsupported("unsupported assignment target", target)

    def lock_ref(self, e: ast.Expr):
        """``fn(frame) -> (container, key, label)`` for a lock lvalue."""
        if isinstance(e, ast.Name):
            name = e.id

            def ref_name(fr):
                if name in fr.locals:
                    return fr.locals, name, name
                if name not in fr.m.globals:
                    raise UnboundName(f"unbound lock variable '{name}'")
                return fr.m.globals, name, name
            return ref_name
        if isinstance(e, ast.Index) and isinstance(e.base, ast.Name):
            base, idx = self.expr(e.base), self.expr(e.index)
            bname = e.base.id

            def ref_index(fr):
                c, i = base(fr), idx(fr)
                _check_index(c, i)
                return c, i, f"{bname}[{i}]"
            return ref_index
        if isinstance(e, ast.Field):
            base = self.expr(e.base)
            name = e.name

            def ref_field(fr):
                b = base(fr)
                if not isinstance(b, NodeRef):
                    raise SimTypeError(f"lock field '{name}' of {type_name(b)}")
                return fr.m.node_property(name, b.graph), int(b), f"{name}[{int(b)}]"
            return ref_field
        raise _unsupported("Atomic lock must be a variable, an array element or a node property", e)

    # -- operator code -----------------------------------------------------

    def op(self, s) -> Callable[[Frame], None]:
        if isinstance(s, Assign):
            put = self.store(s.target)
            val = self.expr(s.value)
            if s.op == "=":
                return lambda fr: put(fr, val(fr))
            get = self.expr(s.target)
            fn = _arith(s.op[0])
            return lambda fr: put(fr, fn(get(fr), val(fr)))
        if isinstance(s, IncDec):
            put, get = self.store(s.target), self.expr(s.target)
            d = 1 if s.op == "++" else -1
            return lambda fr: put(fr, _num(get(fr), s.op) + d)
        if isinstance(s, LocalDecl):
            init = self.expr(s.init) if s.init is not None else (lambda fr: 0)
            cast = _CASTS.get(s.ctype, int)
            name = s.name

            def decl(fr):
                fr.locals[name] = cast(init(fr))
            return decl
        if isinstance(s, ExprStmt):
            f = self.expr(s.expr)
            return lambda fr: (f(fr), None)[1]
        raise AssertionError(s)

    # -- statements --------------------------------------------------------

    def kernel_body(self, name: str) -> Callable:
        if name not in self.bodies:
            k = self.kernels[name]
            info = self.infos.get(name)
            ctx = _Ctx(k.name, k.kind, uniform=bool(info and info.uses_barrier))
            self.bodies[name] = self.seq(k.body, ctx)
        return self.bodies[name]

    def seq(self, body, ctx: "_Ctx") -> Callable:
        items = [self.stmt(s, ctx) for s in body]

        def run(fr):
            for kind, fn in items:
                if kind == SIMPLE:
                    fn(fr)
                    yield STEP
                else:
                    sig = yield from fn(fr)
                    if sig is not None:
                        return sig
            return None
        return run

    def stmt(self, s: ast.Stmt, ctx: "_Ctx"):
        if isinstance(s, ast.CBlock):
            ops = [self.op(o) for o in parse_operator(s.code)]
            if len(ops) == 1:
                return SIMPLE, ops[0]

            def cb(fr):
                for o in ops:
                    o(fr)
            return SIMPLE, cb
        if isinstance(s, ast.WlPop):
            idx = self.expr(s.index)
            put = self.store(ast.Name(s.var))
            return SIMPLE, lambda fr: put(fr, fr.m.wl_pop(fr, idx(fr)))
        if isinstance(s, ast.WlPush):
            val = self.expr(s.value)
            return SIMPLE, lambda fr: fr.m.wl_push(fr, val(fr))
        if isinstance(s, (ast.Retry, ast.Respawn)):
            val = self.expr(s.item)
            conflict = isinstance(s, ast.Retry)
            return SIMPLE, lambda fr: fr.m.wl_retry(fr, val(fr), conflict)
        if isinstance(s, ast.ReduceAndReturn):
            val = self.expr(s.value)
            sig = END_ITER if ctx.forall_depth else END_KERNEL

            def reduce(fr):
                fr.m.reduce_value(fr, bool(val(fr)))
                yield STEP
                return sig
            return GEN, reduce
        if isinstance(s, ast.If):
            return GEN, self._if(s, ctx)
        if isinstance(s, ast.While):
            return GEN, self._while(s, ctx)
        if isinstance(s, ast.For):
            return GEN, self._for(s.var, s.iterator, s.body, ctx, catch=False)
        if isinstance(s, ast.ForAll):
            if ctx.forall_depth == 0 and ctx.kind is ast.KernelKind.PLAIN:
                return GEN, self._outer_forall(s, ctx)
            return GEN, self._for(s.var, s.iterator, s.body, ctx.nested(), catch=True)
        if isinstance(s, ast.Atomic):
            return GEN, self._atomic(s, ctx)
        if isinstance(s, ast.Exclusive):
            return GEN, self._exclusive(s, ctx)
        if isinstance(s, ast.SyncRunningThreads):
            def sync(fr):
                yield from fr.m.barrier(fr.th, "sync")
            return GEN, sync
        if isinstance(s, ast.Invoke):
            args = [self.expr(a) for a in s.args]
            return SIMPLE, lambda fr: fr.m.host_invoke(fr, s, args)
        if isinstance(s, ast.Iterate):
            args = [self.expr(a) for a in s.args]
            between = self.seq(s.between_rounds, ctx)
            extra = self.expr(s.extra_cond.expr) if s.extra_cond is not None else None
            init = self.wlinit(s.initial)
            return SIMPLE, lambda fr: fr.m.host_iterate(fr, s, args, between, extra, init)
        if isinstance(s, ast.Pipe):
            body = self.seq(s.body, ctx)
            init = self.wlinit(s.wlinit)
            return SIMPLE, lambda fr: fr.m.host_pipe(fr, s, body, init)
        raise _unsupported(f"unsupported statement {type(s).__name__}", s)

    def wlinit(self, w: Optional[ast.WorklistInit]):
        """``fn(frame) -> (capacity, items)`` or None."""
        if w is None:
            return None
        size = self.expr(w.size) if w.size is not None else None
        if isinstance(w.source, ast.Scalars):
            items = [self.expr(x) for x in w.source.items]

            def scalars(fr):
                return (None if size is None else size(fr)), [i(fr) for i in items]
            return scalars
        arr, length = self.expr(w.source.array), self.expr(w.source.length)

        def from_array(fr):
            a, n = arr(fr), length(fr)
            if not isinstance(a, list):
                raise SimTypeError(f"FromArray source is {type_name(a)}, not an array")
            if not 0 <= n <= len(a):
                raise SimError(f"FromArray length {n} exceeds array length {len(a)}")
            return (None if size is None else size(fr)), a[:n]
        return from_array

    def _if(self, s: ast.If, ctx):
        cond = self.expr(s.cond)
        then = self.seq(s.then, ctx)
        orelse = self.seq(s.orelse, ctx)

        def run_if(fr):
            if cond(fr):
                return (yield from then(fr))
            return (yield from orelse(fr))
        return run_if

    def _while(self, s: ast.While, ctx):
        cond = self.expr(s.cond)
        body = self.seq(s.body, ctx)

        def run_while(fr):
            while cond(fr):
                yield STEP
                sig = yield from body(fr)
                if sig is not None:
                    return sig
            return None
        return run_while

    def _for(self, var, iterator, body, ctx, catch: bool):
        it = self.expr(iterator)
        run_body = self.seq(body, ctx)

        def run_for(fr):
            loc = fr.locals
            for x in _iterable(it(fr)):
                loc[var] = x
                yield STEP
                sig = yield from run_body(fr)
                if sig is not None and not (catch and sig == END_ITER):
                    return sig
            return None
        return run_for

    def _outer_forall(self, s: ast.ForAll, ctx):
        it = self.expr(s.iterator)
        inner = ctx.nested()
        body = self.seq(s.body, inner)
        var = s.var
        mapping = s.mapping
        kernel = ctx.kernel
        padding = self._padding(s.body, inner) if ctx.uniform else None

        def run_forall(fr):
            m = fr.m
            items = _iterable(it(fr))
            if not isinstance(items, (list, range)):
                items = list(items)
            n = len(items)
            nthreads = m.nthreads
            t = fr.th.tid
            blocked = m.mapping_for(kernel, mapping) is ast.Mapping.BLOCKED
            chunk = -(-n // nthreads) if nthreads else 0
            if blocked:
                indices = [t * chunk + j for j in range(chunk)]
            else:
                indices = list(range(t, chunk * nthreads, nthreads))
            loc = fr.locals
            for i in indices:
                if i < n:
                    loc[var] = items[i]
                    yield STEP
                    sig = yield from body(fr)
                    if sig == END_KERNEL:
                        return sig
                elif padding is not None:
                    yield from padding(fr)
            return None
        return run_forall

    def _padding(self, body, ctx):
        """Barrier participation of an inactive iteration in a barrier kernel."""
        steps = []
        for s in body:
            if isinstance(s, ast.SyncRunningThreads):
                steps.append(None)
            elif isinstance(s, ast.Exclusive):
                steps.append(s)

        def pad(fr):
            for s in steps:
                if s is None:
                    yield from fr.m.barrier(fr.th, "sync")
                else:
                    yield from exclusive_protocol(fr, None, [], None, None, active=False)
        return pad

    def _atomic(self, s: ast.Atomic, ctx):
        ref = self.lock_ref(s.lock)
        locked = self.seq(s.locked, ctx)
        failed = self.seq(s.failed, ctx) if s.failed is not None else None

        def run_atomic(fr):
            m = fr.m
            cont, key, label = ref(fr)
            if failed is None:
                spins = 0
                while not m.try_acquire(fr, cont, key, label):
                    spins += 1
                    m.note_spins(spins)
                    yield LOCKWAIT
                yield STEP
                sig = yield from locked(fr)
                m.release(fr, cont, key, label)
                return sig
            if m.try_acquire(fr, cont, key, label):
                yield STEP
                sig = yield from locked(fr)
                m.release(fr, cont, key, label)
                return sig
            yield STEP
            return (yield from failed(fr))
        return run_atomic

    def _exclusive(self, s: ast.Exclusive, ctx):
        obj = self.expr(s.object)
        count = self.expr(s.count)
        source = self.expr(s.locks.array if isinstance(s.locks, ast.LockArray) else s.locks.iterator)
        locked = self.seq(s.locked, ctx)
        failed = self.seq(s.failed, ctx) if s.failed is not None else None

        def run_exclusive(fr):
            o = obj(fr)
            n = _int_arg(count(fr), "Exclusive element count")
            src = source(fr)
            claims = list(src) if not isinstance(src, list) else src
            if not 0 <= n <= len(claims):
                raise SimError(f"Exclusive count {n} exceeds the {len(claims)} available lock elements")
            claims = [_int_arg(c, "Exclusive lock element") for c in claims[:n]]
            return (yield from exclusive_protocol(fr, o, claims, locked, failed, active=True))
        return run_exclusive


def _iterable(v):
    if isinstance(v, (list, range)):
        return v
    raise SimTypeError(f"cannot iterate over {type_name(v)}")


def exclusive_protocol(fr: Frame, obj, claims, locked, failed, active: bool):
    """Three phases separated by global barriers. Priority is the global
    thread id; the lowest priority claiming a slot owns it."""
    m = fr.m
    prio = fr.th.tid
    slots = m.exclusive_slots(obj)
    # phase 1: race
    for c in claims:
        slots[c] = prio
        yield STEP
    yield from m.barrier(fr.th, "exclusive")
    # phase 2: losers try to win priority
    for c in claims:
        cur = slots.get(c, INF)
        if cur != prio:
            if prio < cur:
                slots[c] = prio
            yield STEP
    yield from m.barrier(fr.th, "exclusive")
    # phase 3: check, release own slots, run the chosen branch
    won = all(slots.get(c, INF) == prio for c in claims)
    for c in claims:
        if slots.get(c) == prio:
            del slots[c]
    sig = None
    if active:
        m.log_exclusive(fr, claims, won)
        branch = locked if won else failed
        if branch is not None:
            yield STEP
            sig = yield from branch(fr)
    yield from m.barrier(fr.th, "exclusive")
    return sig


_CASTS = {
    "int": int, "long": int, "unsigned": int, "int64_t": int, "uint64_t": int, "int32_t": int,
    "float": float, "double": float, "bool": bool,
}


class _Ctx:
    __slots__ = ("kernel", "kind", "uniform", "forall_depth")

    def __init__(self, kernel: str, kind, uniform: bool, forall_depth: int = 0):
        self.kernel = kernel
        self.kind = kind
        self.uniform = uniform
        self.forall_depth = forall_depth

    def nested(self) -> "_Ctx":
        return _Ctx(self.kernel, self.kind, self.uniform, self.forall_depth + 1)
