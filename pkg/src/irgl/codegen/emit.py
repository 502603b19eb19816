"""Lowering of a checked module to one CUDA C++ translation unit.

The output is plain text and fully deterministic: kernels appear in
module order, compiler temporaries are numbered per function, and no
dictionary or set order leaks into the result.

Layout of the generated file::

    banner, runtime (inline or #include)
    __managed__ globals
    per plain kernel: __device__ body, __global__ wrapper, launch helper
    outlined control kernels
    host functions (irgl_host_<name>)
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Optional

from irgl import ast
from irgl.codegen import types as T
from irgl.codegen.runtime import HEADER_NAME, RUNTIME_HEADER
from irgl.diagnostics import Diagnostic, warning
from irgl.opcode import Assign, ExprStmt, IncDec, LocalDecl, parse_operator
from irgl.planner import OUTLINE_FAILED, EmptyIntersection, FixedFromSM, LaunchPlan, OccupancyCapped, PlanConfig, \
    plan_module, t_control
from irgl.sema import Analysis, AnalysisOptions, KernelInfo, analyze, host_forall_demotion
from irgl.syntax import format_expr, quote_string

RED_NAMES = {None: "irgl_rt::RED_NONE", ast.Reduction.ANY: "irgl_rt::RED_ANY",
             ast.Reduction.ALL: "irgl_rt::RED_ALL"}
BARRIER_CALL = "irgl_rt::sync_running_threads(irgl_env.bar);"
OCCUPANCY_API = "cudaOccupancyMaxActiveBlocksPerMultiprocessor"


@dataclass(frozen=True)
class EmitOptions:
    outline: bool = False
    # kernel name -> mapping of its outermost ForAll
    mappings: dict[str, ast.Mapping] = field(default_factory=dict)
    runtime_inline: bool = True


@dataclass
class EmitContext:
    module: ast.Module
    infos: dict[str, KernelInfo]
    plans: dict[str, LaunchPlan]
    options: EmitOptions = field(default_factory=EmitOptions)
    plan_config: PlanConfig = field(default_factory=PlanConfig)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @classmethod
    def build(cls, module: ast.Module, options: Optional[EmitOptions] = None,
              plan_config: Optional[PlanConfig] = None,
              analysis_options: Optional[AnalysisOptions] = None) -> "EmitContext":
        """Analyze and plan ``module``; raises DiagnosticError on errors."""
        analysis: Analysis = analyze(module, analysis_options)
        analysis.raise_for_errors()
        plan_config = plan_config or PlanConfig()
        plans, diags = plan_module(analysis, plan_config)
        errors = [d for d in diags if d.severity == "error"]
        if errors:
            from irgl.diagnostics import DiagnosticError
            raise DiagnosticError(errors)
        return cls(host_forall_demotion(module), analysis.infos, plans, options or EmitOptions(),
                   plan_config, [d for d in analysis.diagnostics if d.severity != "error"] + diags)


# ---------------------------------------------------------------------------
# Output buffer
# ---------------------------------------------------------------------------


class _Out:
    def __init__(self):
        self.lines: list[str] = []
        self.depth = 0

    def __call__(self, text: str = "") -> None:
        self.lines.append(("  " * self.depth + text) if text else "")

    def open(self, text: str) -> None:
        self(text + " {")
        self.depth += 1

    def brace(self) -> None:
        self("{")
        self.depth += 1

    def close(self, text: str = "}") -> None:
        self.depth -= 1
        self(text)

    def text(self) -> str:
        return "\n".join(self.lines) + "\n"


@dataclass
class _Iter:
    """How to enumerate an IrGL iterator: ``count`` items, the i-th being
    ``elem(i)``. ``edge_graph`` is set when the items are edge ids."""

    count: str
    elem: Callable[[str], str]
    edge_graph: Optional[str] = None
    bounds: Optional[tuple[str, str]] = None  # contiguous [begin, end) when known


@dataclass
class _Fn:
    """Per-function emission state."""

    kernel: Optional[str]  # scope for name types; None = module level
    device: bool
    templated: bool = False
    control: bool = False  # statements of an outlined pipe
    counter: int = 0
    edge_vars: dict[str, str] = field(default_factory=dict)
    # innermost ForAll iteration end label, and the uniform-rounds state
    forall_labels: list[str] = field(default_factory=list)
    active: Optional[str] = None
    group_label: Optional[str] = None
    in_pipe: bool = False
    exclusive_tables: list[tuple[str, ast.Exclusive]] = field(default_factory=list)

    def fresh(self) -> int:
        self.counter += 1
        return self.counter


class Emitter:
    def __init__(self, ctx: EmitContext):
        self.ctx = ctx
        self.module = ctx.module
        self.types = T.infer(ctx.module)
        self.kernels = {k.name: k for k in ctx.module.kernels}
        self.device_kernels = {k.name for k in ctx.module.kernels if k.kind is ast.KernelKind.DEVICE}
        self.out = _Out()
        self.variants = self._variants()
        self.control_kernels: list[tuple[str, ast.Pipe, ast.Kernel, int]] = []

    # -- reductions ---------------------------------------------------------

    def _variants(self) -> dict[str, list[Optional[ast.Reduction]]]:
        """Reduction variants per templated kernel, in a fixed order."""
        used: dict[str, set] = {}
        for k in self.module.kernels:
            for s in ast.walk_stmts(k.body):
                if isinstance(s, ast.Invoke):
                    used.setdefault(s.kernel, set()).add(s.reduction)
                elif isinstance(s, ast.Iterate):
                    used.setdefault(s.kernel, set()).add(s.cond_kind.reduction if s.cond_kind else None)
        out = {}
        for name, info in self.ctx.infos.items():
            if info.kind is not ast.KernelKind.PLAIN:
                continue
            if not (info.uses_reduce or info.reductions_required):
                continue
            wanted = set(info.reductions_required) | used.get(name, set())
            out[name] = [r for r in (None, ast.Reduction.ANY, ast.Reduction.ALL) if r in wanted]
        return out

    def templated(self, kernel: str) -> bool:
        return kernel in self.variants

    # -- expressions --------------------------------------------------------

    def name(self, fn: _Fn, n: str) -> str:
        if n == "INF":
            return "IRGL_INF"
        return T.mangle(n)

    def ctype_of(self, fn: _Fn, n: str) -> Optional[str]:
        return self.types.ctype(fn.kernel, n)

    def graph_of(self, fn: _Fn) -> Optional[str]:
        """Graph used by free-standing graph builtins in this function."""
        if fn.kernel is not None:
            sc = self.types.scopes[fn.kernel]
            for p in sc.params:
                if sc.param_types.get(p) == T.GRAPH:
                    return T.mangle(p)
        g = self.types.default_graph
        return T.mangle(g) if g else None

    def edge_graph(self, fn: _Fn, base: ast.Expr) -> Optional[str]:
        if isinstance(base, ast.Name) and base.id in fn.edge_vars:
            return fn.edge_vars[base.id]
        return self.graph_of(fn)

    def expr(self, e: ast.Expr, fn: _Fn, hint: Optional[str] = None) -> str:
        if isinstance(e, ast.IntLit):
            return f"{e.value}LL" if abs(e.value) > 2**31 - 1 else str(e.value)
        if isinstance(e, ast.FloatLit):
            r = repr(float(e.value))
            return r if any(c in r for c in ".en") else r + ".0"
        if isinstance(e, ast.BoolLit):
            return "true" if e.value else "false"
        if isinstance(e, ast.StrLit):
            return quote_string(e.value)
        if isinstance(e, ast.Name):
            return self.name(fn, e.id)
        if isinstance(e, ast.Unary):
            return f"{e.op}{self._operand(e.operand, fn)}"
        if isinstance(e, ast.Binary):
            return f"{self._operand(e.left, fn)} {e.op} {self._operand(e.right, fn)}"
        if isinstance(e, ast.Index):
            return f"{self._operand(e.base, fn)}[{self.expr(e.index, fn)}]"
        if isinstance(e, ast.Field):
            return self._field(e, fn)
        if isinstance(e, ast.Call):
            return self._call(e, fn, hint)
        if isinstance(e, ast.MethodCall):
            return self._method(e, fn)
        raise TypeError(f"not an expression: {e!r}")

    def _operand(self, e: ast.Expr, fn: _Fn) -> str:
        s = self.expr(e, fn)
        return f"({s})" if isinstance(e, (ast.Binary, ast.Unary)) else s

    def _field(self, e: ast.Field, fn: _Fn) -> str:
        base = self._operand(e.base, fn)
        if e.name == "id":
            return base
        if isinstance(e.base, ast.Name) and self.ctype_of(fn, e.base.id) == T.GRAPH:
            return f"{base}.{e.name}"
        if e.name in T.EDGE_FIELDS:
            g = self.edge_graph(fn, e.base)
            if g is not None:
                macro = {"dst": "IRGL_EDGE_DST", "src": "IRGL_EDGE_SRC"}.get(e.name, "IRGL_EDGE_WT")
                return f"{macro}({g}, {self.expr(e.base, fn)})"
        # node property
        return f"{T.mangle(e.name)}[{self.expr(e.base, fn)}]"

    def _num_type(self, args, fn: _Fn) -> str:
        for a in args:
            if isinstance(a, ast.FloatLit) or isinstance(a, ast.Name) and self.ctype_of(fn, a.id) == T.F64:
                return T.F64
        return T.I64

    def _call(self, e: ast.Call, fn: _Fn, hint: Optional[str]) -> str:
        args = [self.expr(a, fn) for a in e.args]
        f = e.func
        if f in self.device_kernels:
            return f"irgl_{f}({', '.join(args + ['irgl_env'])})"
        if f == "array":
            elem = hint[len("irgl_rt::Array<"):-1] if hint and hint.startswith("irgl_rt::Array<") else \
                (T.F64 if len(e.args) > 1 and isinstance(e.args[1], ast.FloatLit) else T.I64)
            init = args[1] if len(args) > 1 else "0"
            return f"irgl_rt::array<{elem}>({args[0]}, {init})"
        if f == "iota":
            return f"irgl_rt::iota({args[0]})"
        if f in ("len", "append", "slice"):
            return f"irgl_rt::{f}({', '.join(args)})"
        if f in ("min", "max"):
            ty = self._num_type(e.args, fn)
            acc = args[0]
            for a in args[1:]:
                acc = f"irgl_rt::{f}<{ty}>({acc}, {a})"
            return acc
        if f == "abs":
            return f"irgl_rt::abs<{self._num_type(e.args, fn)}>({args[0]})"
        if f == "int":
            return f"((long long)({args[0]}))"
        if f == "float":
            return f"((double)({args[0]}))"
        if f == "range":
            lo, hi = (args[0], args[1]) if len(args) == 2 else ("0", args[0])
            return f"irgl_rt::range_array({lo}, {hi})"
        if f == "printf":
            return self._printf(e, fn)
        if f in T.GRAPH_METHODS:
            g = self.graph_of(fn) or "irgl_graph_unbound"
            return self._graph_method(g, f, args)
        return f"{T.mangle(f)}({', '.join(args)})"

    def _method(self, e: ast.MethodCall, fn: _Fn) -> str:
        return self._graph_method(self._operand(e.obj, fn), e.method, [self.expr(a, fn) for a in e.args])

    def _graph_method(self, g: str, m: str, args: list[str]) -> str:
        if m == "dst":
            return f"IRGL_EDGE_DST({g}, {args[0]})"
        if m == "src":
            return f"IRGL_EDGE_SRC({g}, {args[0]})"
        if m == "weight":
            return f"IRGL_EDGE_WT({g}, {args[0]})"
        if m == "degree":
            return f"(IRGL_EDGES_END({g}, {args[0]}) - IRGL_EDGES_BEGIN({g}, {args[0]}))"
        if m == "neighbors":
            return f"irgl_rt::neighbors({g}, {args[0]})"
        if m == "nodes":
            return f"irgl_rt::range_array(0, {g}.nnodes)"
        # edges(n) as a value: the contiguous CSR range
        return f"irgl_rt::range_array(IRGL_EDGES_BEGIN({g}, {args[0]}), IRGL_EDGES_END({g}, {args[0]}))"

    _SPEC = re.compile(r"%[-+ #0]*\d*(?:\.\d+)?(?:ll|l|h)?([diouxXfFeEgGcs%])")

    def _printf(self, e: ast.Call, fn: _Fn) -> str:
        """printf with integer conversions widened to match 64-bit values."""
        if not e.args or not isinstance(e.args[0], ast.StrLit):
            return f"printf({', '.join(self.expr(a, fn) for a in e.args)})"
        fmt = e.args[0].value
        rest = list(e.args[1:])
        out_args: list[str] = []
        pieces: list[str] = []
        pos = 0
        for m in self._SPEC.finditer(fmt):
            pieces.append(fmt[pos:m.start()])
            pos = m.end()
            conv = m.group(1)
            spec = m.group(0)
            if conv == "%":
                pieces.append(spec)
                continue
            arg = self.expr(rest.pop(0), fn) if rest else "0"
            flags = re.sub(r"(ll|l|h)?[a-zA-Z]$", "", spec)
            if conv in "di":
                pieces.append(flags + "lld")
                out_args.append(f"(long long)({arg})")
            elif conv in "ouxX":
                pieces.append(flags + "ll" + conv)
                out_args.append(f"(unsigned long long)({arg})")
            elif conv in "fFeEgG":
                pieces.append(flags + conv)
                out_args.append(f"(double)({arg})")
            else:
                pieces.append(spec)
                out_args.append(arg)
        pieces.append(fmt[pos:])
        out_args.extend(self.expr(a, fn) for a in rest)
        return f"printf({', '.join([quote_string(''.join(pieces))] + out_args)})"

    # -- iterators ----------------------------------------------------------

    def iterator(self, it: ast.Expr, fn: _Fn) -> _Iter:
        if isinstance(it, ast.Name) and it.id in T.WORKLIST_NAMES:
            return _Iter("irgl_rt::size(irgl_env.wl.in)", lambda i: i, bounds=("0", "irgl_rt::size(irgl_env.wl.in)"))
        if isinstance(it, ast.Call) and it.func == "range":
            args = [self.expr(a, fn) for a in it.args]
            if len(args) == 1:
                return _Iter(args[0], lambda i: i, bounds=("0", args[0]))
            lo, hi = args[0], args[1]
            return _Iter(f"({hi}) - ({lo})", lambda i: f"({lo}) + {i}", bounds=(lo, hi))
        graph, method, args = None, None, []
        if isinstance(it, ast.MethodCall) and it.method in ("nodes", "edges", "neighbors"):
            graph, method = self._operand(it.obj, fn), it.method
            args = [self.expr(a, fn) for a in it.args]
        elif isinstance(it, ast.Call) and it.func in ("edges", "neighbors"):
            graph, method = self.graph_of(fn) or "irgl_graph_unbound", it.func
            args = [self.expr(a, fn) for a in it.args]
        if method == "nodes":
            return _Iter(f"{graph}.nnodes", lambda i: i, bounds=("0", f"{graph}.nnodes"))
        if method in ("edges", "neighbors"):
            begin = f"IRGL_EDGES_BEGIN({graph}, {args[0]})"
            end = f"IRGL_EDGES_END({graph}, {args[0]})"
            if method == "edges":
                return _Iter(f"{end} - {begin}", lambda i: f"{begin} + {i}", edge_graph=graph, bounds=(begin, end))
            return _Iter(f"{end} - {begin}", lambda i: f"IRGL_EDGE_DST({graph}, {begin} + {i})")
        value = self.expr(it, fn)
        return _Iter(f"irgl_rt::len({value})", lambda i: f"{value}[{i}]")

    # -- statements ---------------------------------------------------------

    def body(self, stmts, fn: _Fn) -> None:
        for s in stmts:
            self.stmt(s, fn)

    def block(self, header: str, stmts, fn: _Fn) -> None:
        self.out.open(header)
        self.body(stmts, fn)
        self.out.close()

    def stmt(self, s: ast.Stmt, fn: _Fn) -> None:
        o = self.out
        if isinstance(s, ast.CBlock):
            if fn.control:
                self._control_serial(lambda: self.cblock(s, fn), fn)
            else:
                self.cblock(s, fn)
        elif isinstance(s, ast.If):
            o.open(f"if ({self.expr(s.cond, fn)})")
            self.body(s.then, fn)
            if s.orelse:
                o.close("} else {")
                o.depth += 1
                self.body(s.orelse, fn)
            o.close()
        elif isinstance(s, ast.While):
            self.block(f"while ({self.expr(s.cond, fn)})", s.body, fn)
        elif isinstance(s, ast.For):
            self.seq_loop(s.var, s.iterator, s.body, fn, False)
        elif isinstance(s, ast.ForAll):
            if fn.device and not fn.forall_labels and fn.kernel is not None and \
                    self.kernels[fn.kernel].kind is ast.KernelKind.PLAIN:
                self.lower_forall(s, fn)
            else:
                self.seq_loop(s.var, s.iterator, s.body, fn, True)
        elif isinstance(s, ast.Atomic):
            self.lower_atomic(s, fn)
        elif isinstance(s, ast.Exclusive):
            self.lower_exclusive(s, fn)
        elif isinstance(s, ast.SyncRunningThreads):
            o(BARRIER_CALL)
        elif isinstance(s, ast.Retry):
            o(f"irgl_rt::push(irgl_env.wl.retry, {self.expr(s.item, fn)});  // Retry")
        elif isinstance(s, ast.Respawn):
            o(f"irgl_rt::push(irgl_env.wl.retry, {self.expr(s.item, fn)});  // Respawn")
        elif isinstance(s, ast.ReduceAndReturn):
            self.lower_reduce_and_return(s, fn)
        elif isinstance(s, ast.WlPop):
            o(f"{self.name(fn, s.var)} = irgl_rt::pop(irgl_env.wl.in, {self.expr(s.index, fn)});")
        elif isinstance(s, ast.WlPush):
            o(f"irgl_rt::push(irgl_env.wl.out, {self.expr(s.value, fn)});")
        elif isinstance(s, (ast.Invoke, ast.Iterate, ast.Pipe)):
            self.lower_orchestration(s, fn)
        else:
            raise TypeError(f"unknown statement {s!r}")

    def cblock(self, s: ast.CBlock, fn: _Fn) -> None:
        for op in parse_operator(s.code):
            self.out(self.op(op, fn))

    def op(self, op, fn: _Fn) -> str:
        if isinstance(op, Assign):
            hint = None
            if isinstance(op.target, ast.Name):
                hint = self.ctype_of(fn, op.target.id)
            return f"{self.expr(op.target, fn)} {op.op} {self.expr(op.value, fn, hint)};"
        if isinstance(op, IncDec):
            return f"{self.expr(op.target, fn)}{op.op};"
        if isinstance(op, LocalDecl):
            init = "" if op.init is None else f" = {self.expr(op.init, fn)}"
            return f"{op.ctype} {T.mangle(op.name)}{init};"
        if isinstance(op, ExprStmt):
            return f"{self.expr(op.expr, fn)};"
        raise TypeError(op)

    def seq_loop(self, var: str, iterator: ast.Expr, body, fn: _Fn, is_forall: bool) -> None:
        """Sequential loop: For anywhere, ForAll below the outermost one."""
        it = self.iterator(iterator, fn)
        v = self.name(fn, var)
        k = fn.fresh()
        label = f"irgl_next_{k}"
        saved = fn.edge_vars.get(var)
        if it.edge_graph:
            fn.edge_vars[var] = it.edge_graph
        else:
            fn.edge_vars.pop(var, None)
        if it.bounds is not None:
            lo, hi = it.bounds
            self.out.open(f"for (irgl_rt::index_t {v} = {lo}; {v} < {hi}; {v}++)")
        else:
            i = f"irgl_i_{k}"
            self.out.open(f"for (irgl_rt::index_t {i} = 0; {i} < {it.count}; {i}++)")
            self.out(f"const irgl_rt::index_t {v} = {it.elem(i)};")
        if is_forall:
            fn.forall_labels.append(label)
            self._labelled_body(body, label, fn)
            fn.forall_labels.pop()
        else:
            self.body(body, fn)
        self.out.close()
        if saved is not None:
            fn.edge_vars[var] = saved
        else:
            fn.edge_vars.pop(var, None)

    def _labelled_body(self, body, label: str, fn: _Fn) -> None:
        """``body`` followed by its iteration-end label when something can
        jump there; the extra scope keeps the jump from crossing locals."""
        if not _uses_label(body):
            self.body(body, fn)
            return
        self.out.brace()
        self.body(body, fn)
        self.out.close()
        self.out(f"{label}: ;")

    # -- ForAll ---------------------------------------------------------------

    def lower_forall(self, s: ast.ForAll, fn: _Fn) -> None:
        """Outermost ForAll of a plain kernel: iterations spread over threads."""
        o = self.out
        mapping = self.ctx.options.mappings.get(fn.kernel, s.mapping)
        info = self.ctx.infos[fn.kernel]
        it = self.iterator(s.iterator, fn)
        k = fn.fresh()
        n, i, label = f"irgl_n_{k}", f"irgl_i_{k}", f"irgl_next_{k}"
        v = self.name(fn, s.var)
        if it.edge_graph:
            fn.edge_vars[s.var] = it.edge_graph
        kind = "blocked" if mapping is ast.Mapping.BLOCKED else "consecutive"
        o(f"// ForAll {s.var}: {kind} mapping" + (", uniform rounds" if info.uses_barrier else ""))
        o.brace()
        o(f"const irgl_rt::index_t {n} = {it.count};")
        if info.uses_barrier:
            self._uniform_rounds(s, fn, it, k, mapping, v)
        else:
            if mapping is ast.Mapping.BLOCKED:
                chunk, lo, hi = f"irgl_chunk_{k}", f"irgl_lo_{k}", f"irgl_hi_{k}"
                o(f"const irgl_rt::index_t {chunk} = ({n} + irgl_rt::nthreads() - 1) / irgl_rt::nthreads();")
                o(f"const irgl_rt::index_t {lo} = irgl_rt::global_tid() * {chunk};")
                o(f"const irgl_rt::index_t {hi} = irgl_rt::min<irgl_rt::index_t>({lo} + {chunk}, {n});")
                o.open(f"for (irgl_rt::index_t {i} = {lo}; {i} < {hi}; {i}++)")
            else:
                o.open(f"for (irgl_rt::index_t {i} = irgl_rt::global_tid(); {i} < {n}; "
                       f"{i} += irgl_rt::nthreads())")
            o(f"const irgl_rt::index_t {v} = {it.elem(i)};")
            fn.forall_labels.append(label)
            self._labelled_body(s.body, label, fn)
            fn.forall_labels.pop()
            o.close()
        o.close()
        fn.edge_vars.pop(s.var, None)

    def _uniform_rounds(self, s: ast.ForAll, fn: _Fn, it: _Iter, k: int, mapping, v: str) -> None:
        """Every thread runs the same number of rounds so barriers inside the
        body are reached uniformly; out-of-range rounds only take part in
        the barriers (and in Exclusive with no claims)."""
        o = self.out
        n, i, r, rounds, act = f"irgl_n_{k}", f"irgl_i_{k}", f"irgl_r_{k}", f"irgl_rounds_{k}", f"irgl_active_{k}"
        o(f"const irgl_rt::index_t {rounds} = ({n} + irgl_rt::nthreads() - 1) / irgl_rt::nthreads();")
        o.open(f"for (irgl_rt::index_t {r} = 0; {r} < {rounds}; {r}++)")
        if mapping is ast.Mapping.BLOCKED:
            o(f"const irgl_rt::index_t {i} = irgl_rt::global_tid() * {rounds} + {r};")
        else:
            o(f"const irgl_rt::index_t {i} = irgl_rt::global_tid() + {r} * irgl_rt::nthreads();")
        o(f"bool {act} = {i} < {n};")
        o(f"const irgl_rt::index_t {v} = {act} ? {it.elem(i)} : 0;")
        saved = (fn.active, fn.group_label)
        fn.active = act
        fn.forall_labels.append(f"irgl_next_{k}")
        group: list[ast.Stmt] = []
        g = 0

        def flush():
            nonlocal g
            if not group:
                return
            g += 1
            label = f"irgl_group_{k}_{g}"
            fn.group_label = label
            o.open(f"if ({act})")
            self._labelled_body(tuple(group), label, fn)
            o.close()
            group.clear()

        for st in s.body:
            if isinstance(st, (ast.SyncRunningThreads, ast.Exclusive)):
                flush()
                fn.group_label = None
                self.stmt(st, fn)
            else:
                group.append(st)
        flush()
        fn.forall_labels.pop()
        fn.active, fn.group_label = saved
        o.close()

    # -- Atomic ---------------------------------------------------------------

    def lower_atomic(self, s: ast.Atomic, fn: _Fn) -> None:
        o = self.out
        lock = f"&({self.expr(s.lock, fn)})"
        k = fn.fresh()
        if s.failed is None:
            done = f"irgl_done_{k}"
            o(f"// Atomic({format_expr(s.lock)}): divergence-safe acquire loop")
            o.brace()
            o(f"bool {done} = false;")
            o.open(f"while (!{done})")
            o.open(f"if (atomicCAS({lock}, 0, 1) == 0)")
            o("__threadfence();")
            self._scoped(s.locked, fn)
            o("__threadfence();")
            o(f"irgl_rt::lock_release({lock});")
            o(f"{done} = true;")
            o.close()
            o.close()
            o.close()
        else:
            o(f"// Atomic({format_expr(s.lock)}) with Else: single attempt")
            o.open(f"if (atomicCAS({lock}, 0, 1) == 0)")
            o("__threadfence();")
            self._scoped(s.locked, fn)
            o("__threadfence();")
            o(f"irgl_rt::lock_release({lock});")
            o.close("} else {")
            o.depth += 1
            self.body(s.failed, fn)
            o.close()

    def _scoped(self, stmts, fn: _Fn) -> None:
        self.out.brace()
        self.body(stmts, fn)
        self.out.close()

    # -- Exclusive ------------------------------------------------------------

    def lower_exclusive(self, s: ast.Exclusive, fn: _Fn) -> None:
        o = self.out
        k = fn.fresh()
        table = f"irgl_xlocks_{fn.kernel}_{len(fn.exclusive_tables)}"
        fn.exclusive_tables.append((table, s))
        prio, cnt, idx, won = f"irgl_prio_{k}", f"irgl_nclaims_{k}", f"irgl_k_{k}", f"irgl_won_{k}"
        if isinstance(s.locks, ast.LockArray):
            arr = self._operand(s.locks.array, fn)
            elem = lambda i: f"{arr}[{i}]"  # noqa: E731
        else:
            elem = self.iterator(s.locks.iterator, fn).elem
        active = fn.active or "true"
        count = self.expr(s.count, fn)
        slot = f"{table}.slots[{elem(idx)}]"
        loop = f"for (irgl_rt::index_t {idx} = 0; {idx} < {cnt}; {idx}++)"
        o(f"// Exclusive({format_expr(s.object)}): race, priority check, check")
        o.brace()
        o(f"const int {prio} = (int)irgl_rt::global_tid();")
        o(f"const irgl_rt::index_t {cnt} = {active} ? (irgl_rt::index_t)({count}) : 0;")
        o("// phase 1: race for every slot")
        o(f"{loop} {slot} = {prio};")
        o(BARRIER_CALL)
        o("// phase 2: losers try to win priority over the claim (lower wins)")
        o.open(loop)
        o(f"if ({slot} > {prio}) atomicMin(&{slot}, {prio});")
        o.close()
        o(BARRIER_CALL)
        o("// phase 3: a thread holding every claim wins; free own slots")
        o(f"bool {won} = true;")
        o(f"{loop} if ({slot} != {prio}) {won} = false;")
        o(f"{loop} if ({slot} == {prio}) {slot} = IRGL_FREE_SLOT;")
        o.open(f"if ({active})")
        o.open(f"if ({won})")
        self.body(s.locked, fn)
        if s.failed is not None:
            o.close("} else {")
            o.depth += 1
            self.body(s.failed, fn)
        o.close()
        o.close()
        o(BARRIER_CALL)
        o.close()

    # -- ReduceAndReturn ------------------------------------------------------

    def lower_reduce_and_return(self, s: ast.ReduceAndReturn, fn: _Fn) -> None:
        o = self.out
        value = self.expr(s.value, fn)
        acc = "irgl_acc = irgl_rt::reduce<IRGL_RED>(irgl_acc, " + value + ");" if fn.templated else \
            f"(void)({value});"
        o.brace()
        o(acc)
        if fn.forall_labels:
            if fn.active is not None and fn.group_label is not None and \
                    fn.forall_labels[-1].startswith("irgl_next_") and self._in_uniform_group(fn):
                o(f"{fn.active} = false;  // ends this iteration")
                o(f"goto {fn.group_label};")
            else:
                o(f"goto {fn.forall_labels[-1]};  // ends this iteration")
        else:
            o("return;  // ends this thread's kernel")
        o.close()

    def _in_uniform_group(self, fn: _Fn) -> bool:
        # The innermost ForAll is the uniform outermost one when only its
        # label is on the stack.
        return len(fn.forall_labels) == 1

    # -- orchestration ---------------------------------------------------------

    def env(self, fn: _Fn, ret: Optional[str]) -> str:
        return f"irgl_rt::make_env({'&irgl_pipe' if fn.in_pipe else '0'}, irgl_rt::barrier(), {ret or '0'})"

    def launch_call(self, kernel: str, reduction, args: list[str], env: str) -> str:
        tmpl = f"<{RED_NAMES[reduction]}>" if self.templated(kernel) else ""
        return f"irgl_launch_{kernel}{tmpl}({', '.join(args + [env])});"

    def lower_orchestration(self, s: ast.Stmt, fn: _Fn) -> None:
        if fn.control:
            self._control_orchestration(s, fn)
            return
        o = self.out
        if isinstance(s, ast.Invoke):
            o(f"// Invoke {s.kernel}")
            o.brace()
            self._invoke(s.kernel, s.args, s.reduction, s.result, fn)
            o.close()
        elif isinstance(s, ast.Iterate):
            self._iterate(s, fn)
        elif isinstance(s, ast.Pipe):
            self._pipe(s, fn)

    def _invoke(self, kernel: str, args, reduction, result: Optional[str], fn: _Fn,
                result_var: Optional[str] = None) -> None:
        o = self.out
        info = self.ctx.infos[kernel]
        argv = [self.expr(a, fn) for a in args]
        ret = None
        if reduction is not None:
            ret = "irgl_ret"
            o(f"int *{ret} = irgl_rt::ret_alloc();")
            o(f"*{ret} = {1 if reduction is ast.Reduction.ALL else 0};  // identity of {reduction.value}")
        env = self.env(fn, ret)
        o(self.launch_call(kernel, reduction, argv, env))
        if info.uses_retry:
            o.open("while (irgl_rt::size(irgl_pipe.retry) > 0)")
            o("irgl_rt::swap_in_retry(irgl_pipe);  // out is left as is")
            o("irgl_rt::reset(irgl_pipe.retry);")
            o(self.launch_call(kernel, reduction, argv, env))
            o.close()
        if info.uses_worklist:
            o("irgl_rt::swap_in_out(irgl_pipe);")
            o("irgl_rt::reset(irgl_pipe.out);")
        if ret is not None:
            if result is not None:
                o(f"{self.name(fn, result)} = *{ret} != 0;")
            if result_var is not None:
                o(f"{result_var} = *{ret} != 0;")
            o(f"IRGL_CHECK(cudaFree({ret}));")

    def _open_pipe(self, init: Optional[ast.WorklistInit], fn: _Fn) -> bool:
        if fn.in_pipe:
            return False
        o = self.out
        size = "IRGL_DEFAULT_WL_SIZE" if init is None or init.size is None else \
            f"(int)({self.expr(init.size, fn)})"
        o(f"irgl_rt::PipeContext irgl_pipe = irgl_rt::pipe_alloc({size});")
        if init is not None:
            src = init.source
            if isinstance(src, ast.Scalars):
                for item in src.items:
                    o(f"irgl_rt::pipe_init_item(irgl_pipe, {self.expr(item, fn)});")
            else:
                o(f"irgl_rt::pipe_init_array(irgl_pipe, {self.expr(src.array, fn)}, "
                  f"{self.expr(src.length, fn)});")
        fn.in_pipe = True
        return True

    def _close_pipe(self, opened: bool, fn: _Fn) -> None:
        if opened:
            self.out("irgl_rt::pipe_free(irgl_pipe);")
            fn.in_pipe = False

    def _iterate(self, s: ast.Iterate, fn: _Fn) -> None:
        o = self.out
        info = self.ctx.infos[s.kernel]
        mode = f" {s.cond_kind.mode.value} {s.cond_kind.reduction.value}" if s.cond_kind else ""
        o(f"// Iterate{mode} {s.kernel}")
        o.brace()
        opened = self._open_pipe(s.initial, fn) if (s.initial is not None or info.uses_worklist) else False
        reduction = s.cond_kind.reduction if s.cond_kind else None
        if reduction is not None:
            o("bool irgl_result = false;")
        o.open("while (true)")
        exit_cond = self._exit_cond(s, info, fn)
        if exit_cond:
            o(f"if ({exit_cond}) break;")
        o.brace()
        self._invoke(s.kernel, s.args, reduction, None, fn, "irgl_result" if reduction else None)
        o.close()
        self.body(s.between_rounds, fn)
        if s.cond_kind is not None:
            if s.cond_kind.mode is ast.LoopMode.WHILE:
                o("if (!irgl_result) break;")
            else:
                o("if (irgl_result) break;")
        o.close()
        self._close_pipe(opened, fn)
        o.close()

    def _exit_cond(self, s: ast.Iterate, info: KernelInfo, fn: _Fn, in_expr: str = "irgl_pipe.in") -> str:
        empty = f"irgl_rt::size({in_expr}) == 0" if info.uses_worklist else None
        if s.extra_cond is None:
            return empty or ""
        extra = self.expr(s.extra_cond.expr, fn)
        if empty is None:
            return "" if s.extra_cond.combiner is ast.Combiner.AND else extra
        op = "&&" if s.extra_cond.combiner is ast.Combiner.AND else "||"
        return f"({empty}) {op} ({extra})"

    def _pipe(self, s: ast.Pipe, fn: _Fn) -> None:
        o = self.out
        if not fn.in_pipe and self.ctx.options.outline and self._outline(s, fn):
            return
        o(f"// Pipe{' Once' if s.once else ''}")
        o.brace()
        opened = self._open_pipe(s.wlinit, fn)
        if s.once:
            self.body(s.body, fn)
        else:
            self.block("while (irgl_rt::size(irgl_pipe.in) > 0)", s.body, fn)
        self._close_pipe(opened, fn)
        o.close()

    # -- outlining -----------------------------------------------------------

    def pipe_members(self, s: ast.Pipe) -> list[str]:
        out: list[str] = []
        for st in ast.walk_stmts(s.body):
            if isinstance(st, (ast.Invoke, ast.Iterate)) and st.kernel not in out:
                out.append(st.kernel)
        return out

    def _outline(self, s: ast.Pipe, fn: _Fn) -> bool:
        members = self.pipe_members(s)
        where = f" at {s.span.line}:{s.span.column}" if s.span is not None else ""
        if not members:
            return False
        bs = t_control(self.ctx.infos[m].block_constraint for m in members)
        if bs is EmptyIntersection:
            constraints = ", ".join(f"{m} {self.ctx.infos[m].block_constraint}" for m in members)
            self.ctx.diagnostics.append(warning(
                "outline-empty-intersection",
                f"{OUTLINE_FAILED} for Pipe{where} (kernels {constraints}); using host orchestration",
                s.span))
            return False
        host = self.kernels[fn.kernel]
        idx = len(self.control_kernels)
        name = f"control_{host.name}_{idx}"
        self.control_kernels.append((name, s, host, bs))
        for m in members:
            plan = self.ctx.plans.get(m)
            if plan is not None:
                self.ctx.plans[m] = LaunchPlan(m, OccupancyCapped(), bs, outlined=True)
        o = self.out
        o(f"// Pipe{' Once' if s.once else ''}: outlined into irgl_{name} (block size {bs})")
        o.brace()
        self._open_pipe(s.wlinit, fn)
        for st in ast.walk_stmts(s.body):
            if isinstance(st, (ast.Invoke, ast.Iterate)) and self._exclusive_count(st.kernel):
                o(f"irgl_prepare_{st.kernel}({', '.join(self.expr(a, fn) for a in st.args)});")
        o("int *irgl_ret = irgl_rt::ret_alloc();")
        params = [self.name(fn, p.name) for p in host.params]
        o(f"irgl_launch_{name}({', '.join(params + [self.env(fn, 'irgl_ret')])});")
        o("IRGL_CHECK(cudaFree(irgl_ret));")
        self._close_pipe(True, fn)
        o.close()
        return True

    def _control_serial(self, emit: Callable[[], None], fn: _Fn) -> None:
        """Host statements inside a control kernel run on one thread."""
        o = self.out
        o.open("if (irgl_rt::global_tid() == 0)")
        emit()
        o.close()
        o(BARRIER_CALL)

    def _body_call(self, kernel: str, args: list[str], red: Optional[ast.Reduction]) -> str:
        if self.templated(kernel):
            return f"irgl_{kernel}_body<{RED_NAMES[red]}>({', '.join(args + ['irgl_env', 'irgl_acc'])});"
        return f"irgl_{kernel}_body({', '.join(args + ['irgl_env'])});"

    def _control_invoke(self, kernel: str, args, red, result: Optional[str], fn: _Fn,
                        result_var: Optional[str] = None) -> None:
        o = self.out
        info = self.ctx.infos[kernel]
        argv = [self.expr(a, fn) for a in args]
        o(f"// Invoke {kernel} (device variant)")
        o.brace()
        if self.templated(kernel):
            o(f"bool irgl_acc = irgl_rt::identity<{RED_NAMES[red]}>();")
        o(self._body_call(kernel, argv, red))
        o(BARRIER_CALL)
        if info.uses_retry:
            o.open("while (irgl_rt::size(irgl_env.wl.retry) > 0)")
            o("irgl_rt::swap_in_retry(irgl_env.wl);")
            o(BARRIER_CALL)
            o("if (irgl_rt::global_tid() == 0) irgl_rt::reset(irgl_env.wl.retry);")
            o(BARRIER_CALL)
            o(self._body_call(kernel, argv, red))
            o(BARRIER_CALL)
            o.close()
        if info.uses_worklist:
            o("irgl_rt::swap_in_out(irgl_env.wl);")
            o(BARRIER_CALL)
            o("if (irgl_rt::global_tid() == 0) irgl_rt::reset(irgl_env.wl.out);")
            o(BARRIER_CALL)
        if red is not None and (result or result_var):
            o(f"const bool irgl_reduced = irgl_rt::grid_reduce<{RED_NAMES[red]}>(irgl_env.ret, irgl_acc, "
              f"irgl_env.bar);")
            if result_var:
                o(f"{result_var} = irgl_reduced;")
            if result:
                self._control_serial(lambda: o(f"{self.name(fn, result)} = irgl_reduced;"), fn)
        o.close()

    def _control_orchestration(self, s: ast.Stmt, fn: _Fn) -> None:
        o = self.out
        if isinstance(s, ast.Invoke):
            self._control_invoke(s.kernel, s.args, s.reduction, s.result, fn)
        elif isinstance(s, ast.Iterate):
            info = self.ctx.infos[s.kernel]
            red = s.cond_kind.reduction if s.cond_kind else None
            o(f"// Iterate {s.kernel}")
            o.brace()
            if red is not None:
                o("bool irgl_result = false;")
            o.open("while (true)")
            exit_cond = self._exit_cond(s, info, fn, "irgl_env.wl.in")
            if exit_cond:
                o(f"if ({exit_cond}) break;")
            self._control_invoke(s.kernel, s.args, red, None, fn, "irgl_result" if red else None)
            self.body(s.between_rounds, fn)
            if s.cond_kind is not None:
                o("if (!irgl_result) break;" if s.cond_kind.mode is ast.LoopMode.WHILE else
                  "if (irgl_result) break;")
            o.close()
            o.close()
        elif isinstance(s, ast.Pipe):
            if s.once:
                self._scoped(s.body, fn)
            else:
                self.block("while (irgl_rt::size(irgl_env.wl.in) > 0)", s.body, fn)

    def control_kernel(self, name: str, s: ast.Pipe, host: ast.Kernel, bs: int) -> None:
        o = self.out
        sc = self.types.scopes[host.name]
        params = [f"{sc.param_types[p.name]} {T.mangle(p.name)}" for p in host.params]
        fn = _Fn(host.name, device=True, control=True, in_pipe=True)
        o("// Control kernel: the pipe loop runs on the device; member kernels")
        o("// are called through their __device__ bodies.")
        o(f"__launch_bounds__({bs})")
        o.open(f"__global__ void irgl_{name}({', '.join(params + ['irgl_rt::KernelEnv irgl_env'])})")
        if s.once:
            self.body(s.body, fn)
        else:
            self.block("while (irgl_rt::size(irgl_env.wl.in) > 0)", s.body, fn)
        o.close()
        o()
        o.open(f"static void irgl_launch_{name}({', '.join(params + ['irgl_rt::KernelEnv irgl_env'])})")
        o(f"const int irgl_block = {bs};")
        self._occupancy_grid(f"irgl_{name}")
        args = [T.mangle(p.name) for p in host.params] + ["irgl_env"]
        o(f"irgl_{name}<<<irgl_grid, irgl_block>>>({', '.join(args)});")
        o("IRGL_CHECK(cudaGetLastError());")
        o("IRGL_CHECK(cudaDeviceSynchronize());")
        o.close()
        o()

    # -- kernels ---------------------------------------------------------------

    def _occupancy_grid(self, kernel_ref: str) -> None:
        o = self.out
        o("int irgl_blocks_per_sm = 0;")
        o(f"IRGL_CHECK({OCCUPANCY_API}(&irgl_blocks_per_sm, {kernel_ref}, irgl_block, 0));")
        o("const int irgl_grid = irgl_blocks_per_sm * irgl_rt::sm_count();")

    def _exclusive_count(self, kernel: str) -> int:
        k = self.kernels.get(kernel)
        return 0 if k is None else sum(isinstance(s, ast.Exclusive) for s in ast.walk_stmts(k.body))

    def _params(self, k: ast.Kernel) -> list[str]:
        sc = self.types.scopes[k.name]
        return [f"{sc.param_types[p.name]} {T.mangle(p.name)}" for p in k.params]

    def _declare_locals(self, k: ast.Kernel) -> None:
        sc = self.types.scopes[k.name]
        for n, ty in sc.locals.items():
            self.out(f"{ty} {T.mangle(n)};")

    def device_kernel(self, k: ast.Kernel) -> None:
        o = self.out
        fn = _Fn(k.name, device=True)
        o(f"// Device kernel {k.name}")
        o.open(f"__device__ void irgl_{k.name}({', '.join(self._params(k) + ['irgl_rt::KernelEnv &irgl_env'])})")
        self._declare_locals(k)
        self.body(k.body, fn)
        o.close()
        o()

    def plain_kernel(self, k: ast.Kernel) -> None:
        o = self.out
        info = self.ctx.infos[k.name]
        plan = self.ctx.plans[k.name]
        templated = self.templated(k.name)
        params = self._params(k)
        pnames = [T.mangle(p.name) for p in k.params]
        tmpl = "template <int IRGL_RED>"
        fn = _Fn(k.name, device=True, templated=templated)

        # Body first into a scratch buffer: it determines the Exclusive tables.
        saved = self.out
        self.out = _Out()
        self.out.depth = 1
        self._declare_locals(k)
        self.body(k.body, fn)
        body_lines = self.out.lines
        self.out = o = saved

        o(f"// Kernel {k.name}: {info.block_constraint}, block {plan.block_size}, {plan.grid_size_policy}")
        for table, _ in fn.exclusive_tables:
            o(f"__managed__ irgl_rt::ExclusiveLocks {table};")
        if templated:
            o(tmpl)
        extra = ["irgl_rt::KernelEnv &irgl_env"] + (["bool &irgl_acc"] if templated else [])
        o.open(f"__device__ void irgl_{k.name}_body({', '.join(params + extra)})")
        o.lines.extend(body_lines)
        o.close()
        o()
        lb = k.launch_bounds
        bounds = f"{plan.block_size}" if lb is None or lb.min_blocks is None else \
            f"{plan.block_size}, {lb.min_blocks}"
        if templated:
            o(tmpl)
        o(f"__launch_bounds__({bounds})")
        o.open(f"__global__ void irgl_{k.name}({', '.join(params + ['irgl_rt::KernelEnv irgl_env'])})")
        if templated:
            o("bool irgl_acc = irgl_rt::identity<IRGL_RED>();")
            o(f"irgl_{k.name}_body<IRGL_RED>({', '.join(pnames + ['irgl_env', 'irgl_acc'])});")
            o("irgl_rt::block_combine<IRGL_RED>(irgl_env.ret, irgl_acc);")
        else:
            o(f"irgl_{k.name}_body({', '.join(pnames + ['irgl_env'])});")
        o.close()
        if templated:
            ptypes = [self.types.scopes[k.name].param_types[p.name] for p in k.params]
            for red in self.variants[k.name]:
                o(f"template __global__ void irgl_{k.name}<{RED_NAMES[red]}>"
                  f"({', '.join(ptypes + ['irgl_rt::KernelEnv'])});")
        o()
        if fn.exclusive_tables:
            o.open(f"static void irgl_prepare_{k.name}({', '.join(params)})")
            for table, s in fn.exclusive_tables:
                obj = self.expr(s.object, _Fn(k.name, device=False))
                o(f"if (!{table}.slots) {table} = irgl_rt::exclusive_alloc(irgl_rt::lock_domain({obj}));")
            o.close()
            o()
        if templated:
            o(tmpl)
        o.open(f"static void irgl_launch_{k.name}({', '.join(params + ['irgl_rt::KernelEnv irgl_env'])})")
        o(f"const int irgl_block = {plan.block_size};")
        ref = f"irgl_{k.name}<IRGL_RED>" if templated else f"irgl_{k.name}"
        if info.uses_barrier:
            self._occupancy_grid(ref)
        else:
            mult = plan.grid_size_policy.multiplier if isinstance(plan.grid_size_policy, FixedFromSM) else \
                self.ctx.plan_config.blocks_per_sm
            o(f"const int irgl_grid = irgl_rt::sm_count() * {mult};")
        if fn.exclusive_tables:
            o(f"irgl_prepare_{k.name}({', '.join(pnames)});")
        o(f"{ref}<<<irgl_grid, irgl_block>>>({', '.join(pnames + ['irgl_env'])});")
        o("IRGL_CHECK(cudaGetLastError());")
        o("IRGL_CHECK(cudaDeviceSynchronize());")
        o.close()
        o()

    def host_kernel(self, k: ast.Kernel) -> None:
        o = self.out
        fn = _Fn(k.name, device=False)
        o.open(f"void irgl_host_{k.name}({', '.join(self._params(k))})")
        if self.module.decls and k.name == "main":
            o("irgl_init_globals();")
        self.body(k.body, fn)
        o.close()
        o()

    # -- module ----------------------------------------------------------------

    def globals(self) -> None:
        o = self.out
        g = self.types.globals
        if not g:
            return
        o("// Program globals, visible to host and device code.")
        if self.types.external:
            o(f"// Bound by the driver before irgl_host_main(): {', '.join(self.types.external)}.")
        decl_inits = {d.name: d.init for d in self.module.decls}
        for n, ty in g.items():
            init = decl_inits.get(n)
            if init is not None and isinstance(init, (ast.IntLit, ast.FloatLit, ast.BoolLit)) \
                    and not T.is_array(ty) and ty != T.GRAPH:
                o(f"__managed__ {ty} {T.mangle(n)} = {self.expr(init, _Fn(None, False))};")
            else:
                o(f"__managed__ {ty} {T.mangle(n)};")
        o()
        dynamic = [d for d in self.module.decls if d.init is not None and
                   not (isinstance(d.init, (ast.IntLit, ast.FloatLit, ast.BoolLit)) and
                        not T.is_array(g.get(d.name, T.I64)))]
        if self.module.decls:
            o.open("static void irgl_init_globals()")
            for d in dynamic:
                fn = _Fn(None, False)
                o(f"{T.mangle(d.name)} = {self.expr(d.init, fn, g.get(d.name))};")
            o.close()
            o()

    def emit(self) -> str:
        o = self.out
        o(f"// Generated by irglc from module {self.module.name}. Do not edit.")
        o()
        if self.ctx.options.runtime_inline:
            self.out.lines.extend(RUNTIME_HEADER.rstrip("\n").split("\n"))
        else:
            o(f'#include "{HEADER_NAME}"')
        o()
        self.globals()
        if self.device_kernels:
            o("// Device kernels")
            for k in self.module.kernels:
                if k.kind is ast.KernelKind.DEVICE:
                    sc = self._params(k)
                    o(f"__device__ void irgl_{k.name}({', '.join(sc + ['irgl_rt::KernelEnv &irgl_env'])});")
            o()
            for k in self.module.kernels:
                if k.kind is ast.KernelKind.DEVICE:
                    self.device_kernel(k)
        for k in self.module.kernels:
            if k.kind is ast.KernelKind.PLAIN:
                self.plain_kernel(k)
        # Host code is produced before control kernels are known; emit it
        # into a scratch buffer and splice control kernels in front.
        saved = self.out
        self.out = _Out()
        for k in self.module.kernels:
            if k.is_host:
                self.host_kernel(k)
        host_lines = self.out.lines
        self.out = saved
        for name, s, host, bs in self.control_kernels:
            self.control_kernel(name, s, host, bs)
        self.out.lines.extend(host_lines)
        while self.out.lines and self.out.lines[-1] == "":
            self.out.lines.pop()
        return self.out.text()


def _uses_label(body) -> bool:
    """Whether ``body`` can jump to the end of its own ForAll iteration:
    a ReduceAndReturn not inside a nested ForAll."""
    for s in body:
        if isinstance(s, ast.ReduceAndReturn):
            return True
        if isinstance(s, ast.ForAll):
            continue
        if any(_uses_label(b) for b in ast.stmt_bodies(s)):
            return True
    return False


def emit_module(ctx: EmitContext) -> str:
    """The whole translation unit for ``ctx.module``."""
    return Emitter(ctx).emit()
