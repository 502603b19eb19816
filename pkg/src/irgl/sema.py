"""Static rules, kernel classification and block-size constraints.

Rule ids are stable; docs/grammar.md lists them with an example each.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Union

from irgl import ast
from irgl.diagnostics import Diagnostic, DiagnosticError, ParseError, error, warning
from irgl.opcode import parse_operator

MAX_BLOCK = 1024

# ---------------------------------------------------------------------------
# Block-size constraints
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Elastic:
    """Runs with any thread-block size."""

    def domain(self) -> tuple[int, int]:
        return (1, MAX_BLOCK)

    def __str__(self) -> str:
        return "Elastic"


@dataclass(frozen=True)
class Shrinkable:
    """Runs with any block size up to ``max``."""

    max: int

    def __post_init__(self):
        if not 1 <= self.max <= MAX_BLOCK:
            raise ValueError(f"Shrinkable bound {self.max} outside [1, {MAX_BLOCK}]")

    def domain(self) -> tuple[int, int]:
        return (1, self.max)

    def __str__(self) -> str:
        return f"Shrinkable({self.max})"


@dataclass(frozen=True)
class Fixed:
    """Runs with exactly ``n`` threads per block."""

    n: int

    def __post_init__(self):
        if not 1 <= self.n <= MAX_BLOCK:
            raise ValueError(f"Fixed size {self.n} outside [1, {MAX_BLOCK}]")

    def domain(self) -> tuple[int, int]:
        return (self.n, self.n)

    def __str__(self) -> str:
        return f"Fixed({self.n})"


BlockConstraint = Union[Elastic, Shrinkable, Fixed]

# Kernel annotations that pin a kernel to a fixed block size.
FIXED_BLOCK_ANNOTATIONS = ("fixed_block", "cooperative_conversion", "nested_parallelism")


@dataclass(frozen=True)
class AnalysisOptions:
    # kernel name -> block size of a statically specialized runtime
    fixed_blocks: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class KernelInfo:
    kernel: str
    kind: ast.KernelKind = ast.KernelKind.PLAIN
    uses_pop: bool = False
    uses_push: bool = False
    uses_retry: bool = False
    iterates_wl: bool = False
    uses_sync: bool = False
    uses_exclusive: bool = False
    uses_atomic: bool = False
    uses_reduce: bool = False
    reductions_required: frozenset[ast.Reduction] = frozenset()
    block_constraint: BlockConstraint = Elastic()

    @property
    def uses_worklist(self) -> bool:
        return self.uses_pop or self.uses_push or self.uses_retry or self.iterates_wl

    @property
    def uses_barrier(self) -> bool:
        return self.uses_sync or self.uses_exclusive


@dataclass
class Analysis:
    infos: dict[str, KernelInfo]
    diagnostics: list[Diagnostic]

    @property
    def errors(self) -> list[Diagnostic]:
        return [d for d in self.diagnostics if d.is_error]

    @property
    def ok(self) -> bool:
        return not self.errors

    def raise_for_errors(self) -> None:
        if not self.ok:
            raise DiagnosticError(self.errors)


def is_wl_name(e: ast.Expr) -> bool:
    return isinstance(e, ast.Name) and e.id in ("wl", "WL")


def _summary(kernel: ast.Kernel) -> dict[str, bool]:
    s = dict(uses_pop=False, uses_push=False, uses_retry=False, iterates_wl=False,
             uses_sync=False, uses_exclusive=False, uses_atomic=False, uses_reduce=False)
    for st in ast.walk_stmts(kernel.body):
        if isinstance(st, ast.WlPop):
            s["uses_pop"] = True
        elif isinstance(st, ast.WlPush):
            s["uses_push"] = True
        elif isinstance(st, (ast.Retry, ast.Respawn)):
            s["uses_retry"] = True
        elif isinstance(st, (ast.ForAll, ast.For)) and is_wl_name(st.iterator):
            s["iterates_wl"] = True
        elif isinstance(st, ast.SyncRunningThreads):
            s["uses_sync"] = True
        elif isinstance(st, ast.Exclusive):
            s["uses_exclusive"] = True
        elif isinstance(st, ast.Atomic):
            s["uses_atomic"] = True
        elif isinstance(st, ast.ReduceAndReturn):
            s["uses_reduce"] = True
    return s


def _call_sites(module: ast.Module):
    for k in module.kernels:
        for st in ast.walk_stmts(k.body):
            if isinstance(st, (ast.Invoke, ast.Iterate)):
                yield k, st


def _site_reduction(st) -> Optional[ast.Reduction]:
    if isinstance(st, ast.Invoke):
        return st.reduction
    if st.cond_kind is not None:
        return st.cond_kind.reduction
    return None


def block_constraint_of(kernel: ast.Kernel, info: Optional[KernelInfo] = None,
                        options: Optional[AnalysisOptions] = None) -> BlockConstraint:
    """Admissible block sizes of ``kernel``.

    Raises :class:`DiagnosticError` when a fixed block size contradicts
    another fixed source or the kernel's launch bounds.
    """
    options = options or AnalysisOptions()
    sources: list[tuple[str, int]] = []
    if kernel.name in options.fixed_blocks:
        sources.append(("options", options.fixed_blocks[kernel.name]))
    for key in FIXED_BLOCK_ANNOTATIONS:
        value = kernel.annotation(key)
        if value is None:
            continue
        try:
            n = int(value)
        except ValueError:
            raise DiagnosticError([error("annotation-value", f"@{key} needs an integer block size, got '{value}'",
                                         kernel.span)]) from None
        if not 1 <= n <= MAX_BLOCK:
            raise DiagnosticError([error("annotation-value", f"@{key}({n}) is outside [1, {MAX_BLOCK}]",
                                         kernel.span)])
        sources.append((f"@{key}", n))
    lb = kernel.launch_bounds
    if sources:
        sizes = {n for _, n in sources}
        if len(sizes) > 1:
            desc = ", ".join(f"{src}={n}" for src, n in sources)
            raise DiagnosticError([error("fixed-block-conflict",
                                         f"kernel '{kernel.name}' has conflicting fixed block sizes ({desc})",
                                         kernel.span)])
        n = sizes.pop()
        if lb is not None and n > lb.max_threads:
            raise DiagnosticError([error("launch-bounds-fixed-conflict",
                                         f"kernel '{kernel.name}' needs a fixed block size of {n} but its "
                                         f"launch bounds allow at most {lb.max_threads}",
                                         lb.span or kernel.span)])
        return Fixed(n)
    if lb is not None and 1 <= lb.max_threads <= MAX_BLOCK:
        return Shrinkable(lb.max_threads)
    return Elastic()


# ---------------------------------------------------------------------------
# Rule checking
# ---------------------------------------------------------------------------


@dataclass
class _Ctx:
    kernel: ast.Kernel
    forall_depth: int = 0
    outer_forall_body: bool = False
    in_exclusive: bool = False
    in_critical: bool = False
    in_pipe: bool = False


class _Checker:
    def __init__(self, module: ast.Module, summaries: dict[str, dict[str, bool]]):
        self.module = module
        self.kernels = {k.name: k for k in module.kernels}
        self.summaries = summaries
        self.diags: list[Diagnostic] = []

    def err(self, rule: str, msg: str, node) -> None:
        self.diags.append(error(rule, msg, getattr(node, "span", None)))

    def warn(self, rule: str, msg: str, node) -> None:
        self.diags.append(warning(rule, msg, getattr(node, "span", None)))

    def _uses_wl(self, name: str) -> bool:
        s = self.summaries.get(name)
        return bool(s) and (s["uses_pop"] or s["uses_push"] or s["uses_retry"] or s["iterates_wl"])

    def check_kernel(self, k: ast.Kernel) -> None:
        lb = k.launch_bounds
        if lb is not None:
            if not 1 <= lb.max_threads <= MAX_BLOCK:
                self.err("launch-bounds-range",
                         f"launch bounds maxthreadsperblock {lb.max_threads} is outside [1, {MAX_BLOCK}]", lb)
            if lb.min_blocks is not None and lb.min_blocks < 1:
                self.err("launch-bounds-range", "launch bounds minblocks must be positive", lb)
        self.stmts(k.body, _Ctx(k))

    def stmts(self, body, ctx: _Ctx) -> None:
        for st in body:
            self.stmt(st, ctx)

    def stmt(self, st: ast.Stmt, ctx: _Ctx) -> None:
        k = ctx.kernel
        kind = k.kind
        direct = ctx.outer_forall_body
        inner = replace(ctx, outer_forall_body=False)
        name = type(st).__name__

        if isinstance(st, ast.ORCHESTRATION_CONSTRUCTS) and kind is not ast.KernelKind.HOST:
            self.err("orchestration-in-nonhost",
                     f"{name} may only be used in a host kernel ('{k.name}' is {kind.value})", st)
        if isinstance(st, ast.KERNEL_CONSTRUCTS + (ast.SyncRunningThreads,)):
            if kind is ast.KernelKind.HOST:
                self.err("kernel-construct-in-host", f"{name} cannot be used in host kernel '{k.name}'", st)
            elif kind is ast.KernelKind.DEVICE:
                self.err("kernel-construct-in-device", f"{name} cannot be used in device kernel '{k.name}'", st)
        if isinstance(st, (ast.WlPop, ast.WlPush)) and kind is ast.KernelKind.HOST:
            self.err("worklist-in-host", f"worklist {'pop' if isinstance(st, ast.WlPop) else 'push'} "
                     f"cannot be used in host kernel '{k.name}'", st)
        if isinstance(st, ast.ForAll) and kind is ast.KernelKind.DEVICE:
            self.err("kernel-construct-in-device", f"ForAll cannot be used in device kernel '{k.name}'", st)

        if isinstance(st, ast.CBlock):
            self.cblock(st)
        elif isinstance(st, ast.ForAll):
            body_ctx = replace(inner, forall_depth=ctx.forall_depth + 1,
                               outer_forall_body=ctx.forall_depth == 0 and kind is ast.KernelKind.PLAIN)
            self.stmts(st.body, body_ctx)
        elif isinstance(st, ast.Exclusive):
            if ctx.in_exclusive:
                self.err("exclusive-nested", "Exclusive cannot be nested inside another Exclusive", st)
            elif not direct and kind is ast.KernelKind.PLAIN:
                self.err("exclusive-placement",
                         "Exclusive must be placed directly inside the outermost ForAll", st)
            crit = replace(inner, in_exclusive=True, in_critical=True)
            self.stmts(st.locked, crit)
            if st.failed is not None:
                self.stmts(st.failed, crit)
        elif isinstance(st, ast.Atomic):
            crit = replace(inner, in_critical=True)
            self.stmts(st.locked, crit)
            if st.failed is not None:
                self.stmts(st.failed, crit)
        elif isinstance(st, ast.ReduceAndReturn):
            if ctx.in_critical:
                self.err("reduce-in-critical",
                         "ReduceAndReturn cannot leave an Atomic or Exclusive block", st)
        elif isinstance(st, ast.Invoke):
            self.call_site(st, ctx)
        elif isinstance(st, ast.Iterate):
            self.call_site(st, ctx)
            if st.initial is not None and ctx.in_pipe:
                self.err("iterate-initial-in-pipe",
                         "Iterate inside a Pipe inherits its worklists and cannot have an Initial clause", st)
            self.stmts(st.between_rounds, replace(inner, in_pipe=True))
        elif isinstance(st, ast.Pipe):
            if st.wlinit is not None and ctx.in_pipe:
                self.err("pipe-init-nested", "a nested Pipe inherits its worklists and cannot have an "
                         "Initial clause", st)
            self.stmts(st.body, replace(inner, in_pipe=True))
        else:
            for body in ast.stmt_bodies(st):
                self.stmts(body, inner)

    def cblock(self, st: ast.CBlock) -> None:
        try:
            parse_operator(st.code)
        except ParseError as exc:
            d = exc.diagnostics[0]
            rule = d.rule_id if d.rule_id.startswith("cblock") else "cblock-syntax"
            self.err(rule, f"operator code {st.code!r}: {d.message}", st)
            return
        if st.reads is None or st.writes is None:
            self.warn("cblock-rw-missing", f"operator code {st.code!r} has no read/write annotation", st)

    def call_site(self, st, ctx: _Ctx) -> None:
        target = self.kernels.get(st.kernel)
        what = "Invoke" if isinstance(st, ast.Invoke) else "Iterate"
        if target is None:
            self.err("unknown-kernel", f"{what} of undefined kernel '{st.kernel}'", st)
            return
        if target.kind is not ast.KernelKind.PLAIN:
            self.err("invoke-non-plain", f"{what} of {target.kind.value} kernel '{st.kernel}'", st)
            return
        if len(st.args) != len(target.params):
            self.err("arity-mismatch", f"kernel '{st.kernel}' takes {len(target.params)} argument(s), "
                     f"{len(st.args)} given", st)
        uses_wl = self._uses_wl(st.kernel)
        if isinstance(st, ast.Invoke) and uses_wl and not ctx.in_pipe:
            self.err("worklist-invoke-outside-pipe",
                     f"kernel '{st.kernel}' uses the worklist and must be invoked inside a Pipe or Iterate", st)
        if isinstance(st, ast.Iterate) and not uses_wl and st.cond_kind is None and st.extra_cond is None:
            self.err("iterate-no-termination",
                     f"Iterate over '{st.kernel}', which does not use the worklist, needs a While/Until "
                     "condition or an extra condition", st)
        red = _site_reduction(st)
        if red is not None and not self.summaries[st.kernel]["uses_reduce"]:
            self.warn("reduction-without-return",
                      f"{red.value} reduction requested but kernel '{st.kernel}' never executes "
                      "ReduceAndReturn", st)


def analyze(module: ast.Module, options: Optional[AnalysisOptions] = None) -> Analysis:
    """Check every static rule and classify every kernel."""
    options = options or AnalysisOptions()
    summaries = {k.name: _summary(k) for k in module.kernels}
    reductions: dict[str, set[ast.Reduction]] = {k.name: set() for k in module.kernels}
    for _, st in _call_sites(module):
        red = _site_reduction(st)
        if red is not None and st.kernel in reductions:
            reductions[st.kernel].add(red)

    checker = _Checker(module, summaries)
    seen: set[str] = set()
    infos: dict[str, KernelInfo] = {}
    for k in module.kernels:
        if k.name in seen:
            checker.err("duplicate-kernel", f"kernel '{k.name}' is defined more than once", k)
            continue
        seen.add(k.name)
        checker.check_kernel(k)
        info = KernelInfo(k.name, k.kind, reductions_required=frozenset(reductions[k.name]), **summaries[k.name])
        try:
            bc = block_constraint_of(k, info, options)
        except DiagnosticError as exc:
            checker.diags.extend(exc.diagnostics)
            bc = Elastic() if k.launch_bounds is None or not 1 <= k.launch_bounds.max_threads <= MAX_BLOCK \
                else Shrinkable(k.launch_bounds.max_threads)
        infos[k.name] = replace(info, block_constraint=bc)
    return Analysis(infos, checker.diags)


# ---------------------------------------------------------------------------
# Host ForAll demotion
# ---------------------------------------------------------------------------


def map_stmts(body: tuple[ast.Stmt, ...], fn) -> tuple[ast.Stmt, ...]:
    """Rebuild ``body`` bottom-up, replacing each statement with ``fn(stmt)``."""
    out = []
    for st in body:
        if isinstance(st, (ast.ForAll, ast.For, ast.While, ast.Pipe)):
            st = replace(st, body=map_stmts(st.body, fn))
        elif isinstance(st, ast.If):
            st = replace(st, then=map_stmts(st.then, fn), orelse=map_stmts(st.orelse, fn))
        elif isinstance(st, (ast.Atomic, ast.Exclusive)):
            failed = None if st.failed is None else map_stmts(st.failed, fn)
            st = replace(st, locked=map_stmts(st.locked, fn), failed=failed)
        elif isinstance(st, ast.Iterate):
            st = replace(st, between_rounds=map_stmts(st.between_rounds, fn))
        out.append(fn(st))
    return tuple(out)


def _demote(st: ast.Stmt) -> ast.Stmt:
    if isinstance(st, ast.ForAll):
        return ast.For(st.var, st.iterator, st.body, span=st.span)
    return st


def host_forall_demotion(module: ast.Module) -> ast.Module:
    """Rewrite every ForAll inside a host kernel to a sequential For."""
    kernels = tuple(
        replace(k, body=map_stmts(k.body, _demote)) if k.is_host else k
        for k in module.kernels
    )
    return replace(module, kernels=kernels)
