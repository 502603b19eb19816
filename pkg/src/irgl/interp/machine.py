"""The simulated bulk-synchronous machine.

Virtual threads are generators stepped by a deterministic scheduler. Each
scheduling quantum visits every live thread once, in thread-id order for
seed 0 and in a seeded shuffle otherwise. A quantum in which no thread
makes progress is a deadlock.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from irgl import ast
from irgl.interp.compile import (
    BARRIER, STEP, Compiler, Frame, UnboundName,
)
from irgl.interp.values import Graph, SimError, check_param, format_value
from irgl.interp.worklist import PipeState
from irgl.sema import AnalysisOptions, analyze, host_forall_demotion


class SimulatedDeadlock(SimError):
    pass


class UniformityError(SimError):
    """An Exclusive was not reached by every launched thread."""


class SimulationLimit(SimError):
    pass


@dataclass(frozen=True)
class SimConfig:
    resident_threads: int = 64
    block_size: int = 32
    schedule_seed: int = 0
    # conflict reruns allowed before reruns are serialized onto one thread
    retry_serialize_after: int = 4
    # bound on orchestration loop rounds (Iterate, looping Pipe, retry reruns)
    max_rounds: int = 100_000
    # bound on scheduler quanta per launch
    max_quanta: int = 5_000_000
    # force this many threads per launch instead of min(resident, needed)
    launch_threads: Optional[int] = None
    # kernel name -> ForAll mapping override
    mappings: dict[str, ast.Mapping] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("resident_threads", "block_size", "retry_serialize_after", "max_rounds", "max_quanta"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.launch_threads is not None and self.launch_threads < 1:
            raise ValueError("launch_threads must be positive")


@dataclass(frozen=True)
class ExclusiveRecord:
    epoch: int
    thread: int
    claims: tuple[int, ...]
    won: bool


@dataclass
class Stats:
    launches: list[str] = field(default_factory=list)
    launch_threads: list[int] = field(default_factory=list)
    iterate_rounds: list[int] = field(default_factory=list)
    epoch_violations: int = 0
    pops: int = 0
    exclusive_log: list[ExclusiveRecord] = field(default_factory=list)
    # ReduceAndReturn values of each launch, in evaluation order
    reduce_values: list[list[bool]] = field(default_factory=list)
    max_spins: int = 0
    max_lock_owners: int = 0
    retry_reruns: int = 0
    serialized_launches: int = 0


class _Thread:
    __slots__ = ("tid", "gen", "waiting", "frame")

    def __init__(self, tid: int):
        self.tid = tid
        self.gen = None
        self.waiting: Optional[str] = None
        self.frame: Optional[Frame] = None


class Machine:
    def __init__(self, module: ast.Module, config: Optional[SimConfig] = None, trace: bool = False,
                 options: Optional[AnalysisOptions] = None, echo: Optional[Callable[[str], None]] = None):
        analysis = analyze(module, options)
        analysis.raise_for_errors()
        self.module = host_forall_demotion(module)
        self.infos = analysis.infos
        self.config = config or SimConfig()
        self.compiler = Compiler(self.module, self.infos)
        self.globals: dict[str, Any] = {}
        self.pipe: Optional[PipeState] = None
        self.epoch = 0
        self.stats = Stats()
        self.trace: Optional[list[str]] = [] if trace else None
        self.output: list[str] = []
        self.echo = echo
        self.rng = random.Random(self.config.schedule_seed)
        self._exclusive: dict[int, dict[int, int]] = {}
        self._lock_owner: dict[tuple[int, Any], int] = {}
        # per-launch state
        self.nthreads = 0
        self._launch_in = 0
        self._bar_count = 0
        self._bar_gen = 0
        self._reduce: list[bool] = []
        self._conflict = False
        self._released = False

    # -- tracing and output ------------------------------------------------

    def _t(self, line: str) -> None:
        if self.trace is not None:
            self.trace.append(line)

    def printf(self, text: str) -> None:
        self.output.append(text)
        if self.echo is not None:
            self.echo(text)

    # -- entry points ------------------------------------------------------

    def run_host(self, entry: str = "main", bindings: Optional[dict[str, Any]] = None) -> dict[str, Any]:
        """Run host kernel ``entry``; returns the final global bindings."""
        kernel = self._kernel(entry)
        if not kernel.is_host:
            raise SimError(f"entry kernel '{entry}' is not a host kernel")
        bindings = dict(bindings or {})
        host = Frame(self, {}, None, host=True)
        for d in self.module.decls:
            if d.name in bindings:
                self.globals[d.name] = bindings.pop(d.name)
            elif d.init is not None:
                self.globals[d.name] = self.compiler.expr(d.init)(host)
            else:
                self.globals[d.name] = 0
        for p in kernel.params:
            if p.name not in bindings:
                raise UnboundName(f"host kernel '{entry}' parameter '{p.name}' is not bound")
            msg = check_param(p.name, p.tag, bindings[p.name])
            if msg:
                raise SimError(msg)
        self.globals.update(bindings)
        for _ in self.compiler.kernel_body(entry)(host):
            pass
        return dict(self.globals)

    def launch_kernel(self, name: str, args: list[Any], reduction: Optional[ast.Reduction] = None,
                      serial: bool = False) -> Optional[bool]:
        """Launch a plain kernel and run it to completion.

        Returns the Any/All fold of its ReduceAndReturn values when
        ``reduction`` is given, else None.
        """
        kernel = self._kernel(name)
        if kernel.kind is not ast.KernelKind.PLAIN:
            raise SimError(f"cannot launch {kernel.kind.value} kernel '{name}'")
        if len(args) != len(kernel.params):
            raise SimError(f"kernel '{name}' takes {len(kernel.params)} argument(s), {len(args)} given")
        params = {}
        for p, v in zip(kernel.params, args):
            msg = check_param(p.name, p.tag, v)
            if msg:
                raise SimError(f"kernel '{name}': {msg}")
            params[p.name] = v
        info = self.infos[name]
        cfg = self.config
        self.epoch += 1
        self._launch_in = len(self.pipe.wl_in) if self.pipe is not None else 0
        if serial:
            nthreads = 1
            self.stats.serialized_launches += 1
        elif cfg.launch_threads is not None:
            nthreads = cfg.launch_threads
            if info.uses_barrier and nthreads > cfg.resident_threads:
                raise SimulatedDeadlock(
                    f"kernel '{name}' uses a global barrier but was launched with {nthreads} threads, "
                    f"more than the {cfg.resident_threads} that can be resident")
        else:
            nthreads = min(cfg.resident_threads, max(1, self._needed_threads(kernel, params)))
        self.nthreads = nthreads
        self._bar_count = 0
        self._reduce = []
        self._conflict = False
        self.stats.launches.append(name)
        self.stats.launch_threads.append(nthreads)
        self._t(f"launch epoch={self.epoch} kernel={name} threads={nthreads} in={self._launch_in}")
        body = self.compiler.kernel_body(name)
        threads = []
        for t in range(nthreads):
            th = _Thread(t)
            th.frame = Frame(self, dict(params), th)
            th.gen = body(th.frame)
            threads.append(th)
        self._schedule(name, threads)
        values = self._reduce
        self.stats.reduce_values.append(values)
        if reduction is None:
            return None
        return any(values) if reduction is ast.Reduction.ANY else all(values)

    # -- scheduling --------------------------------------------------------

    def _needed_threads(self, kernel: ast.Kernel, params: dict) -> int:
        """Iterations of the kernel's top-level ForAlls, when computable
        from the arguments alone; otherwise a full grid."""
        probe = Frame(self, dict(params), None)
        sizes = []
        for s in kernel.body:
            if isinstance(s, ast.ForAll):
                try:
                    v = self.compiler.expr(s.iterator)(probe)
                except SimError:
                    return self.config.resident_threads
                if not isinstance(v, (list, range)):
                    return self.config.resident_threads
                sizes.append(len(v))
        return max(sizes) if sizes else self.config.resident_threads

    def _schedule(self, name: str, threads: list[_Thread]) -> None:
        live = threads
        seeded = self.config.schedule_seed != 0
        quanta = 0
        while live:
            quanta += 1
            if quanta > self.config.max_quanta:
                raise SimulationLimit(f"kernel '{name}' exceeded {self.config.max_quanta} scheduling quanta")
            order = self.rng.sample(live, len(live)) if seeded else live
            self._released = False
            progress = False
            finished = False
            for th in order:
                try:
                    ev = next(th.gen)
                except StopIteration:
                    th.gen = None
                    finished = True
                    continue
                except SimError as exc:
                    raise type(exc)(f"kernel '{name}', thread {th.tid}: {exc}") from exc
                if ev == STEP:
                    progress = True
            if finished:
                live = [th for th in live if th.gen is not None]
                progress = True
            if not (progress or self._released):
                self._deadlock(name, live)

    def _deadlock(self, name: str, live: list[_Thread]) -> None:
        waits = [th.waiting for th in live]
        if "exclusive" in waits and len(live) < self.nthreads:
            raise UniformityError(
                f"kernel '{name}': Exclusive reached by {self._bar_count} of {self.nthreads} launched "
                "threads; Exclusive must be executed uniformly by all threads")
        if any(w is not None for w in waits):
            raise SimulatedDeadlock(
                f"kernel '{name}': barrier reached by {self._bar_count} of {self.nthreads} launched threads")
        raise SimulatedDeadlock(f"kernel '{name}': {len(live)} thread(s) blocked on locks that are never released")

    def barrier(self, th: _Thread, kind: str):
        gen = self._bar_gen
        self._bar_count += 1
        if self._bar_count == self.nthreads:
            self._bar_count = 0
            self._bar_gen += 1
            self._released = True
            self._t(f"barrier epoch={self.epoch} generation={self._bar_gen} kind={kind}")
            return
        th.waiting = kind
        while self._bar_gen == gen:
            yield BARRIER
        th.waiting = None

    # -- kernel-side services ----------------------------------------------

    def wl_range(self) -> range:
        if self.pipe is None:
            raise SimError("worklist used outside a pipe context")
        return range(self._launch_in)

    def wl_pop(self, fr: Frame, index: int) -> int:
        if self.pipe is None:
            raise SimError("worklist pop outside a pipe context")
        wl = self.pipe.wl_in
        if wl.epoch >= self.epoch:
            self.stats.epoch_violations += 1
        if not 0 <= index < self._launch_in:
            raise SimError(f"pop index {index} outside the {self._launch_in} items of this invocation")
        item = wl.pop(index)
        self.stats.pops += 1
        self._t(f"pop epoch={self.epoch} thread={fr.th.tid} index={index} item={item}")
        return item

    def wl_push(self, fr: Frame, item: int) -> None:
        if self.pipe is None:
            raise SimError("worklist push outside a pipe context")
        self.pipe.wl_out.push(item, self.epoch)
        self._t(f"push epoch={self.epoch} thread={fr.th.tid} item={int(item)}")

    def wl_retry(self, fr: Frame, item: int, conflict: bool) -> None:
        if self.pipe is None:
            raise SimError("Retry outside a pipe context")
        self.pipe.wl_retry.push(item, self.epoch)
        if conflict:
            self._conflict = True
        kind = "retry" if conflict else "respawn"
        self._t(f"{kind} epoch={self.epoch} thread={fr.th.tid} item={int(item)}")

    def reduce_value(self, fr: Frame, value: bool) -> None:
        self._reduce.append(value)

    def try_acquire(self, fr: Frame, cont, key, label: str) -> bool:
        if cont[key] != 0:
            return False
        cont[key] = 1
        owner_key = (id(cont), key)
        if owner_key in self._lock_owner:
            raise SimError(f"lock {label} acquired while owned by thread {self._lock_owner[owner_key]}")
        self._lock_owner[owner_key] = fr.th.tid
        self.stats.max_lock_owners = max(self.stats.max_lock_owners, len(self._lock_owner))
        self._t(f"acquire epoch={self.epoch} thread={fr.th.tid} lock={label}")
        return True

    def release(self, fr: Frame, cont, key, label: str) -> None:
        self._lock_owner.pop((id(cont), key), None)
        cont[key] = 0
        self._t(f"release epoch={self.epoch} thread={fr.th.tid} lock={label}")

    def note_spins(self, n: int) -> None:
        if n > self.stats.max_spins:
            self.stats.max_spins = n

    def exclusive_slots(self, obj) -> dict[int, int]:
        return self._exclusive.setdefault(id(obj), {})

    def log_exclusive(self, fr: Frame, claims, won: bool) -> None:
        self.stats.exclusive_log.append(ExclusiveRecord(self.epoch, fr.th.tid, tuple(claims), won))

    def mapping_for(self, kernel: str, mapping: ast.Mapping) -> ast.Mapping:
        return self.config.mappings.get(kernel, mapping)

    def node_property(self, name: str, graph: Graph) -> list:
        arr = self.globals.get(name)
        if arr is None:
            arr = self.globals[name] = [0] * graph.nnodes
        if not isinstance(arr, list):
            raise SimError(f"node property '{name}' is not an array")
        return arr

    def default_graph(self) -> Graph:
        graphs = [v for v in self.globals.values() if isinstance(v, Graph)]
        if len(graphs) != 1:
            raise SimError(f"graph builtin needs exactly one bound graph, found {len(graphs)}")
        return graphs[0]

    # -- orchestration -----------------------------------------------------

    def _kernel(self, name: str) -> ast.Kernel:
        try:
            return self.module.kernel(name)
        except KeyError:
            raise SimError(f"no kernel named '{name}'") from None

    def _swap_in_out(self) -> None:
        self.pipe.swap_in_out()
        self._t(f"swap in<->out {self.pipe.sizes()}")

    def invoke(self, name: str, args: list[Any], reduction: Optional[ast.Reduction] = None) -> Optional[bool]:
        """One Invoke: launch, rerun while retry is nonempty, then swap."""
        info = self.infos[name]
        result = self.launch_kernel(name, args, reduction)
        if not info.uses_worklist or self.pipe is None:
            return result
        reruns = conflicts = 0
        while len(self.pipe.wl_retry):
            if self._conflict:
                conflicts += 1
            reruns += 1
            if reruns > self.config.max_rounds:
                raise SimulationLimit(f"kernel '{name}' retried more than {self.config.max_rounds} times")
            serial = self._conflict and conflicts > self.config.retry_serialize_after
            self.pipe.swap_in_retry()
            self._t(f"swap in<->retry {self.pipe.sizes()}")
            self.stats.retry_reruns += 1
            r = self.launch_kernel(name, args, reduction, serial=serial)
            if reduction is ast.Reduction.ANY:
                result = result or r
            elif reduction is ast.Reduction.ALL:
                result = result and r
        self._swap_in_out()
        return result

    def _open_pipe(self, fr: Frame, init) -> bool:
        if self.pipe is not None:
            return False
        capacity, items = init(fr) if init is not None else (None, [])
        if capacity is not None and capacity < 1:
            raise SimError(f"worklist size must be positive, got {capacity}")
        self.pipe = PipeState.fresh(capacity, items)
        self._t(f"pipe open {self.pipe.sizes()}")
        return True

    def _close_pipe(self) -> None:
        self._t("pipe close")
        self.pipe = None

    def host_invoke(self, fr: Frame, st: ast.Invoke, args) -> None:
        result = self.invoke(st.kernel, [a(fr) for a in args], st.reduction)
        if st.result is not None:
            self.globals[st.result] = result

    def host_iterate(self, fr: Frame, st: ast.Iterate, args, between, extra, init) -> None:
        info = self.infos[st.kernel]
        reduction = st.cond_kind.reduction if st.cond_kind is not None else None
        opened = self._open_pipe(fr, init) if (st.initial is not None or info.uses_worklist) else False
        rounds = 0
        try:
            while True:
                done = info.uses_worklist and len(self.pipe.wl_in) == 0
                if extra is not None:
                    e = bool(extra(fr))
                    done = (done and e) if st.extra_cond.combiner is ast.Combiner.AND else (done or e)
                if done:
                    break
                if rounds >= self.config.max_rounds:
                    raise SimulationLimit(f"Iterate over '{st.kernel}' exceeded {self.config.max_rounds} rounds")
                result = self.invoke(st.kernel, [a(fr) for a in args], reduction)
                rounds += 1
                for _ in between(fr):
                    pass
                if st.cond_kind is not None:
                    if st.cond_kind.mode is ast.LoopMode.WHILE and not result:
                        break
                    if st.cond_kind.mode is ast.LoopMode.UNTIL and result:
                        break
        finally:
            self.stats.iterate_rounds.append(rounds)
            if opened:
                self._close_pipe()

    def host_pipe(self, fr: Frame, st: ast.Pipe, body, init) -> None:
        opened = self._open_pipe(fr, init)
        try:
            if st.once:
                for _ in body(fr):
                    pass
                return
            rounds = 0
            while len(self.pipe.wl_in):
                rounds += 1
                if rounds > self.config.max_rounds:
                    raise SimulationLimit(f"Pipe exceeded {self.config.max_rounds} rounds")
                for _ in body(fr):
                    pass
        finally:
            if opened:
                self._close_pipe()


def run_host(module: ast.Module, entry: str = "main", bindings: Optional[dict[str, Any]] = None,
             config: Optional[SimConfig] = None, trace: bool = False) -> dict[str, Any]:
    return Machine(module, config, trace).run_host(entry, bindings)


def format_bindings(values: dict[str, Any], names: Optional[list[str]] = None) -> str:
    keys = names if names else list(values)
    return "".join(f"{k} = {format_value(values[k])}\n" for k in keys if k in values)
