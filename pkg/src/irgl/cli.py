"""``irglc``: check, plan, compile, run, dump-ast and fmt.

Exit codes: 0 on success, 1 when diagnostics (or a simulation error)
stop the command, 2 on usage errors.

Flag to config field map:

    --outline                EmitOptions.outline
    --runtime-header         EmitOptions.runtime_inline = False
    --mapping K=blocked      EmitOptions.mappings / SimConfig.mappings
    --sm-count N             PlanConfig.sm_count
    --blocks-per-sm N        PlanConfig.blocks_per_sm
    --block-size K=N         PlanConfig.block_sizes
    --fixed-block K=N        AnalysisOptions.fixed_blocks
    --resident-threads N     SimConfig.resident_threads
    --sim-block-size N       SimConfig.block_size
    --launch-threads N       SimConfig.launch_threads
    --seed N                 SimConfig.schedule_seed
    --retry-serialize-after  SimConfig.retry_serialize_after
    --max-rounds N           SimConfig.max_rounds
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Optional, Sequence

from irgl import ast
from irgl.codegen import HEADER_NAME, RUNTIME_HEADER, EmitContext, EmitOptions, emit_module
from irgl.diagnostics import Diagnostic, DiagnosticError, IrglError
from irgl.frontend import pretty_print, parse_file
from irgl.interp import Graph, Machine, SimConfig, SimError, format_bindings, load_graph, parse_value
from irgl.planner import PlanConfig, format_plans, plan_module
from irgl.sema import AnalysisOptions, analyze
from irgl.serial import serialize

EXIT_OK, EXIT_DIAGNOSTICS, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _pairs(values: Optional[list[str]], flag: str) -> list[tuple[str, str]]:
    out = []
    for v in values or []:
        key, sep, val = v.partition("=")
        if not sep or not key or not val:
            raise UsageError(f"{flag} expects NAME=VALUE, got '{v}'")
        out.append((key, val))
    return out


def _int_pairs(values, flag: str) -> dict[str, int]:
    out = {}
    for k, v in _pairs(values, flag):
        try:
            out[k] = int(v)
        except ValueError:
            raise UsageError(f"{flag} {k}={v}: value is not an integer") from None
    return out


def _mappings(values) -> dict[str, ast.Mapping]:
    out = {}
    for k, v in _pairs(values, "--mapping"):
        try:
            out[k] = ast.Mapping(v)
        except ValueError:
            raise UsageError(f"--mapping {k}={v}: expected 'blocked' or 'consecutive'") from None
    return out


def _validate(args, module: ast.Module) -> None:
    for flag in ("fixed_block", "block_size", "mapping"):
        if getattr(args, flag, None):
            name = "--" + flag.replace("_", "-")
            _check_kernel_names(module, [k for k, _ in _pairs(getattr(args, flag), name)], name)


def _analysis_options(args) -> AnalysisOptions:
    return AnalysisOptions(fixed_blocks=_int_pairs(args.fixed_block, "--fixed-block"))


def _plan_config(args) -> PlanConfig:
    return PlanConfig(sm_count=args.sm_count, blocks_per_sm=args.blocks_per_sm,
                      block_sizes=_int_pairs(args.block_size, "--block-size"))


def _check_kernel_names(module: ast.Module, names, flag: str) -> None:
    known = {k.name for k in module.kernels}
    for name in names:
        if name not in known:
            raise UsageError(f"{flag}: no kernel named '{name}' (known: {', '.join(sorted(known))})")


def _report(diags: Sequence[Diagnostic], path: str) -> None:
    for d in diags:
        print(d.format(path), file=sys.stderr)


def _load(path: str, args=None) -> ast.Module:
    try:
        module = parse_file(path)
    except OSError as exc:
        raise UsageError(f"cannot read '{path}': {exc.strerror}") from None
    if args is not None:
        _validate(args, module)
    return module


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_check(args) -> int:
    module = _load(args.input, args)
    analysis = analyze(module, _analysis_options(args))
    _report(analysis.diagnostics, args.input)
    return EXIT_DIAGNOSTICS if analysis.errors else EXIT_OK


def _emit_context(args, module) -> EmitContext:
    options = EmitOptions(outline=args.outline, mappings=_mappings(args.mapping),
                          runtime_inline=not args.runtime_header)
    return EmitContext.build(module, options, _plan_config(args), _analysis_options(args))


def cmd_plan(args) -> int:
    module = _load(args.input, args)
    analysis = analyze(module, _analysis_options(args))
    analysis.raise_for_errors()
    config = _plan_config(args)
    if args.outline:
        ctx = _emit_context(args, module)
        emit_module(ctx)
        plans, diags = ctx.plans, ctx.diagnostics
    else:
        plans, diags = plan_module(analysis, config)
        diags = list(analysis.diagnostics) + diags
    _report(diags, args.input)
    if any(d.is_error for d in diags):
        return EXIT_DIAGNOSTICS
    sys.stdout.write(format_plans(plans, config, analysis.infos))
    return EXIT_OK


def cmd_compile(args) -> int:
    module = _load(args.input, args)
    ctx = _emit_context(args, module)
    text = emit_module(ctx)
    _report(ctx.diagnostics, args.input)
    out = args.out or os.path.splitext(args.input)[0] + ".cu"
    if out == "-":
        sys.stdout.write(text)
        return EXIT_OK
    with open(out, "w", encoding="utf-8") as f:
        f.write(text)
    if args.runtime_header:
        with open(os.path.join(os.path.dirname(os.path.abspath(out)), HEADER_NAME), "w", encoding="utf-8") as f:
            f.write(RUNTIME_HEADER)
    return EXIT_OK


def _bindings(args) -> dict:
    out: dict = {}
    for spec in args.graph or []:
        name, sep, path = spec.partition("=")
        if not sep:
            name, path = "graph", spec
        out[name] = load_graph(path, symmetric=not args.directed)
    for name, val in _pairs(args.bind, "--bind"):
        if val.startswith("@"):
            with open(val[1:], encoding="utf-8") as f:
                val = f.read()
        out[name] = parse_value(val.strip())
    return out


def cmd_run(args) -> int:
    module = _load(args.input, args)
    config = SimConfig(resident_threads=args.resident_threads, block_size=args.sim_block_size,
                       schedule_seed=args.seed, retry_serialize_after=args.retry_serialize_after,
                       max_rounds=args.max_rounds, launch_threads=args.launch_threads,
                       mappings=_mappings(args.mapping))
    bindings = _bindings(args)
    machine = Machine(module, config, trace=args.trace is not None, options=_analysis_options(args),
                      echo=sys.stdout.write)
    try:
        values = machine.run_host(args.entry, bindings)
    finally:
        if args.trace is not None and machine.trace is not None:
            text = "".join(line + "\n" for line in machine.trace)
            if args.trace == "-":
                sys.stderr.write(text)
            else:
                with open(args.trace, "w", encoding="utf-8") as f:
                    f.write(text)
    names = args.print.split(",") if args.print else \
        [k for k, v in values.items() if not isinstance(v, Graph) and k not in bindings]
    sys.stdout.write(format_bindings(values, names))
    return EXIT_OK


def cmd_dump_ast(args) -> int:
    sys.stdout.write(serialize(_load(args.input)))
    return EXIT_OK


def cmd_fmt(args) -> int:
    sys.stdout.write(pretty_print(_load(args.input)))
    return EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{text}' is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"'{text}' must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="irglc", description="IrGL compiler and reference interpreter.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", required=True)

    def command(name, fn, help_):
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.add_argument("input", help="IrGL source file")
        sp.set_defaults(fn=fn, parser=sp)
        return sp

    def sema_flags(sp):
        sp.add_argument("--fixed-block", action="append", metavar="KERNEL=N",
                        help="pin a kernel to a statically specialized block size")

    def plan_flags(sp):
        sema_flags(sp)
        sp.add_argument("--outline", action="store_true", help="outline pipes into control kernels")
        sp.add_argument("--sm-count", type=_positive, default=PlanConfig.sm_count)
        sp.add_argument("--blocks-per-sm", type=_positive, default=PlanConfig.blocks_per_sm)
        sp.add_argument("--block-size", action="append", metavar="KERNEL=N",
                        help="per-kernel block size, checked against its constraint")
        sp.add_argument("--mapping", action="append", metavar="KERNEL=blocked|consecutive")
        sp.add_argument("--runtime-header", action="store_true",
                        help="#include the runtime header instead of inlining it")
        sp.add_argument("--runtime-inline", dest="runtime_header", action="store_false")

    sema_flags(command("check", cmd_check, "report diagnostics"))
    plan_flags(command("plan", cmd_plan, "print the launch plan table"))
    sp = command("compile", cmd_compile, "emit CUDA C++")
    plan_flags(sp)
    sp.add_argument("--out", "-o", help="output path ('-' for stdout); default: input with .cu suffix")

    sp = command("run", cmd_run, "run on the reference interpreter")
    sema_flags(sp)
    defaults = SimConfig()
    sp.add_argument("--graph", action="append", metavar="[NAME=]PATH",
                    help="bind a graph edge-list file (NAME defaults to 'graph')")
    sp.add_argument("--directed", action="store_true", help="do not symmetrize graph edges")
    sp.add_argument("--bind", action="append", metavar="NAME=VALUE|NAME=@FILE")
    sp.add_argument("--entry", default="main", help="host kernel to run")
    sp.add_argument("--print", metavar="NAMES", help="comma-separated bindings to print")
    sp.add_argument("--trace", metavar="PATH", help="write the event trace here ('-' for stderr)")
    sp.add_argument("--resident-threads", type=_positive, default=defaults.resident_threads)
    sp.add_argument("--sim-block-size", type=_positive, default=defaults.block_size)
    sp.add_argument("--launch-threads", type=_positive, default=None)
    sp.add_argument("--seed", type=int, default=defaults.schedule_seed)
    sp.add_argument("--retry-serialize-after", type=_positive, default=defaults.retry_serialize_after)
    sp.add_argument("--max-rounds", type=_positive, default=defaults.max_rounds)
    sp.add_argument("--mapping", action="append", metavar="KERNEL=blocked|consecutive")

    command("dump-ast", cmd_dump_ast, "print the canonical serialization")
    command("fmt", cmd_fmt, "pretty-print the source")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except UsageError as exc:
        args.parser.print_usage(sys.stderr)
        print(f"irglc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DiagnosticError as exc:
        _report(exc.diagnostics, args.input)
        return EXIT_DIAGNOSTICS
    except (SimError, IrglError, ValueError, OSError) as exc:
        print(f"irglc: error: {exc}", file=sys.stderr)
        return EXIT_DIAGNOSTICS


if __name__ == "__main__":
    sys.exit(main())
