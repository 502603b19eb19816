"""Launch planning: block sizes, grid policies and the control-kernel
block size of an outlined pipe."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from irgl import ast
from irgl.diagnostics import Diagnostic, DiagnosticError, error, warning
from irgl.sema import MAX_BLOCK, Analysis, BlockConstraint, KernelInfo

WARP = 32
OUTLINE_FAILED = "iteration outlining cannot be performed"


class _EmptyIntersection:
    """Returned by :func:`t_control` when no block size suits every kernel."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "EmptyIntersection"

    def __bool__(self) -> bool:
        return False


EmptyIntersection = _EmptyIntersection()


def intersect(constraints: Iterable[BlockConstraint]) -> Optional[tuple[int, int]]:
    lo, hi = 1, MAX_BLOCK
    for c in constraints:
        a, b = c.domain()
        lo, hi = max(lo, a), min(hi, b)
    return (lo, hi) if lo <= hi else None


def t_control(constraints: Iterable[BlockConstraint]) -> Union[int, _EmptyIntersection]:
    """Highest block size admissible to every constraint."""
    constraints = list(constraints)
    if not constraints:
        raise ValueError("t_control needs at least one constraint")
    iv = intersect(constraints)
    return EmptyIntersection if iv is None else iv[1]


@dataclass(frozen=True)
class FixedFromSM:
    multiplier: int

    def grid(self, sm_count: int) -> int:
        return sm_count * self.multiplier

    def __str__(self) -> str:
        return f"FixedFromSM({self.multiplier})"


@dataclass(frozen=True)
class OccupancyCapped:
    def __str__(self) -> str:
        return "OccupancyCapped"


GridPolicy = Union[FixedFromSM, OccupancyCapped]


@dataclass(frozen=True)
class PlanConfig:
    sm_count: int = 8
    blocks_per_sm: int = 8
    # kernel name -> requested block size
    block_sizes: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class LaunchPlan:
    kernel: str
    grid_size_policy: GridPolicy
    block_size: int
    outlined: bool = False

    def grid_size(self, config: PlanConfig) -> Optional[int]:
        """Static grid size, or None when computed at run time."""
        if isinstance(self.grid_size_policy, FixedFromSM):
            return self.grid_size_policy.grid(config.sm_count)
        return None


def grid_policy(info: KernelInfo, config: PlanConfig) -> GridPolicy:
    if info.uses_barrier:
        return OccupancyCapped()
    return FixedFromSM(config.blocks_per_sm)


def plan_launch(info: KernelInfo, pipe_membership: Optional[list[KernelInfo]] = None,
                config: Optional[PlanConfig] = None) -> LaunchPlan:
    """Plan one kernel's launch.

    With ``pipe_membership`` the kernel is the member of an outlined pipe
    and gets the control block size of the whole pipe. Raises
    :class:`DiagnosticError` when an override violates the kernel's block
    constraint or the pipe's intersection is empty.
    """
    config = config or PlanConfig()
    if pipe_membership is not None:
        members = list(pipe_membership)
        if info not in members:
            members.append(info)
        bs = t_control(m.block_constraint for m in members)
        if bs is EmptyIntersection:
            names = ", ".join(m.kernel for m in members)
            raise DiagnosticError([error("outline-empty-intersection",
                                         f"{OUTLINE_FAILED}: no block size suits kernels {names}")])
        return LaunchPlan(info.kernel, OccupancyCapped(), bs, outlined=True)
    lo, hi = info.block_constraint.domain()
    bs = config.block_sizes.get(info.kernel, hi)
    if not lo <= bs <= hi:
        raise DiagnosticError([error("block-size-constraint",
                                     f"block size {bs} for kernel '{info.kernel}' is outside its "
                                     f"{info.block_constraint} domain [{lo}, {hi}]")])
    return LaunchPlan(info.kernel, grid_policy(info, config), bs)


def plan_module(analysis: Analysis, config: Optional[PlanConfig] = None
                ) -> tuple[dict[str, LaunchPlan], list[Diagnostic]]:
    """One plan per plain kernel, in module order."""
    config = config or PlanConfig()
    plans: dict[str, LaunchPlan] = {}
    diags: list[Diagnostic] = []
    for name, info in analysis.infos.items():
        if info.kind is not ast.KernelKind.PLAIN:
            continue
        try:
            plan = plan_launch(info, None, config)
        except DiagnosticError as exc:
            diags.extend(exc.diagnostics)
            continue
        if plan.block_size % WARP:
            diags.append(warning("block-size-warp",
                                 f"block size {plan.block_size} for kernel '{name}' is not a multiple of {WARP}"))
        plans[name] = plan
    return plans, diags


def format_plans(plans: dict[str, LaunchPlan], config: PlanConfig,
                 infos: Optional[dict[str, KernelInfo]] = None) -> str:
    rows = [("kernel", "constraint", "block", "grid", "policy", "launch")]
    for name, p in plans.items():
        grid = p.grid_size(config)
        constraint = str(infos[name].block_constraint) if infos else "-"
        rows.append((name, constraint, str(p.block_size), "occupancy" if grid is None else str(grid),
                     str(p.grid_size_policy), "control" if p.outlined else "host"))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows) + "\n"
