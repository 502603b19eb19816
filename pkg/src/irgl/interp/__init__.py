"""Reference interpreter: runs IrGL on a simulated bulk-synchronous machine."""

from irgl.interp.machine import (
    ExclusiveRecord,
    Machine,
    SimConfig,
    SimulatedDeadlock,
    SimulationLimit,
    Stats,
    UniformityError,
    format_bindings,
    run_host,
)
from irgl.interp.values import INF, Graph, SimError, format_value, load_graph, parse_graph, parse_value
from irgl.interp.worklist import PipeState, Worklist, WorklistOverflow

__all__ = [
    "INF", "ExclusiveRecord", "Graph", "Machine", "PipeState", "SimConfig", "SimError",
    "SimulatedDeadlock", "SimulationLimit", "Stats", "UniformityError", "Worklist",
    "WorklistOverflow", "format_bindings", "format_value", "load_graph", "parse_graph",
    "parse_value", "run_host",
]
