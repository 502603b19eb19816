"""Runtime values: graphs, node and edge references, value parsing and
printing."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Optional

from irgl.diagnostics import IrglError

INF = 2**63 - 1


class SimError(IrglError):
    """Runtime failure inside the simulated machine."""


class NodeRef(int):
    """A node id that remembers its graph, so ``n.level`` and ``e.dst`` work."""

    def __new__(cls, value: int, graph: "Graph"):
        obj = super().__new__(cls, value)
        obj.graph = graph
        return obj

    def __repr__(self) -> str:
        return int.__repr__(self)

    __str__ = __repr__


class EdgeRef(int):
    """An edge id (CSR position) that remembers its graph."""

    def __new__(cls, value: int, graph: "Graph"):
        obj = super().__new__(cls, value)
        obj.graph = graph
        return obj

    def __repr__(self) -> str:
        return int.__repr__(self)

    __str__ = __repr__


@dataclass(eq=False)
class Graph:
    """A directed graph in CSR form. Edge ids are CSR positions."""

    nnodes: int
    row_offsets: list[int]
    col: list[int]
    weights: list[int]
    edge_src: list[int] = field(repr=False, default_factory=list)

    def __post_init__(self):
        if not self.edge_src:
            self.edge_src = [u for u in range(self.nnodes)
                             for _ in range(self.row_offsets[u], self.row_offsets[u + 1])]

    @property
    def nedges(self) -> int:
        return len(self.col)

    @classmethod
    def from_edges(cls, nnodes: int, edges: Iterable[tuple], symmetric: bool = True) -> "Graph":
        """Build a graph from ``(u, v)`` or ``(u, v, w)`` tuples.

        With ``symmetric`` every edge is also added in the reverse direction.
        Out-edges of a node keep their input order.
        """
        adj: list[list[tuple[int, int]]] = [[] for _ in range(nnodes)]
        for e in edges:
            u, v = int(e[0]), int(e[1])
            w = int(e[2]) if len(e) > 2 else 1
            for a, b in ((u, v), (v, u)) if symmetric and u != v else ((u, v),):
                if not (0 <= a < nnodes and 0 <= b < nnodes):
                    raise SimError(f"edge {u}-{v} refers to a node outside [0, {nnodes})")
                adj[a].append((b, w))
        offsets = [0]
        col: list[int] = []
        wts: list[int] = []
        for lst in adj:
            for b, w in lst:
                col.append(b)
                wts.append(w)
            offsets.append(len(col))
        return cls(nnodes, offsets, col, wts)

    def node(self, n: int) -> NodeRef:
        self.check_node(n)
        return NodeRef(n, self)

    def edge(self, e: int) -> EdgeRef:
        if not 0 <= e < len(self.col):
            raise SimError(f"edge id {e} out of range [0, {len(self.col)})")
        return EdgeRef(e, self)

    def check_node(self, n: int) -> None:
        if not 0 <= n < self.nnodes:
            raise SimError(f"node id {n} out of range [0, {self.nnodes})")

    def edges(self, n: int) -> list[EdgeRef]:
        self.check_node(n)
        return [EdgeRef(e, self) for e in range(self.row_offsets[n], self.row_offsets[n + 1])]

    def nodes(self) -> list[NodeRef]:
        return [NodeRef(n, self) for n in range(self.nnodes)]

    def neighbors(self, n: int) -> list[NodeRef]:
        self.check_node(n)
        return [NodeRef(self.col[e], self) for e in range(self.row_offsets[n], self.row_offsets[n + 1])]

    def degree(self, n: int) -> int:
        self.check_node(n)
        return self.row_offsets[n + 1] - self.row_offsets[n]

    def dst(self, e: int) -> NodeRef:
        return NodeRef(self.col[self.edge(e)], self)

    def src(self, e: int) -> NodeRef:
        return NodeRef(self.edge_src[self.edge(e)], self)

    def weight(self, e: int) -> int:
        return self.weights[self.edge(e)]


def parse_graph(text: str, symmetric: bool = True, name: str = "<graph>") -> Graph:
    """Parse ``N M`` followed by ``M`` lines of ``u v [w]``. ``#`` starts a comment."""
    lines = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            lines.append(line)
    if not lines:
        raise SimError(f"{name}: empty graph file")
    try:
        header = [int(x) for x in lines[0].split()]
        if len(header) != 2:
            raise ValueError
        n, m = header
        edges = []
        for line in lines[1:]:
            parts = [int(x) for x in line.split()]
            if len(parts) not in (2, 3):
                raise ValueError
            edges.append(tuple(parts))
    except ValueError:
        raise SimError(f"{name}: expected 'N M' header and 'u v [w]' edge lines") from None
    if len(edges) != m:
        raise SimError(f"{name}: header declares {m} edges but {len(edges)} were given")
    return Graph.from_edges(n, edges, symmetric)


def load_graph(path: str, symmetric: bool = True) -> Graph:
    with open(path, encoding="utf-8") as f:
        return parse_graph(f.read(), symmetric, path)


def parse_value(text: str) -> Any:
    """Parse a command-line binding: int, float, bool, INF or a JSON list."""
    s = text.strip()
    if s in ("true", "false"):
        return s == "true"
    if s == "INF":
        return INF
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        pass
    try:
        v = json.loads(s.replace("INF", str(INF)))
    except json.JSONDecodeError:
        raise SimError(f"cannot parse value {text!r}") from None
    if not isinstance(v, list):
        raise SimError(f"cannot parse value {text!r}")
    return v


def format_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return "INF" if v == INF else str(int(v))
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return "[" + ", ".join(format_value(x) for x in v) + "]"
    if isinstance(v, Graph):
        return f"<graph nnodes={v.nnodes} nedges={v.nedges}>"
    if isinstance(v, str):
        return json.dumps(v)
    return repr(v)


def type_name(v: Any) -> str:
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, NodeRef):
        return "node"
    if isinstance(v, EdgeRef):
        return "edge"
    if isinstance(v, int):
        return "int"
    if isinstance(v, float):
        return "float"
    if isinstance(v, list):
        return "array"
    if isinstance(v, Graph):
        return "graph"
    return type(v).__name__


def check_param(name: str, tag: str, v: Any) -> Optional[str]:
    """Error message when ``v`` does not fit a parameter tag, else None."""
    ok = {
        "any": True,
        "int": isinstance(v, int) and not isinstance(v, bool),
        "float": isinstance(v, (int, float)) and not isinstance(v, bool),
        "bool": isinstance(v, bool),
        "array": isinstance(v, list),
        "farray": isinstance(v, list),
        "graph": isinstance(v, Graph),
    }[tag]
    return None if ok else f"parameter '{name}' expects {tag}, got {type_name(v)}"
