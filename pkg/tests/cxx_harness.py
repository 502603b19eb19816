"""Type-check, and for barrier-free programs run, emitted CUDA text with a
host C++ compiler and the stand-in runtime in data/cuda_shim.

Launches become sequential loops over every block and thread (threads in
descending order), which is a faithful schedule only for kernels that
never wait on each other.
"""

from __future__ import annotations

import re
import shutil
import subprocess
from pathlib import Path
from typing import Optional

SHIM = Path(__file__).parent / "data" / "cuda_shim"
CXX = shutil.which("g++") or shutil.which("clang++")
FLAGS = ["-std=c++17", "-Wall", "-Wno-unused-variable", "-Wno-unused-label", "-Wno-unused-function",
         "-Wno-unused-but-set-variable", f"-I{SHIM}"]

_LAUNCH = re.compile(r"([A-Za-z_]\w*(?:<[^<>;]*>)?)<<<([^,]+), ([^>]+)>>>\((.*)\);")


def _sequential_launch(m: re.Match) -> str:
    fn, grid, block, args = m.groups()
    return (f"for (unsigned irgl_b = 0; irgl_b < (unsigned)({grid}); irgl_b++) {{ "
            f"irgl_shim_block_start(); "
            f"for (unsigned irgl_t = (unsigned)({block}); irgl_t-- > 0;) {{ "
            f"gridDim.x = {grid}; blockDim.x = {block}; blockIdx.x = irgl_b; threadIdx.x = irgl_t; "
            f"{fn}({args}); }} }}")


def host_source(cu_text: str, driver: str = "") -> str:
    return _LAUNCH.sub(_sequential_launch, cu_text) + "\n" + driver


def syntax_check(cu_text: str, workdir: Path) -> Optional[str]:
    """None when the text type-checks, else the compiler's message."""
    src = workdir / "unit.cpp"
    src.write_text(host_source(cu_text))
    proc = subprocess.run([CXX, *FLAGS, "-fsyntax-only", str(src)], capture_output=True, text=True)
    return None if proc.returncode == 0 else proc.stderr


def build_and_run(cu_text: str, driver: str, workdir: Path) -> str:
    src = workdir / "prog.cpp"
    exe = workdir / "prog"
    src.write_text(host_source(cu_text, driver))
    proc = subprocess.run([CXX, *FLAGS, "-O1", "-o", str(exe), str(src)], capture_output=True, text=True)
    if proc.returncode != 0:
        raise AssertionError(proc.stderr)
    return subprocess.run([str(exe)], capture_output=True, text=True, check=True, timeout=60).stdout


def graph_setup(name: str, n: int, edges: list[tuple]) -> str:
    """C++ statements filling a managed CSR graph global, both directions."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for e in edges:
        w = e[2] if len(e) > 2 else 1
        adj[e[0]].append((e[1], w))
        adj[e[1]].append((e[0], w))
    rows, dst, src, wt = [0], [], [], []
    for u in range(n):
        for v, w in adj[u]:
            dst.append(v)
            src.append(u)
            wt.append(w)
        rows.append(len(dst))

    def arr(field: str, values: list[int]) -> list[str]:
        lines = [f"IRGL_CHECK(cudaMallocManaged(&{name}.{field}, {max(1, len(values))} * sizeof(long long)));"]
        lines += [f"{name}.{field}[{i}] = {v};" for i, v in enumerate(values)]
        return lines

    out = [f"{name}.nnodes = {n};", f"{name}.nedges = {len(dst)};"]
    out += arr("row_start", rows) + arr("edge_dst", dst) + arr("edge_src", src) + arr("edge_wt", wt)
    return "\n  ".join(out)
