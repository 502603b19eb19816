from __future__ import annotations

from pathlib import Path

import pytest

from irgl import corpus
from irgl.frontend import parse_file, parse_source
from irgl.interp import Graph, Machine, SimConfig

TESTS = Path(__file__).parent
DATA = TESTS / "data"
GOLDEN = TESTS / "golden"
NEGATIVE = TESTS / "negative"


def corpus_module(name: str):
    return parse_file(str(corpus.path(name)))


def run(source_or_module, bindings=None, trace=False, entry="main", **config):
    """Run a program on the interpreter; returns (globals, machine)."""
    module = parse_source(source_or_module) if isinstance(source_or_module, str) else source_or_module
    m = Machine(module, SimConfig(**config), trace=trace)
    return m.run_host(entry, bindings or {}), m


def graph(n: int, edges, symmetric: bool = True) -> Graph:
    return Graph.from_edges(n, edges, symmetric)


@pytest.fixture(params=corpus.NAMES)
def corpus_name(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    import sys

    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.RESULTS[number])
