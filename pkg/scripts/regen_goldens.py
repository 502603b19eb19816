"""Regenerate tests/golden/*.cu from the bundled corpus.

Usage: python3 scripts/regen_goldens.py [--check]

With --check nothing is written; the exit status is 1 when any golden
file differs from what the compiler emits now.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from irgl import corpus
from irgl.codegen import EmitContext, EmitOptions, emit_module
from irgl.frontend import parse_file

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"
VARIANTS = {"": EmitOptions(), ".outline": EmitOptions(outline=True)}


def render(name: str, options: EmitOptions) -> str:
    module = parse_file(str(corpus.path(name)))
    return emit_module(EmitContext.build(module, options))


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--check", action="store_true", help="compare instead of writing")
    args = p.parse_args(argv)
    GOLDEN.mkdir(parents=True, exist_ok=True)
    stale = []
    for name in corpus.NAMES:
        for suffix, options in VARIANTS.items():
            path = GOLDEN / f"{name}{suffix}.cu"
            text = render(name, options)
            if args.check:
                if not path.exists() or path.read_text() != text:
                    stale.append(path.name)
            else:
                path.write_text(text)
                print(f"wrote {path.relative_to(GOLDEN.parent.parent)}")
    if stale:
        print("stale golden files: " + ", ".join(stale), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
