"""Fuzz the Exclusive protocol on the interpreter.

Usage: python3 scripts/exclusive_fuzz.py [--cases N] [--seeds N] [--seed N]

Each case gives up to 16 threads random lock sets over up to 8 locks and
runs tests/data/exclusive_fuzz.irgl under several schedule seeds. A case
fails when the winners' lock sets overlap, when nobody wins, or when the
winners differ from "each lock goes to its lowest claimant". Exit status
1 on any failure.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

from irgl.frontend import parse_file
from irgl.interp import Machine, SimConfig

PROGRAM = Path(__file__).resolve().parent.parent / "tests" / "data" / "exclusive_fuzz.irgl"


def expected_winners(claims: list[list[int]]) -> set[int]:
    owner: dict[int, int] = {}
    for t, locks in enumerate(claims):
        for lock in locks:
            owner.setdefault(lock, t)
    return {t for t, locks in enumerate(claims) if all(owner[lock] == t for lock in locks)}


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--cases", type=int, default=200)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--seed", type=int, default=0, help="seed for case generation")
    args = p.parse_args(argv)

    rng = random.Random(args.seed)
    module = parse_file(str(PROGRAM))
    failures = 0
    won_total = 0
    for case in range(args.cases):
        nlocks = rng.randint(1, 8)
        claims = [sorted(rng.sample(range(nlocks), rng.randint(1, min(3, nlocks))))
                  for _ in range(rng.randint(1, 16))]
        start = [0]
        for c in claims:
            start.append(start[-1] + len(c))
        bindings = dict(locks=[0] * nlocks, nthreads=len(claims), claims=sum(claims, []), start=start)
        expected = expected_winners(claims)
        for seed in range(args.seeds):
            m = Machine(module, SimConfig(resident_threads=16, schedule_seed=seed))
            won = {i for i, w in enumerate(m.run_host("main", dict(bindings))["won"]) if w}
            held = [lock for t in won for lock in claims[t]]
            if won != expected or not won or len(held) != len(set(held)):
                failures += 1
                print(f"case {case} seed {seed}: claims={claims} won={sorted(won)} "
                      f"expected={sorted(expected)}", file=sys.stderr)
            won_total += len(won)
    runs = args.cases * args.seeds
    print(f"runs={runs} mean winners={won_total / runs:.2f} failures={failures}")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
