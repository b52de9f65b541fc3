"""Compare the two-loop validity search with a four-loop brute force and sample
the context bound on seeded random graphs.

Run from the repository root:  python3 demos/random_graphs.py [count]
"""
from __future__ import annotations

import argparse
import random

from tamgram.testing import exhaustive_valid, random_cfg, random_walk


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("count", type=int, nargs="?", default=200)
    ap.add_argument("--walks", type=int, default=50)
    args = ap.parse_args()
    agree = invalid = checks = within = 0
    for seed in range(args.count):
        rng = random.Random(seed)
        c = random_cfg(rng)
        cf = c.flow()
        two = cf.first_violation([c.root]) is None
        four = exhaustive_valid(c.usage, c.succ, [c.root], loops=4)
        agree += two == four
        invalid += not four
        table = cf.context_table()
        for _ in range(args.walks):
            w = random_walk(rng, c)
            checks += 1
            within += cf.ctx_r(cf.make_trace(frozenset(), w)) <= table.maxR[w[0]]
    print(f"validity agreement: {agree}/{args.count} ({invalid} graphs invalid)")
    print(f"context bound:      {within}/{checks}")


if __name__ == "__main__":
    main()
