"""Compare `run` emissions against the stream oracle on many random closed circuits.

    python scripts/differential.py --count 5000 --ticks 5 --seed 1
"""
import argparse
import collections
import pathlib
import random
import sys
import time

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "tests"))

from circuit_gen import GenConfig, random_closed  # noqa: E402
from diagcirc.lattice import builtin_signature  # noqa: E402
from diagcirc.oracle import simulate, ticks_of  # noqa: E402
from diagcirc.rewrite import run  # noqa: E402
from diagcirc.term import pretty  # noqa: E402
from diagcirc.tfpg import from_term  # noqa: E402


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--count", type=int, default=1000)
    ap.add_argument("--ticks", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-gates", type=int, default=10)
    args = ap.parse_args()

    sig = builtin_signature("bool4")
    rng = random.Random(args.seed)
    cfg = GenConfig(max_gates=args.max_gates)
    verdicts = collections.Counter()
    bad = 0
    t0 = time.perf_counter()
    for _ in range(args.count):
        term = random_closed(rng, sig, cfg)
        g = from_term(term)
        r = run(g, sig, args.ticks)
        verdicts[r.verdict_text] += 1
        want = ticks_of(simulate(g, sig, [], args.ticks))
        if r.emitted != want[:len(r.emitted)]:
            bad += 1
            print("mismatch:", pretty(term, sig))
    took = time.perf_counter() - t0
    print(f"{args.count} circuits in {took:.2f} s, mismatches {bad}")
    for k, v in verdicts.most_common():
        print(f"  {k}: {v}")
    sys.exit(1 if bad else 0)


if __name__ == "__main__":
    main()
