#!/usr/bin/env python3
"""Time the augment + score pipeline at dataset sizes around the study scale.

Usage:
  python3 scripts/bench_scale.py --sizes 613 763 --seed 5
"""

import argparse
import random
import sys
import tempfile
import time
from pathlib import Path

from auginspect.cli import main as cli_main
from auginspect.corpus import Dataset, LabeledInstance, save_dataset

SUBJECTS = {
    "positive": ["the garden", "this song", "her painting", "the bakery", "our trip",
                 "the festival", "that novel", "the sunrise", "his speech", "the recipe"],
    "negative": ["the traffic", "this bill", "the delay", "that argument", "the leak",
                 "our printer", "the outage", "this queue", "the paperwork", "the noise"],
}
PREDICATES = {
    "positive": ["made everyone smile", "was a pure delight", "felt warm and alive",
                 "deserves real praise", "turned out wonderful", "kept us cheering"],
    "negative": ["ruined the afternoon", "was a complete mess", "kept getting worse",
                 "wasted three hours", "left everyone annoyed", "failed again today"],
}


def synth_dataset(n: int, seed: int) -> Dataset:
    rng = random.Random(seed)
    instances = []
    for i in range(n):
        label = "positive" if i % 2 == 0 else "negative"
        text = f"{rng.choice(SUBJECTS[label])} {rng.choice(PREDICATES[label])}"
        if rng.random() < 0.3:
            text += f" {rng.randrange(2, 99)} times"
        instances.append(LabeledInstance(f"{i:06d}", text, label))
    return Dataset("bench", ("negative", "positive"), tuple(instances))


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[613, 763])
    parser.add_argument("--per-original", type=int, default=1)
    parser.add_argument("--seed", type=int, default=5)
    args = parser.parse_args()

    for size in args.sizes:
        with tempfile.TemporaryDirectory() as tmp:
            tmp = Path(tmp)
            data = tmp / "bench.jsonl"
            save_dataset(synth_dataset(size, args.seed), data)
            session = tmp / "session"

            t0 = time.perf_counter()
            cli_main(["augment", "--input", str(data), "--output", str(session),
                      "--per-original", str(args.per_original), "--seed", str(args.seed)])
            t1 = time.perf_counter()
            cli_main(["score", "--data", str(session)])
            t2 = time.perf_counter()
            print(f"\nsize={size}: augment {t1 - t0:.2f}s, score {t2 - t1:.2f}s, "
                  f"total {t2 - t0:.2f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
