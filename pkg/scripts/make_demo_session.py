#!/usr/bin/env python3
"""Build a ready-to-serve demo session from any labeled JSONL/CSV dataset.

Runs the whole pipeline: ingest, augment with provenance, score, and write a
stub guidance rules file, then prints the serve command to try it out.

Usage:
  python3 scripts/make_demo_session.py --input tests/data/corpus100.jsonl \
      --output /tmp/demo-session --per-original 2 --seed 42
"""

import argparse
import sys
from pathlib import Path

from auginspect.cli import main as cli_main

STUB_RULES = """\
# Demo guidance rules: first matching substring wins.
dull => negative
boring => negative
mess => negative
awful => negative
not => negative
beautiful => positive
great => positive
warm => positive
* => positive
"""


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--input", required=True)
    parser.add_argument("--output", required=True)
    parser.add_argument("--per-original", type=int, default=2)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--folds", type=int, default=4)
    args = parser.parse_args()

    code = cli_main([
        "augment", "--input", args.input, "--output", args.output,
        "--per-original", str(args.per_original), "--seed", str(args.seed),
    ])
    if code != 0:
        return code
    code = cli_main(["score", "--data", args.output, "--folds", str(args.folds)])
    if code != 0:
        return code
    cli_main(["report", "--data", args.output])

    rules = Path(args.output) / "stub_rules.txt"
    rules.write_text(STUB_RULES, "utf-8")
    print()
    print("session ready. start the API with:")
    print(f"  auginspect serve --data {args.output} --port 8008 --llm stub:{rules}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
