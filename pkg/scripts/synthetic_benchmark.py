"""Seed-averaged ROUGE-1 of random selection, LexRank and the model on synthetic corpora.

    python3 scripts/synthetic_benchmark.py --seeds 5 --variant default
    python3 scripts/synthetic_benchmark.py --variant position --flag no_position
"""

import argparse
import json
import time

from gaeisumm.benchmark import run_synthetic, seed_average


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--variant", choices=["default", "position", "multitopic"], default="default")
    ap.add_argument("--flag", action="append", default=[],
                    help="boolean RunConfig field to switch on, e.g. no_clustering")
    ap.add_argument("--json", action="store_true", help="print the averages as JSON only")
    args = ap.parse_args(argv)

    overrides = {f: True for f in args.flag}
    rows = []
    for seed in range(args.seeds):
        t0 = time.perf_counter()
        row = run_synthetic(seed, args.variant, **overrides)
        rows.append(row)
        if not args.json:
            print(f"seed {seed}: random {row.random_r1:.4f}  lexrank {row.lexrank_r1:.4f}  "
                  f"model {row.model_r1:.4f}  topic hits {row.topic_hits}/{row.topic_total}  "
                  f"({time.perf_counter() - t0:.1f}s)", flush=True)
    avg = seed_average(rows)
    if args.json:
        print(json.dumps({"variant": args.variant, "flags": args.flag, **avg}))
    else:
        print("mean: " + "  ".join(f"{k} {v:.4f}" for k, v in avg.items()))


if __name__ == "__main__":
    main()
