"""Ablation table on the synthetic corpora: each flag switched off in turn.

    python3 scripts/ablations.py --seeds 3 --variant position
"""

import argparse

from gaeisumm.benchmark import run_synthetic, seed_average

ROWS = [None, "no_clustering", "no_position", "no_gae_sent", "no_gae_doc"]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--variant", choices=["default", "position", "multitopic"], default="default")
    args = ap.parse_args(argv)

    full = None
    print(f"{'configuration':<16} {'R-1':>8} {'change':>9}")
    for flag in ROWS:
        overrides = {flag: True} if flag else {}
        avg = seed_average([run_synthetic(s, args.variant, **overrides)
                            for s in range(args.seeds)])
        r1 = avg["model_r1"]
        if full is None:
            full = r1
        change = "" if flag is None else f"{(r1 - full) / full:+.1%}"
        print(f"{flag or 'full model':<16} {r1:8.4f} {change:>9}", flush=True)
    print(f"{'lexrank':<16} {avg['lexrank_r1']:8.4f}")
    print(f"{'random':<16} {avg['random_r1']:8.4f}")


if __name__ == "__main__":
    main()
