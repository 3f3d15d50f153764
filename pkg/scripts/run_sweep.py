"""Pruning-ratio sweep over the synthetic suite, summarized per (ratio, regime).

    python scripts/run_sweep.py --config configs/default.json --out sweep.csv
"""
import argparse
import statistics
from collections import defaultdict

from sqap.harness import load_config, sweep
from sqap.harness.io import read_csv


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--config", default="configs/default.json")
    p.add_argument("--out", default="sweep.csv")
    p.add_argument("--seeds", type=int, default=None)
    p.add_argument("--workers", type=int, default=4)
    args = p.parse_args()

    cfg = load_config(args.config)
    sweep(cfg, args.out, seeds=args.seeds, workers=args.workers)
    groups = defaultdict(list)
    for row in read_csv(args.out):
        if not row["error"]:
            groups[(row["ratio"], row["regime"])].append(row)

    print(f"{'ratio':>5} {'regime':>9} {'jaccard@k':>9} {'rank_corr':>9} {'salient kept':>12} {'BOPs %':>7}")
    for (ratio, regime), rows in groups.items():
        med = lambda key: statistics.median(float(r[key]) for r in rows)
        print(f"{ratio:>5} {regime:>9} {med('topk_jaccard'):9.3f} {med('rank_corr'):9.3f} "
              f"{statistics.mean(float(r['salient_kept']) for r in rows):12.3f} {100 * med('bops_fraction'):7.2f}")


if __name__ == "__main__":
    main()
