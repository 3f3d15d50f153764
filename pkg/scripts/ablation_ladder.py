"""Strategy ladder at a fixed token budget: attention only, + robot ring, + FPS fill.

Reports, per regime and ladder step, how many planted salient tokens and
robot-ring tokens survive pruning and how evenly the kept tokens cover the
grid (fraction of 4x4 blocks holding at least one token).
"""
import argparse

import numpy as np

from sqap.attention import Regime
from sqap.harness import evaluate_scene, load_config
from sqap.harness.pipeline import trial_spec
from sqap.pruner import Ablation, prune_tokens, robot_ring


def block_coverage(mask, grid, block=4):
    m = mask.reshape(grid.grid_h, grid.grid_w)
    cells = [m[r:r + block, c:c + block].any() for r in range(0, grid.grid_h, block) for c in range(0, grid.grid_w, block)]
    return float(np.mean(cells))


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--config", default="configs/default.json")
    p.add_argument("--seeds", type=int, default=50)
    args = p.parse_args()
    cfg = load_config(args.config)

    stats = {}
    for i in range(args.seeds):
        ev = evaluate_scene(trial_spec(cfg, i), cfg)
        grid, cam = ev.spec.grid, ev.spec.camera
        ring = robot_ring(cam, grid, cfg.prune) or frozenset()
        for regime in Regime:
            for ab in Ablation:
                res = prune_tokens(ev.attention(regime), cam, grid, cfg.prune, ab)
                s = stats.setdefault((regime, ab), [[], [], [], []])
                s[0].append(np.mean([t in res.final_set for t in ev.salient]))
                s[1].append(len(ring & res.final_set) / len(ring) if ring else np.nan)
                s[2].append(block_coverage(res.mask(grid.n_tokens), grid))
                s[3].append(len(res.final_set))

    print(f"ratio={cfg.prune.ratio}  seeds={args.seeds}")
    print(f"{'regime':>9} {'step':>10} {'kept':>5} {'salient':>8} {'ring':>6} {'coverage':>9}")
    for (regime, ab), (sal, ring, cov, size) in stats.items():
        print(f"{regime.value:>9} {ab.value:>10} {int(np.median(size)):5d} {np.mean(sal):8.3f} "
              f"{np.nanmean(ring):6.3f} {np.mean(cov):9.3f}")


if __name__ == "__main__":
    main()
