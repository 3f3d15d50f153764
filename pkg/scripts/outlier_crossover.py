"""How large can activation outliers get before rotation stops paying off?

For a single outlier channel of growing multiplier, counts the seeds on which
4-bit per-tensor quantization with Hadamard rotation yields a lower
attention-logit MSE than without, and reports median top-8 overlap.
"""
import argparse
from dataclasses import replace

import numpy as np

from sqap.attention import Regime, distortion_metrics
from sqap.harness import HarnessConfig, evaluate_scene
from sqap.harness.pipeline import trial_spec


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--seeds", type=int, default=40)
    p.add_argument("--d-model", type=int, default=512)
    p.add_argument("--multipliers", type=float, nargs="+", default=[10, 25, 50, 75, 100, 150])
    args = p.parse_args()

    base = HarnessConfig()
    print(f"d_model={args.d_model}")
    print(f"{'mult':>6} {'hadamard wins':>14} {'jac naive':>10} {'jac hadamard':>13}")
    for mult in args.multipliers:
        scene = replace(base.scene, outlier_channels=((3, mult),), d_model=args.d_model)
        cfg = replace(base, scene=scene)
        wins, jn, jh = 0, [], []
        for i in range(args.seeds):
            ev = evaluate_scene(trial_spec(cfg, i), cfg)
            fp = ev.logits[Regime.FULL_PRECISION]
            mse = {r: np.mean((ev.logits[r] - fp) ** 2) for r in (Regime.QUANT_NAIVE, Regime.QUANT_HADAMARD)}
            wins += mse[Regime.QUANT_HADAMARD] < mse[Regime.QUANT_NAIVE]
            fa = ev.attention(Regime.FULL_PRECISION)
            jn.append(distortion_metrics(fa, ev.attention(Regime.QUANT_NAIVE), 8)["topk_jaccard"])
            jh.append(distortion_metrics(fa, ev.attention(Regime.QUANT_HADAMARD), 8)["topk_jaccard"])
        print(f"{mult:6.0f} {wins:>9d}/{args.seeds:<4d} {np.median(jn):10.3f} {np.median(jh):13.3f}")


if __name__ == "__main__":
    main()
