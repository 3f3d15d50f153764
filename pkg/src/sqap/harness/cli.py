"""Command line entry point.

Exit codes: 0 success, 1 configuration error, 2 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict

from ..attention import Regime
from ..efficiency import speedup_decomposition
from ..errors import ConfigError, SqapError
from ..pruner import Ablation
from .config import load_config
from .io import emit_heatmap
from .pipeline import evaluate_scene, run_pipeline, sweep

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    rec = run_pipeline(cfg.scene, args.regime, cfg, ablation=args.ablation)
    print(json.dumps(rec.as_row(), indent=2))
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    out = sweep(cfg, args.out, workers=args.workers)
    print(f"wrote {out}")
    return EXIT_OK


def _cmd_heatmap(args) -> int:
    cfg = load_config(args.config)
    ev = evaluate_scene(cfg.scene, cfg, (args.regime,))
    emit_heatmap(ev.attention(args.regime), cfg.scene.grid, args.out)
    print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_bops(args) -> int:
    cfg = load_config(args.config)
    rep = speedup_decomposition(cfg.model, cfg.prune.ratio, cfg.quant.bits_w, cfg.quant.bits_a)
    out = {
        "model": asdict(cfg.model),
        "ratio": cfg.prune.ratio,
        "bits_w": cfg.quant.bits_w,
        "bits_a": cfg.quant.bits_a,
        **rep.as_dict(),
        "combined_percent_of_baseline": 100.0 * rep.combined_ratio,
    }
    print(json.dumps(out, indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sqap", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    regimes = [r.value for r in Regime]

    run = sub.add_parser("run", help="run one scene end to end and print its record")
    run.add_argument("--config", required=True)
    run.add_argument("--regime", choices=regimes, default=Regime.QUANT_HADAMARD.value)
    run.add_argument("--ablation", choices=[a.value for a in Ablation], default=None)
    run.set_defaults(func=_cmd_run)

    sw = sub.add_parser("sweep", help="pruning-ratio x seed x regime sweep to CSV")
    sw.add_argument("--config", required=True)
    sw.add_argument("--out", required=True)
    sw.add_argument("--workers", type=int, default=None)
    sw.set_defaults(func=_cmd_sweep)

    hm = sub.add_parser("heatmap", help="write the query attention map as a PGM")
    hm.add_argument("--config", required=True)
    hm.add_argument("--out", required=True)
    hm.add_argument("--regime", choices=regimes, required=True)
    hm.set_defaults(func=_cmd_heatmap)

    bo = sub.add_parser("bops", help="prefill BOPs decomposition for the configured model")
    bo.add_argument("--config", required=True)
    bo.set_defaults(func=_cmd_bops)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, SqapError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
