"""End-to-end runs: scene -> attention -> pruning -> metrics -> BOPs."""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from ..attention import AttentionConfig, AttentionVector, Regime, attention_logits, distortion_metrics, softmax
from ..efficiency import FULL_BITS, speedup_decomposition
from ..errors import SqapError
from ..numerics import derive_seed
from ..pruner import Ablation, PruneConfig, prune_tokens
from .config import HarnessConfig, with_ratio
from .io import rows_to_csv
from .scene import SceneSpec, generate_scene, scene_weights

log = logging.getLogger(__name__)


@dataclass
class RunRecord:
    seed: int
    regime: str
    ratio: float
    ablation: str
    topk_jaccard: float = float("nan")
    rank_corr: float = float("nan")
    entropy_delta: float = float("nan")
    logit_mse: float = float("nan")
    n_attn: int = 0
    n_ring: int = 0
    n_fps: int = 0
    n_final: int = 0
    salient_kept: float = float("nan")
    robot_kept: bool | None = None
    bops_fraction: float = float("nan")
    bops_speedup: float = float("nan")
    error: str = ""

    @classmethod
    def columns(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def as_row(self) -> dict:
        return asdict(self)

    @classmethod
    def from_row(cls, row: dict[str, str]) -> RunRecord:
        kw = {}
        for f in fields(cls):
            v = row[f.name]
            if f.name in ("regime", "ablation", "error"):
                kw[f.name] = v
            elif f.name == "robot_kept":
                kw[f.name] = None if v == "" else bool(int(v))
            elif f.name in ("seed", "n_attn", "n_ring", "n_fps", "n_final"):
                kw[f.name] = int(v)
            else:
                kw[f.name] = float(v)
        return cls(**kw)


@dataclass(frozen=True, eq=False)
class SceneEval:
    """Attention logits of one scene under each requested regime."""

    spec: SceneSpec
    logits: dict[Regime, np.ndarray]
    salient: tuple[int, ...]

    def attention(self, regime: Regime) -> AttentionVector:
        return AttentionVector(softmax(self.logits[Regime(regime)]))


def evaluate_scene(spec: SceneSpec, cfg: HarnessConfig, regimes=tuple(Regime)) -> SceneEval:
    x, truth = generate_scene(spec)
    wq, wk = scene_weights(spec)
    spec_w, spec_a = cfg.quant.specs()
    d, n = spec.d_model, spec.n_visual
    logits = {}
    for r in {Regime.FULL_PRECISION, *map(Regime, regimes)}:
        acfg = AttentionConfig(d, n, r, spec_w, spec_a)
        logits[r] = attention_logits(wq, wk, x, acfg)
    return SceneEval(spec, logits, truth.salient)


def _bits(regime: Regime, cfg: HarnessConfig) -> tuple[int, int]:
    if regime is Regime.FULL_PRECISION:
        return FULL_BITS, FULL_BITS
    return cfg.quant.bits_w, cfg.quant.bits_a


def make_record(ev: SceneEval, regime, prune: PruneConfig, cfg: HarnessConfig, ablation=None) -> RunRecord:
    regime = Regime(regime)
    ablation = Ablation(ablation or cfg.ablation)
    rec = RunRecord(ev.spec.seed, regime.value, prune.ratio, ablation.value)
    fp = ev.attention(Regime.FULL_PRECISION)
    aq = ev.attention(regime)
    m = distortion_metrics(fp, aq, cfg.metric_k)
    rec.topk_jaccard, rec.rank_corr, rec.entropy_delta = m["topk_jaccard"], m["rank_corr"], m["entropy_delta"]
    rec.logit_mse = float(np.mean((ev.logits[regime] - ev.logits[Regime.FULL_PRECISION]) ** 2))

    res = prune_tokens(aq, ev.spec.camera, ev.spec.grid, prune, ablation)
    rec.n_attn, rec.n_ring, rec.n_fps, rec.n_final = map(
        len, (res.attn_set, res.ring_set, res.fps_set, res.final_set)
    )
    if ev.salient:
        rec.salient_kept = sum(i in res.final_set for i in ev.salient) / len(ev.salient)
    if res.ring_set:
        rec.robot_kept = res.ring_set <= res.final_set

    bops = speedup_decomposition(cfg.model, prune.ratio, *_bits(regime, cfg))
    rec.bops_fraction = bops.combined_ratio
    rec.bops_speedup = bops.combined_speedup
    return rec


def run_pipeline(scene: SceneSpec, regime, cfg: HarnessConfig, prune: PruneConfig | None = None,
                 ablation=None) -> RunRecord:
    """One scene through one regime; failures land in ``RunRecord.error``."""
    prune = prune or cfg.prune
    try:
        ev = evaluate_scene(scene, cfg, (Regime(regime),))
        return make_record(ev, regime, prune, cfg, ablation)
    except SqapError as exc:
        log.warning("seed %d failed: %s", scene.seed, exc)
        return RunRecord(scene.seed, Regime(regime).value, prune.ratio,
                         Ablation(ablation or cfg.ablation).value, error=f"{type(exc).__name__}: {exc}")


def trial_spec(cfg: HarnessConfig, index: int) -> SceneSpec:
    return replace(cfg.scene, seed=derive_seed(cfg.scene.seed, index))


def _trial_records(cfg: HarnessConfig, index: int, ratios, regimes) -> list[tuple[tuple, RunRecord]]:
    spec = trial_spec(cfg, index)
    out = []
    try:
        ev = evaluate_scene(spec, cfg, regimes)
    except SqapError as exc:
        ev, err = None, f"{type(exc).__name__}: {exc}"
    for ri, ratio in enumerate(ratios):
        prune = with_ratio(cfg, ratio).prune
        for gi, regime in enumerate(regimes):
            if ev is None:
                rec = RunRecord(spec.seed, Regime(regime).value, ratio, cfg.ablation.value, error=err)
            else:
                try:
                    rec = make_record(ev, regime, prune, cfg)
                except SqapError as exc:
                    rec = RunRecord(spec.seed, Regime(regime).value, ratio, cfg.ablation.value,
                                    error=f"{type(exc).__name__}: {exc}")
            out.append(((ri, index, gi), rec))
    return out


def sweep_records(cfg: HarnessConfig, ratios=None, seeds: int | None = None, regimes=None,
                  workers: int | None = None) -> list[RunRecord]:
    """Records ordered by (ratio, trial, regime), identical for any worker count."""
    ratios = tuple(cfg.sweep.ratios if ratios is None else ratios)
    seeds = cfg.sweep.seeds if seeds is None else seeds
    regimes = tuple(Regime(r) for r in (cfg.sweep.regimes if regimes is None else regimes))
    workers = workers or cfg.sweep.workers
    if any(not 0.0 < r < 1.0 for r in ratios):
        raise ValueError("sweep ratios must lie in (0, 1)")

    def job(i):
        return _trial_records(cfg, i, ratios, regimes)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            chunks = list(pool.map(job, range(seeds)))
    else:
        chunks = [job(i) for i in range(seeds)]
    keyed = [item for chunk in chunks for item in chunk]
    keyed.sort(key=lambda kv: kv[0])
    return [rec for _, rec in keyed]


def records_csv(records: list[RunRecord]) -> str:
    return rows_to_csv(RunRecord.columns(), [r.as_row() for r in records])


def sweep(cfg: HarnessConfig, out_path, ratios=None, seeds: int | None = None, regimes=None,
          workers: int | None = None) -> Path:
    out = Path(out_path)
    with out.open("w", newline="") as f:  # fail on a bad path before computing
        f.write(records_csv(sweep_records(cfg, ratios, seeds, regimes, workers)))
    return out
