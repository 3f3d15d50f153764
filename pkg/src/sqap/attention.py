"""Single-head toy attention producing the task-query attention row."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import spearmanr

from .errors import DimensionMismatch, LengthMismatch, NotPowerOfTwo
from .numerics import as_matrix, build_hadamard, is_power_of_two, rotate_pair, topk_indices
from .quantizer import QuantSpec, activation_spec, fake_quant, weight_spec


class Regime(str, enum.Enum):
    FULL_PRECISION = "fp"
    QUANT_NAIVE = "naive"
    QUANT_HADAMARD = "hadamard"


@dataclass(frozen=True)
class AttentionConfig:
    d_model: int
    n_visual: int
    regime: Regime = Regime.FULL_PRECISION
    quant_spec_w: QuantSpec = field(default_factory=weight_spec)
    quant_spec_a: QuantSpec = field(default_factory=activation_spec)
    query_index: int | None = None  # defaults to the column after the visual tokens

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime(self.regime))
        if self.n_visual < 4:
            raise ValueError(f"n_visual must be >= 4, got {self.n_visual}")
        if self.query_index is None:
            object.__setattr__(self, "query_index", self.n_visual)
        if self.query_index < self.n_visual:
            raise ValueError("query_index must point past the visual tokens")
        if self.regime is Regime.QUANT_HADAMARD and not is_power_of_two(self.d_model):
            raise NotPowerOfTwo(f"Hadamard regime needs a power-of-two d_model, got {self.d_model}")


@dataclass(frozen=True, eq=False)
class AttentionVector:
    scores: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        s = np.asarray(self.scores, dtype=np.float64)
        if s.ndim != 1:
            raise DimensionMismatch("attention scores must be 1-D")
        if self.normalized and (np.any(s < 0) or abs(s.sum() - 1.0) > 1e-9):
            raise ValueError("normalized attention must be non-negative and sum to 1")
        object.__setattr__(self, "scores", s)

    def __len__(self):
        return self.scores.size


def softmax(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    e = np.exp(z - z.max())
    return e / e.sum()


def _check_shapes(wq, wk, x, cfg: AttentionConfig):
    d = cfg.d_model
    if wq.shape != (d, d) or wk.shape != (d, d):
        raise DimensionMismatch(f"Wq/Wk must be {d}x{d}, got {wq.shape} and {wk.shape}")
    if x.shape[0] != d or x.shape[1] <= cfg.query_index:
        raise DimensionMismatch(f"X shape {x.shape} incompatible with d={d}, query column {cfg.query_index}")


def _prepare(wq, wk, x, cfg: AttentionConfig):
    """Apply the regime's rotation and fake quantization to the projection inputs."""
    if cfg.regime is Regime.FULL_PRECISION:
        return wq, wk, x
    if cfg.regime is Regime.QUANT_HADAMARD:
        h = build_hadamard(cfg.d_model)
        wq, _ = rotate_pair(wq, x, h)
        wk, x = rotate_pair(wk, x, h)
    return fake_quant(wq, cfg.quant_spec_w), fake_quant(wk, cfg.quant_spec_w), fake_quant(x, cfg.quant_spec_a)


def attention_logits(wq, wk, x, cfg: AttentionConfig) -> np.ndarray:
    """Scaled dot-product logits of the query token against every visual token."""
    wq, wk, x = as_matrix(wq, "Wq"), as_matrix(wk, "Wk"), as_matrix(x, "X")
    _check_shapes(wq, wk, x, cfg)
    wq, wk, x = _prepare(wq, wk, x, cfg)
    q = wq.T @ x[:, cfg.query_index]
    keys = wk.T @ x[:, : cfg.n_visual]
    return (q @ keys) / np.sqrt(cfg.d_model)


def compute_attention(wq, wk, x, cfg: AttentionConfig) -> AttentionVector:
    return AttentionVector(softmax(attention_logits(wq, wk, x, cfg)))


def entropy(p) -> float:
    p = np.asarray(p, dtype=np.float64)
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def topk_jaccard(a, b, k: int) -> float:
    sa = set(topk_indices(a, k).tolist())
    sb = set(topk_indices(b, k).tolist())
    return len(sa & sb) / len(sa | sb)


def rank_correlation(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if np.array_equal(a, b):
        return 1.0
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        return 0.0  # a constant vector carries no ranking
    return float(spearmanr(a, b).statistic)


def distortion_metrics(fp: AttentionVector, q: AttentionVector, k: int) -> dict[str, float]:
    """Top-k overlap, Spearman correlation and entropy change from ``fp`` to ``q``.

    A drop in ``topk_jaccard`` measures attention *shift*; a positive
    ``entropy_delta`` (nats) measures attention *scatter*.
    """
    if len(fp) != len(q):
        raise LengthMismatch(f"attention lengths differ: {len(fp)} vs {len(q)}")
    if not 1 <= k <= len(fp):
        raise ValueError(f"k must lie in [1, {len(fp)}], got {k}")
    return {
        "topk_jaccard": topk_jaccard(fp.scores, q.scores, k),
        "rank_corr": rank_correlation(fp.scores, q.scores),
        "entropy_delta": entropy(q.scores) - entropy(fp.scores),
    }
