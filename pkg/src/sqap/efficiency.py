"""Bit-operation (BOPs) accounting for the LLM prefill pass.

A matmul of shapes ``(m, k) @ (k, n)`` costs ``m*k*n`` MACs; its BOPs are
MACs times the bit widths of the two operands.  Weight-activation products
use ``bits_w * bits_a``; the activation-activation products of attention
(scores and values) use ``bits_a * bits_a``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .pruner import retain_count

FULL_BITS = 16


@dataclass(frozen=True)
class ModelDims:
    d_model: int = 512
    n_layers: int = 8
    d_ff: int = 2048
    n_text_tokens: int = 44
    n_visual_tokens: int = 256

    def __post_init__(self):
        for name in ("d_model", "n_layers", "d_ff", "n_text_tokens", "n_visual_tokens"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def seq_len(self, ratio: float = 0.0) -> int:
        return self.n_text_tokens + retain_count(ratio, self.n_visual_tokens)


def matmul_bops(m: int, k: int, n: int, bits_w: int, bits_a: int) -> int:
    if min(m, k, n, bits_w, bits_a) <= 0:
        raise ValueError("matmul dims and bit widths must be positive")
    # Python ints are arbitrary precision, so no overflow guard is needed
    return int(m) * int(k) * int(n) * int(bits_w) * int(bits_a)


def layer_terms(dims: ModelDims, seq_len: int, bits_w: int, bits_a: int) -> dict[str, int]:
    s, d = seq_len, dims.d_model
    return {
        "qkvo": 4 * matmul_bops(s, d, d, bits_w, bits_a),
        "attention": 2 * matmul_bops(s, d, s, bits_a, bits_a),
        "ffn": 2 * matmul_bops(s, d, dims.d_ff, bits_w, bits_a),
    }


def prefill_bops(dims: ModelDims, seq_len: int, bits_w: int, bits_a: int) -> int:
    if seq_len <= 0:
        raise ValueError("seq_len must be positive")
    return dims.n_layers * sum(layer_terms(dims, seq_len, bits_w, bits_a).values())


@dataclass(frozen=True)
class BopsReport:
    baseline_bops: int
    quantized_bops: int
    pruned_bops: int
    combined_bops: int

    @property
    def quant_ratio(self) -> float:
        return self.quantized_bops / self.baseline_bops

    @property
    def prune_ratio(self) -> float:
        return self.pruned_bops / self.baseline_bops

    @property
    def combined_ratio(self) -> float:
        return self.combined_bops / self.baseline_bops

    @property
    def quant_speedup(self) -> float:
        return self.baseline_bops / self.quantized_bops

    @property
    def prune_speedup(self) -> float:
        return self.baseline_bops / self.pruned_bops

    @property
    def combined_speedup(self) -> float:
        return self.baseline_bops / self.combined_bops

    def as_dict(self) -> dict:
        out = {
            "baseline_bops": self.baseline_bops,
            "quantized_bops": self.quantized_bops,
            "pruned_bops": self.pruned_bops,
            "combined_bops": self.combined_bops,
        }
        for name in ("quant", "prune", "combined"):
            out[f"{name}_ratio"] = getattr(self, f"{name}_ratio")
            out[f"{name}_speedup"] = getattr(self, f"{name}_speedup")
        return out


def speedup_decomposition(dims: ModelDims, ratio: float, bits_w: int, bits_a: int) -> BopsReport:
    """Split the prefill cost reduction into its quantization and pruning factors.

    With ``bits_w == bits_a`` every term scales by the same bit factor, so the
    combined ratio is exactly the product of the two separate ratios.
    """
    if not 0.0 <= ratio < 1.0:
        raise ValueError(f"ratio must lie in [0, 1), got {ratio}")
    full, pruned = dims.seq_len(0.0), dims.seq_len(ratio)
    return BopsReport(
        baseline_bops=prefill_bops(dims, full, FULL_BITS, FULL_BITS),
        quantized_bops=prefill_bops(dims, full, bits_w, bits_a),
        pruned_bops=prefill_bops(dims, pruned, FULL_BITS, FULL_BITS),
        combined_bops=prefill_bops(dims, pruned, bits_w, bits_a),
    )
