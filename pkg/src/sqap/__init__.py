"""Quantization-aware visual token pruning on a toy attention path.

Hadamard-rotated low-bit fake quantization of the query/key projections,
top-k attention preservation, a protected token ring around a projected
robot point, farthest-point fill, and a BOPs cost model for the prefill.
"""
from .attention import AttentionConfig, AttentionVector, Regime, compute_attention, distortion_metrics
from .efficiency import BopsReport, ModelDims, matmul_bops, prefill_bops, speedup_decomposition
from .numerics import build_hadamard, matmul, rotate_pair, transpose
from .pruner import (
    Ablation,
    CameraModel,
    PruneConfig,
    PruneResult,
    TokenCoord,
    TokenGrid,
    allocate_budget,
    fps_sample,
    project_world_to_token,
    prune_tokens,
    ring_tokens,
    topk_preserve,
)
from .quantizer import Granularity, QuantSpec, QuantizedTensor, Target, dequantize, fake_quant, quant_error_stats, quantize

__version__ = "0.1.0"
