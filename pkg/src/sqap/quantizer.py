"""Symmetric uniform fake quantization.

Codes live on the sign-symmetric grid ``[-(2**(b-1) - 1), 2**(b-1) - 1]`` and
rounding is round-half-to-even (``numpy.rint``).  Group layout for a
``(channels, tokens)`` matrix:

* ``PER_TENSOR``  one scale for the whole matrix
* ``PER_CHANNEL`` one scale per row
* ``PER_TOKEN``   one scale per column (activations only)
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import GranularityMismatch
from .numerics import as_matrix


class Granularity(str, enum.Enum):
    PER_TENSOR = "per_tensor"
    PER_TOKEN = "per_token"
    PER_CHANNEL = "per_channel"


class Target(str, enum.Enum):
    WEIGHT = "weight"
    ACTIVATION = "activation"


@dataclass(frozen=True)
class QuantSpec:
    bits: int = 4
    granularity: Granularity = Granularity.PER_TENSOR
    target: Target = Target.ACTIVATION

    def __post_init__(self):
        object.__setattr__(self, "granularity", Granularity(self.granularity))
        object.__setattr__(self, "target", Target(self.target))
        if not isinstance(self.bits, (int, np.integer)) or not 2 <= self.bits <= 16:
            raise ValueError(f"bits must be an integer in [2, 16], got {self.bits!r}")
        if self.granularity is Granularity.PER_TOKEN and self.target is not Target.ACTIVATION:
            raise GranularityMismatch("per-token granularity only applies to activations")

    @property
    def qmax(self) -> int:
        return 2 ** (self.bits - 1) - 1


def weight_spec(bits: int = 4, granularity=Granularity.PER_CHANNEL) -> QuantSpec:
    return QuantSpec(bits, granularity, Target.WEIGHT)


def activation_spec(bits: int = 4, granularity=Granularity.PER_TENSOR) -> QuantSpec:
    return QuantSpec(bits, granularity, Target.ACTIVATION)


@dataclass(frozen=True, eq=False)
class QuantizedTensor:
    codes: np.ndarray  # int64, same shape as the source
    scales: np.ndarray  # float64, one per group
    spec: QuantSpec

    def scale_map(self) -> np.ndarray:
        """Scales broadcast to the shape of ``codes``."""
        g = self.spec.granularity
        if g is Granularity.PER_TENSOR:
            return np.full(self.codes.shape, self.scales[0])
        if g is Granularity.PER_CHANNEL:
            return np.broadcast_to(self.scales[:, None], self.codes.shape)
        return np.broadcast_to(self.scales[None, :], self.codes.shape)


def _group_absmax(x: np.ndarray, g: Granularity) -> np.ndarray:
    a = np.abs(x)
    if g is Granularity.PER_TENSOR:
        return np.array([a.max()]) if a.size else np.zeros(1)
    if g is Granularity.PER_CHANNEL:
        return a.max(axis=1) if x.shape[1] else np.zeros(x.shape[0])
    return a.max(axis=0) if x.shape[0] else np.zeros(x.shape[1])


def _stable_scales(absmax: np.ndarray, qmax: int) -> np.ndarray:
    scales = absmax / qmax
    # Requantizing dequantized values recomputes fl(fl(qmax*s)/qmax); nudge s
    # to a fixed point of that map so fake_quant is bit-exactly idempotent.
    for _ in range(8):
        bad = (scales * qmax) / qmax != scales
        if not bad.any():
            break
        scales = np.where(bad, np.nextafter(scales, np.inf), scales)
    return np.where(absmax > 0, scales, 1.0)


def quantize(x, spec: QuantSpec) -> QuantizedTensor:
    x = as_matrix(x, "x")
    scales = _stable_scales(_group_absmax(x, spec.granularity), spec.qmax)
    qt = QuantizedTensor(np.zeros(x.shape, dtype=np.int64), scales, spec)
    codes = np.clip(np.rint(x / qt.scale_map()), -spec.qmax, spec.qmax)
    return QuantizedTensor(codes.astype(np.int64), scales, spec)


def dequantize(q: QuantizedTensor) -> np.ndarray:
    return q.codes * q.scale_map()


def fake_quant(x, spec: QuantSpec) -> np.ndarray:
    return dequantize(quantize(x, spec))


def quant_error_stats(x, spec: QuantSpec) -> dict[str, float]:
    x = as_matrix(x, "x")
    err = fake_quant(x, spec) - x
    if err.size == 0:
        return {"mse": 0.0, "max_abs": 0.0}
    return {"mse": float(np.mean(err**2)), "max_abs": float(np.abs(err).max())}
